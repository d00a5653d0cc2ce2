#pragma once

namespace qrisk {

double normal_pdf(double x);

// Standard normal CDF, absolute error below 1e-12.
double normal_cdf(double x);

// Inverse standard normal CDF for p in (0,1). Rational approximation with a
// Halley polish step; relative error well below 1e-9. Throws std::domain_error
// outside (0,1).
double normal_inv_cdf(double p);

}  // namespace qrisk
