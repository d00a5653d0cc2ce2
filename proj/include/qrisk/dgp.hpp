#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qrisk/matrix.hpp"

namespace qrisk {

enum class DgpId : int { DGP1 = 1, DGP2 = 2, DGP3 = 3, DGP4 = 4 };

DgpId dgp_from_int(int id);

struct DgpSpec {
  DgpId id = DgpId::DGP1;
  std::size_t n = 0;
  std::size_t p = 50;
  std::uint64_t seed = 0;
};

struct Dataset {
  std::vector<double> y;
  Matrix Z;  // n x d predictor matrix

  std::size_t n() const { return y.size(); }
  std::size_t d() const { return Z.cols(); }
};

// Draws a dataset from the given design. Deterministic in (id, n, p, seed).
Dataset sample(const DgpSpec& spec);

// True conditional quantile function of the design at covariate vector x.
double true_cqf(DgpId id, std::span<const double> x, double tau);

// Quantile and density of the t-distribution with 2 degrees of freedom
// (closed-form CDF 1/2 + u / (2 sqrt(2 + u^2))).
double student_t2_quantile(double tau);
double student_t2_pdf(double u);

// Conditional density f_{Y|X}(t | x) of the design at covariate row x.
double conditional_density(DgpId id, std::span<const double> x, double t);

// CSV with header y,z1,...,zd; 17 significant digits.
void write_csv(const Dataset& data, std::ostream& out);
Dataset read_csv(std::istream& in);

}  // namespace qrisk
