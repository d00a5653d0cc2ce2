#include "qrisk/optimism.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qrisk/normal.hpp"

namespace qrisk {

namespace {

// Type-7 quantile of a sorted sample (linear interpolation).
double sorted_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

Matrix weighted_gram(const Dataset& data, const ModelSpec& model,
                     const std::vector<double>& weights) {
  const Matrix x = design_matrix(data, model);
  const std::size_t n = x.rows(), k = x.cols();
  Matrix g(k, k);
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = weights[i];
    if (wi == 0.0) continue;
    const double* row = x.row(i);
    for (std::size_t a = 0; a < k; ++a) {
      const double v = wi * row[a];
      for (std::size_t b = a; b < k; ++b) g(a, b) += v * row[b];
    }
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < a; ++b) g(a, b) = g(b, a);
  return g;
}

}  // namespace

BandwidthInfo bandwidth_powell(const QuantileFit& fit, std::size_t n,
                               const BandwidthOptions& opts) {
  if (n < 4) throw std::invalid_argument("bandwidth_powell: n must be >= 4");
  if (fit.residuals.empty()) throw std::invalid_argument("bandwidth_powell: no residuals");

  const double tau = fit.tau;
  const double q = normal_inv_cdf(tau);
  const double hs = 4.5 * std::pow(normal_pdf(q), 4.0) /
                    ((2.0 * q * q + 1.0) * (2.0 * q * q + 1.0));
  BandwidthInfo info;
  info.h_n = std::pow(hs, 0.2) / std::pow(static_cast<double>(n), 0.2);

  // residual scale: min of sample sd and IQR
  const std::vector<double>& r = fit.residuals;
  const double m = static_cast<double>(r.size());
  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= m;
  double ss = 0.0;
  for (double v : r) ss += (v - mean) * (v - mean);
  const double sd = r.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;

  std::vector<double> sorted = r;
  std::sort(sorted.begin(), sorted.end());
  double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  if (opts.iqr_scaled) iqr /= 1.349;
  info.kappa = std::min(sd, iqr);
  if (!(info.kappa > 0.0)) throw std::runtime_error("bandwidth_powell: degenerate residual scale");

  double upper = tau + info.h_n;
  double lower = tau - info.h_n;
  if (upper > 0.999 || lower < 0.001) {
    info.clamp_applied = true;
    upper = std::min(upper, 0.999);
    lower = std::max(lower, 0.001);
  }
  info.c = info.kappa * (normal_inv_cdf(upper) - normal_inv_cdf(lower));
  return info;
}

Matrix d0_hat(const Dataset& data, const ModelSpec& model, const QuantileFit& fit, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("d0_hat: bandwidth must be positive");
  const std::size_t n = data.n();
  std::vector<double> w(n);
  const double scale = 1.0 / (2.0 * static_cast<double>(n) * h);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = std::abs(fit.residuals[i]) <= h ? scale : 0.0;
  return weighted_gram(data, model, w);
}

Matrix d1_hat(const Dataset& data, const ModelSpec& model, const QuantileFit& fit) {
  const std::size_t n = data.n();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = score(fit.residuals[i], fit.tau);
    w[i] = phi * phi / static_cast<double>(n);
  }
  return weighted_gram(data, model, w);
}

OptimismEstimate optimism_estimate(const Dataset& data, const ModelSpec& model,
                                   const QuantileFit& fit, std::optional<double> h,
                                   const BandwidthOptions& bw_opts) {
  if (fit.residuals.size() != data.n())
    throw std::invalid_argument("optimism_estimate: fit inconsistent with data");

  OptimismEstimate est;
  double half_width = 0.0;
  if (h) {
    if (!(*h > 0.0)) throw std::invalid_argument("optimism_estimate: bandwidth must be positive");
    est.bandwidth.c = *h;
    half_width = *h;
  } else {
    est.bandwidth = bandwidth_powell(fit, data.n(), bw_opts);
    // c estimates the full residual spacing between the tau-h_n and tau+h_n
    // quantiles; a uniform window of half-width c/4 stays well inside the
    // curvature scale of the density, where the estimate is insensitive to
    // halving or doubling the window.
    half_width = 0.25 * est.bandwidth.c;
    est.bandwidth.c = half_width;
  }

  const Matrix d0 = d0_hat(data, model, fit, half_width);
  const Matrix d1 = d1_hat(data, model, fit);
  const auto [lo, hi] = eig_extremes(d0);
  est.d0_min_eig = lo;
  est.d0_max_eig = hi;
  if (lo <= 1e-10)
    throw std::runtime_error(
        "singular density sandwich: widen bandwidth or shrink model (min eigenvalue " +
        std::to_string(lo) + ")");
  est.trace = trace_solve_spd(d0, d1);
  est.b_hat = est.trace / static_cast<double>(data.n());
  return est;
}

double in_sample_risk(const Dataset& data, const ModelSpec& model, const QuantileFit& fit) {
  (void)model;
  if (fit.residuals.size() != data.n())
    throw std::invalid_argument("in_sample_risk: fit inconsistent with data");
  double s = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i)
    s += check_loss(fit.residuals[i], fit.tau) - check_loss(data.y[i], fit.tau);
  return s / static_cast<double>(data.n());
}

RiskReport debiased_risk(const Dataset& data, const ModelSpec& model, const QuantileFit& fit,
                         std::optional<double> h, const BandwidthOptions& bw_opts) {
  const OptimismEstimate est = optimism_estimate(data, model, fit, h, bw_opts);
  RiskReport report;
  report.tau = fit.tau;
  report.model = model;
  report.in_sample = in_sample_risk(data, model, fit);
  report.b_hat = est.b_hat;
  report.pr_debiased = report.in_sample + report.b_hat;
  report.d0_min_eig = est.d0_min_eig;
  report.bandwidth = est.bandwidth.c;
  return report;
}

ModelSpec select_model(const std::vector<RiskReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("select_model: empty report list");
  for (const RiskReport& r : reports)
    if (r.tau != reports.front().tau)
      throw std::invalid_argument("select_model: mixed quantile levels");
  const RiskReport* best = &reports.front();
  for (const RiskReport& r : reports) {
    if (r.pr_debiased < best->pr_debiased) {
      best = &r;
    } else if (r.pr_debiased == best->pr_debiased) {
      if (r.model.size() < best->model.size() ||
          (r.model.size() == best->model.size() && r.model.indices < best->model.indices))
        best = &r;
    }
  }
  return best->model;
}

}  // namespace qrisk
