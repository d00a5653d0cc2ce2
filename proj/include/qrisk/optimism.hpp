#pragma once

#include <optional>
#include <vector>

#include "qrisk/dgp.hpp"
#include "qrisk/matrix.hpp"
#include "qrisk/model.hpp"
#include "qrisk/qr_solver.hpp"

namespace qrisk {

struct BandwidthInfo {
  double h_n = 0.0;    // Hall-Sheather-type rate term
  double kappa = 0.0;  // residual scale
  double c = 0.0;      // final bandwidth
  bool clamp_applied = false;
};

struct BandwidthOptions {
  // kappa = min(sd, IQR) by default; the scaled variant uses min(sd, IQR/1.349).
  bool iqr_scaled = false;
};

BandwidthInfo bandwidth_powell(const QuantileFit& fit, std::size_t n,
                               const BandwidthOptions& opts = {});

// Uniform-kernel density sandwich (1/(2nh)) sum 1{|e_i| <= h} z_i z_i'.
Matrix d0_hat(const Dataset& data, const ModelSpec& model, const QuantileFit& fit, double h);

// Squared-score Gram (1/n) sum score(e_i, tau)^2 z_i z_i'.
Matrix d1_hat(const Dataset& data, const ModelSpec& model, const QuantileFit& fit);

struct OptimismEstimate {
  BandwidthInfo bandwidth;
  double trace = 0.0;  // tr(D0^{-1} D1)
  double b_hat = 0.0;  // trace / n
  double d0_min_eig = 0.0;
  double d0_max_eig = 0.0;
};

// Plug-in expected-optimism estimate. Throws when D0 is numerically singular.
OptimismEstimate optimism_estimate(const Dataset& data, const ModelSpec& model,
                                   const QuantileFit& fit,
                                   std::optional<double> h = std::nullopt,
                                   const BandwidthOptions& bw_opts = {});

// (1/n) sum [rho_tau(e_i) - rho_tau(y_i)].
double in_sample_risk(const Dataset& data, const ModelSpec& model, const QuantileFit& fit);

struct RiskReport {
  double tau = 0.5;
  ModelSpec model;
  double in_sample = 0.0;
  double b_hat = 0.0;
  double pr_debiased = 0.0;  // in_sample + b_hat
  double d0_min_eig = 0.0;
  double bandwidth = 0.0;
  std::optional<double> cv_risk;
  std::optional<double> oracle_pr;
};

RiskReport debiased_risk(const Dataset& data, const ModelSpec& model, const QuantileFit& fit,
                         std::optional<double> h = std::nullopt,
                         const BandwidthOptions& bw_opts = {});

// Minimal pr_debiased; ties go to the smaller model, then lexicographic indices.
ModelSpec select_model(const std::vector<RiskReport>& reports);

}  // namespace qrisk
