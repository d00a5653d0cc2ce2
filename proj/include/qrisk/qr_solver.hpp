#pragma once

#include <span>
#include <vector>

#include "qrisk/dgp.hpp"
#include "qrisk/matrix.hpp"
#include "qrisk/model.hpp"

namespace qrisk {

// Check (pinball) loss rho_tau(u) = u * (tau - 1{u < 0}).
double check_loss(double u, double tau);

// Score tau - 1{u < 0}; the indicator is strict, so score(0, tau) = tau.
double score(double u, double tau);

struct SolverOptions {
  double tol = 1e-8;       // relative duality gap
  int max_iter = 100;
  bool polish_vertex = false;  // crossover to a basic solution after convergence
};

struct QuantileFit {
  double tau = 0.5;
  std::vector<double> theta;
  std::vector<double> residuals;
  double objective = 0.0;    // mean check loss at theta
  double duality_gap = 0.0;  // relative gap at termination
  int iterations = 0;
};

// Minimizes the sample mean check loss over theta for the model's design
// (primal-dual interior point with Mehrotra predictor-corrector).
QuantileFit fit(const Dataset& data, const ModelSpec& model, double tau,
                const SolverOptions& opts = {});

// Same solver on an explicit design matrix.
QuantileFit fit_design(const Matrix& x, std::span<const double> y, double tau,
                       const SolverOptions& opts = {});

// Z_S(z)' theta for a fitted model.
double predict(const QuantileFit& fit, const ModelSpec& model, std::span<const double> z);

}  // namespace qrisk
