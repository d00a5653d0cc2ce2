#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qrisk/dgp.hpp"
#include "qrisk/matrix.hpp"
#include "qrisk/model.hpp"

namespace qrisk {

struct McRiskOracle {
  double pr = 0.0;
  double optimism = 0.0;
  double pr_se = 0.0;
  double optimism_se = 0.0;
  std::size_t reps = 0;
  std::size_t eval_samples = 0;
};

// Monte Carlo predictive risk and expected optimism: per replication draw a
// training set, fit, measure the in-sample term and the average loss
// improvement on fresh evaluation points. One shared replication set serves
// all models.
std::vector<McRiskOracle> mc_risk_collection(DgpId dgp, const std::vector<ModelSpec>& models,
                                             double tau, std::size_t n, std::size_t reps,
                                             std::size_t eval_samples, std::uint64_t seed,
                                             std::size_t workers = 1);

McRiskOracle mc_risk(DgpId dgp, const ModelSpec& model, double tau, std::size_t n,
                     std::size_t reps, std::size_t eval_samples, std::uint64_t seed,
                     std::size_t workers = 1);

// Fits one giant sample to approximate the population quantile regression
// coefficients.
std::vector<double> population_coefficients(DgpId dgp, const ModelSpec& model, double tau,
                                            std::size_t big_n, std::uint64_t seed);

// Closed-form population coefficients of a DGP1 model with intercept:
// unit slopes on included relevant predictors, zero slopes otherwise,
// intercept sqrt(8 - j) * Phi^{-1}(tau) with j relevant predictors included.
std::vector<double> dgp1_population_coefficients(const ModelSpec& model, double tau);

// Monte Carlo trace of the covariance between the population score average
// and the coefficient estimation error.
double mc_covariance_form(DgpId dgp, const ModelSpec& model, double tau, std::size_t n,
                          std::size_t reps, std::uint64_t seed,
                          std::optional<std::vector<double>> theta = std::nullopt,
                          std::size_t workers = 1);

// Population matrices of the trace form: D0 uses the known conditional noise
// density, D1 the squared score, both averaged over Monte Carlo draws.
std::pair<Matrix, Matrix> population_matrices(DgpId dgp, const ModelSpec& model, double tau,
                                              const std::vector<double>& theta,
                                              std::size_t mc_draws, std::uint64_t seed);

// Location-model closed form tau(1-tau) / f * size / n.
double location_trace(double tau, double f_at_quantile, std::size_t size, std::size_t n);

// Nested location-model trace: tau(1-tau)/n * tr(D0(S1,S2)^{-1} D1(S2)),
// with the conditional density of y given the small model's predictors
// obtained by Gaussian conditioning (DGP1 and DGP2 only).
double nested_trace(DgpId dgp, const ModelSpec& small_model, const ModelSpec& big_model,
                    double tau, std::size_t n, std::size_t mc_draws, std::uint64_t seed);

}  // namespace qrisk
