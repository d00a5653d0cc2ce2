#include "qrisk/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qrisk/normal.hpp"
#include "qrisk/optimism.hpp"
#include "qrisk/parallel.hpp"
#include "qrisk/qr_solver.hpp"
#include "qrisk/rng.hpp"

namespace qrisk {

namespace {

constexpr std::uint64_t kTrainTag = 0x747261696E;  // "train"
constexpr std::uint64_t kEvalTag = 0x6576616C;     // "eval"
constexpr std::uint64_t kPopTag = 0x706F70;        // "pop"
constexpr std::uint64_t kDrawTag = 0x64726177;     // "draw"

std::size_t needed_p(const std::vector<ModelSpec>& models) {
  std::size_t p = 4;
  for (const ModelSpec& m : models)
    if (!m.indices.empty())
      p = std::max(p, static_cast<std::size_t>(m.indices.back()));
  return p;
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t rep, std::uint64_t tag) {
  return RngStream(seed, tag).substream(rep).key();
}

struct MeanSd {
  double mean = 0.0;
  double se = 0.0;
};

MeanSd mean_and_se(const std::vector<double>& v) {
  const double nr = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= nr;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(ss / (nr - 1.0) / nr) : 0.0};
}

}  // namespace

std::vector<McRiskOracle> mc_risk_collection(DgpId dgp, const std::vector<ModelSpec>& models,
                                             double tau, std::size_t n, std::size_t reps,
                                             std::size_t eval_samples, std::uint64_t seed,
                                             std::size_t workers) {
  if (reps < 2) throw std::invalid_argument("mc_risk: reps must be >= 2");
  if (eval_samples < 1) throw std::invalid_argument("mc_risk: eval_samples must be >= 1");
  if (models.empty()) throw std::invalid_argument("mc_risk: no models");

  const std::size_t p = needed_p(models);
  const std::size_t nm = models.size();
  std::vector<std::vector<double>> out(nm, std::vector<double>(reps));
  std::vector<std::vector<double>> diff(nm, std::vector<double>(reps));

  parallel_for(reps, workers, [&](std::size_t r) {
    const DgpSpec train{dgp, n, p, derived_seed(seed, r, kTrainTag)};
    const DgpSpec evals{dgp, eval_samples, p, derived_seed(seed, r, kEvalTag)};
    const Dataset data = sample(train);
    const Dataset edata = sample(evals);
    for (std::size_t m = 0; m < nm; ++m) {
      QuantileFit f;
      try {
        f = fit(data, models[m], tau);
      } catch (const std::exception& e) {
        throw std::runtime_error("mc_risk: replication " + std::to_string(r) + " (seed " +
                                 std::to_string(train.seed) + ") failed: " + e.what());
      }
      const double in_term = in_sample_risk(data, models[m], f);
      double o = 0.0;
      for (std::size_t i = 0; i < edata.n(); ++i) {
        const double* z = edata.Z.row(i);
        const double pred = predict(f, models[m], {z, edata.d()});
        o += check_loss(edata.y[i] - pred, tau) - check_loss(edata.y[i], tau);
      }
      o /= static_cast<double>(edata.n());
      out[m][r] = o;
      diff[m][r] = o - in_term;
    }
  });

  std::vector<McRiskOracle> result(nm);
  for (std::size_t m = 0; m < nm; ++m) {
    const MeanSd pr = mean_and_se(out[m]);
    const MeanSd opt = mean_and_se(diff[m]);
    result[m] = {pr.mean, opt.mean, pr.se, opt.se, reps, eval_samples};
  }
  return result;
}

McRiskOracle mc_risk(DgpId dgp, const ModelSpec& model, double tau, std::size_t n,
                     std::size_t reps, std::size_t eval_samples, std::uint64_t seed,
                     std::size_t workers) {
  return mc_risk_collection(dgp, {model}, tau, n, reps, eval_samples, seed, workers).front();
}

std::vector<double> population_coefficients(DgpId dgp, const ModelSpec& model, double tau,
                                            std::size_t big_n, std::uint64_t seed) {
  const DgpSpec spec{dgp, big_n, needed_p({model}), derived_seed(seed, 0, kPopTag)};
  return fit(sample(spec), model, tau).theta;
}

std::vector<double> dgp1_population_coefficients(const ModelSpec& model, double tau) {
  if (!model.intercept)
    throw std::invalid_argument("dgp1_population_coefficients: model needs an intercept");
  std::size_t relevant = 0;
  for (int idx : model.indices)
    if (idx <= 4) ++relevant;
  // omitted relevant predictors add unit variance each on top of Var(eps)=4
  const double sd = std::sqrt(4.0 + (4.0 - static_cast<double>(relevant)));
  std::vector<double> theta;
  theta.reserve(model.dim());
  theta.push_back(sd * normal_inv_cdf(tau));
  for (int idx : model.indices) theta.push_back(idx <= 4 ? 1.0 : 0.0);
  return theta;
}

double mc_covariance_form(DgpId dgp, const ModelSpec& model, double tau, std::size_t n,
                          std::size_t reps, std::uint64_t seed,
                          std::optional<std::vector<double>> theta, std::size_t workers) {
  if (reps < 2) throw std::invalid_argument("mc_covariance_form: reps must be >= 2");
  const std::vector<double> pop =
      theta ? *theta : population_coefficients(dgp, model, tau, 200000, seed);
  const std::size_t k = model.dim();
  if (pop.size() != k) throw std::invalid_argument("mc_covariance_form: theta dimension");

  const std::size_t p = needed_p({model});
  std::vector<std::vector<double>> gs(reps), ds(reps);

  parallel_for(reps, workers, [&](std::size_t r) {
    const DgpSpec spec{dgp, n, p, derived_seed(seed, r, kTrainTag)};
    const Dataset data = sample(spec);
    const QuantileFit f = fit(data, model, tau);
    std::vector<double> g(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* z = data.Z.row(i);
      const std::vector<double> row = design_row(model, {z, data.d()});
      double pred = 0.0;
      for (std::size_t j = 0; j < k; ++j) pred += row[j] * pop[j];
      const double phi = score(data.y[i] - pred, tau);
      for (std::size_t j = 0; j < k; ++j) g[j] += row[j] * phi;
    }
    for (double& v : g) v /= static_cast<double>(n);
    std::vector<double> d(k);
    for (std::size_t j = 0; j < k; ++j) d[j] = f.theta[j] - pop[j];
    gs[r] = std::move(g);
    ds[r] = std::move(d);
  });

  std::vector<double> gbar(k, 0.0), dbar(k, 0.0);
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t j = 0; j < k; ++j) {
      gbar[j] += gs[r][j];
      dbar[j] += ds[r][j];
    }
  for (std::size_t j = 0; j < k; ++j) {
    gbar[j] /= static_cast<double>(reps);
    dbar[j] /= static_cast<double>(reps);
  }
  double tr = 0.0;
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t j = 0; j < k; ++j)
      tr += (gs[r][j] - gbar[j]) * (ds[r][j] - dbar[j]);
  return tr / static_cast<double>(reps - 1);
}

std::pair<Matrix, Matrix> population_matrices(DgpId dgp, const ModelSpec& model, double tau,
                                              const std::vector<double>& theta,
                                              std::size_t mc_draws, std::uint64_t seed) {
  if (mc_draws < 1) throw std::invalid_argument("population_matrices: mc_draws must be >= 1");
  const std::size_t k = model.dim();
  if (theta.size() != k) throw std::invalid_argument("population_matrices: theta dimension");

  const DgpSpec spec{dgp, mc_draws, needed_p({model}), derived_seed(seed, 0, kDrawTag)};
  const Dataset data = sample(spec);
  Matrix d0(k, k), d1(k, k);
  for (std::size_t i = 0; i < mc_draws; ++i) {
    const double* z = data.Z.row(i);
    const std::vector<double> row = design_row(model, {z, data.d()});
    double pred = 0.0;
    for (std::size_t j = 0; j < k; ++j) pred += row[j] * theta[j];
    const double phi = score(data.y[i] - pred, tau);
    const double f = conditional_density(dgp, {z, data.d()}, pred);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a; b < k; ++b) {
        d1(a, b) += phi * phi * row[a] * row[b];
        d0(a, b) += f * row[a] * row[b];
      }
  }
  const double inv = 1.0 / static_cast<double>(mc_draws);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a; b < k; ++b) {
      d0(a, b) *= inv;
      d1(a, b) *= inv;
      d0(b, a) = d0(a, b);
      d1(b, a) = d1(a, b);
    }
  return {d0, d1};
}

double location_trace(double tau, double f_at_quantile, std::size_t size, std::size_t n) {
  if (!(f_at_quantile > 0.0))
    throw std::domain_error("location_trace: density must be positive");
  return tau * (1.0 - tau) / f_at_quantile * static_cast<double>(size) /
         static_cast<double>(n);
}

namespace {

constexpr double kDgp2NoiseVar = 12.384;
constexpr double kDgp2Rho = 0.8;

double ar1_cov(int i, int j) { return std::pow(kDgp2Rho, std::abs(i - j)); }

// Conditional law of y given the small model's predictors, as affine
// coefficients on x_{S1} plus a Gaussian with fixed variance.
struct ConditionalLaw {
  std::vector<double> alpha;  // weights on x_{S1}
  double var = 0.0;
};

ConditionalLaw conditional_law(DgpId dgp, const ModelSpec& small_model) {
  ConditionalLaw law;
  const std::vector<int>& s1 = small_model.indices;
  law.alpha.assign(s1.size(), 0.0);
  if (dgp == DgpId::DGP1) {
    std::size_t relevant = 0;
    for (std::size_t j = 0; j < s1.size(); ++j)
      if (s1[j] <= 4) {
        law.alpha[j] = 1.0;
        ++relevant;
      }
    law.var = 4.0 + (4.0 - static_cast<double>(relevant));
    return law;
  }
  // DGP2: y = s'x + eps with s = 1 on covariates 1..4, x ~ N(0, Sigma)
  double signal_var = 0.0;
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j) signal_var += ar1_cov(i, j);
  if (s1.empty()) {
    law.var = signal_var + kDgp2NoiseVar;
    return law;
  }
  const std::size_t k1 = s1.size();
  Matrix sig(k1, k1);
  std::vector<double> t(k1, 0.0);  // (Sigma s)_{S1}
  for (std::size_t a = 0; a < k1; ++a) {
    for (std::size_t b = 0; b < k1; ++b) sig(a, b) = ar1_cov(s1[a], s1[b]);
    for (int j = 1; j <= 4; ++j) t[a] += ar1_cov(s1[a], j);
  }
  Matrix rhs(k1, 1);
  for (std::size_t a = 0; a < k1; ++a) rhs(a, 0) = t[a];
  const Matrix alpha = solve_spd(sig, rhs);
  double explained = 0.0;
  for (std::size_t a = 0; a < k1; ++a) {
    law.alpha[a] = alpha(a, 0);
    explained += alpha(a, 0) * t[a];
  }
  law.var = signal_var + kDgp2NoiseVar - explained;
  return law;
}

}  // namespace

double nested_trace(DgpId dgp, const ModelSpec& small_model, const ModelSpec& big_model,
                    double tau, std::size_t n, std::size_t mc_draws, std::uint64_t seed) {
  if (dgp != DgpId::DGP1 && dgp != DgpId::DGP2)
    throw std::invalid_argument("nested_trace: Gaussian conditioning known for DGP1/DGP2 only");
  if (!big_model.nests(small_model))
    throw std::invalid_argument("nested_trace: small model not nested in big model");
  if (mc_draws < 1) throw std::invalid_argument("nested_trace: mc_draws must be >= 1");

  const std::vector<double> theta =
      (dgp == DgpId::DGP1 && big_model.intercept)
          ? dgp1_population_coefficients(big_model, tau)
          : population_coefficients(dgp, big_model, tau, 200000, seed);

  const ConditionalLaw law = conditional_law(dgp, small_model);
  const double sd = std::sqrt(law.var);

  const std::size_t k = big_model.dim();
  const DgpSpec spec{dgp, mc_draws, needed_p({big_model}), derived_seed(seed, 1, kDrawTag)};
  const Dataset data = sample(spec);

  Matrix d0(k, k), d1(k, k);
  for (std::size_t i = 0; i < mc_draws; ++i) {
    const double* z = data.Z.row(i);
    const std::vector<double> row = design_row(big_model, {z, data.d()});
    double pred = 0.0;
    for (std::size_t j = 0; j < k; ++j) pred += row[j] * theta[j];
    double mu = 0.0;
    for (std::size_t a = 0; a < small_model.indices.size(); ++a)
      mu += law.alpha[a] * z[small_model.indices[a] - 1];
    const double f = normal_pdf((pred - mu) / sd) / sd;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a; b < k; ++b) {
        d0(a, b) += f * row[a] * row[b];
        d1(a, b) += row[a] * row[b];
      }
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < a; ++b) {
      d0(a, b) = d0(b, a);
      d1(a, b) = d1(b, a);
    }
  return tau * (1.0 - tau) / static_cast<double>(n) * trace_solve_spd(d0, d1);
}

}  // namespace qrisk
