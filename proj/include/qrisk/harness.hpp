#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrisk/dgp.hpp"
#include "qrisk/model.hpp"

namespace qrisk {

// Streaming mean/variance accumulator (Welford).
class RunningStat {
 public:
  void push(double value) {
    ++count_;
    const double delta = value - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (value - mean_);
  }
  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  double sample_variance() const {
    return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
  }
  double sample_sd() const;

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// The stratified model collection: intercept-only, then for each stratum
// j in 0..4 a nested chain starting at {1..j} and adding irrelevant
// predictors 5, 6, ... one at a time. 1 + 5 * count_per_stratum models.
std::vector<ModelSpec> build_collection_dgp1(std::size_t count_per_stratum = 35,
                                             std::size_t ambient_p = 50);

struct ExperimentConfig {
  DgpId dgp = DgpId::DGP1;
  std::size_t n = 500;
  std::size_t p = 50;
  std::vector<double> taus{0.5};
  std::size_t reps = 500;
  std::string collection = "stratified:35";
  bool est_trace = true;
  bool est_cv = false;
  bool est_oracle = false;
  bool est_closed_form = false;
  std::size_t cv_k = 10;
  std::size_t oracle_reps = 1000;
  std::size_t eval_samples = 5;
  std::size_t cf_draws = 20000;
  std::uint64_t seed = 0;
  std::string out;

  std::vector<ModelSpec> models() const;
};

ExperimentConfig parse_config(std::istream& in);

struct ExperimentRow {
  double tau = 0.5;
  std::string model_id;
  std::size_t model_size = 0;
  std::size_t stratum = 0;  // relevant predictors included
  double b_hat_mean = 0.0;
  double b_hat_sd = 0.0;
  std::optional<double> cv_opt_mean;
  std::optional<double> cv_opt_sd;
  std::optional<double> oracle_optimism;
  std::optional<double> oracle_pr;
  std::optional<double> closed_form_trace;
  double pr_debiased_mean = 0.0;
};

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config,
                                          std::size_t workers = 1);

// Header plus one CSV line per row, NA for absent columns, 17 significant
// digits throughout.
std::string rows_to_csv(const std::vector<ExperimentRow>& rows);

std::pair<std::vector<double>, std::vector<std::size_t>> aggregate_histogram(
    const std::vector<double>& values, std::size_t bins);

}  // namespace qrisk
