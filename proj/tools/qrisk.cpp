// qrisk: fit misspecified linear quantile regressions and estimate their
// de-biased predictive risk. All subcommands print CSV with a '#' comment
// header echoing the resolved configuration.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qrisk/cv.hpp"
#include "qrisk/dgp.hpp"
#include "qrisk/harness.hpp"
#include "qrisk/model.hpp"
#include "qrisk/optimism.hpp"
#include "qrisk/oracle.hpp"
#include "qrisk/qr_solver.hpp"

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot open output file: " + out_path);
  out << text;
}

qrisk::Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open data file: " + path);
  return qrisk::read_csv(in);
}

struct Common {
  std::string out;
  std::size_t workers = 1;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--out", common.out, "write output to this file instead of stdout");
  cmd->add_option("--workers", common.workers, "worker threads")->check(CLI::PositiveNumber);
}

int run_fit(const std::string& data_path, double tau, const std::string& cols,
            bool intercept, const Common& common) {
  const qrisk::Dataset data = load_csv(data_path);
  qrisk::ModelSpec model = qrisk::parse_model_indices(cols);
  model.intercept = intercept;
  model.validate(data.d());
  const qrisk::QuantileFit f = qrisk::fit(data, model, tau);

  std::ostringstream csv;
  csv << "# qrisk fit --data " << data_path << " --tau " << g17(tau) << " --cols " << cols
      << (intercept ? " --intercept" : " --no-intercept") << "\n";
  csv << "term,estimate\n";
  std::size_t k = 0;
  if (model.intercept) csv << "intercept," << g17(f.theta[k++]) << "\n";
  for (int idx : model.indices) csv << "z" << idx << "," << g17(f.theta[k++]) << "\n";
  csv << "objective," << g17(f.objective) << "\n";
  csv << "duality_gap," << g17(f.duality_gap) << "\n";
  emit(csv.str(), common.out);
  return 0;
}

int run_risk(const std::string& data_path, double tau, const std::string& cols,
             bool intercept, std::optional<double> bandwidth, bool iqr_scaled,
             const Common& common) {
  const qrisk::Dataset data = load_csv(data_path);
  qrisk::ModelSpec model = qrisk::parse_model_indices(cols);
  model.intercept = intercept;
  model.validate(data.d());
  const qrisk::QuantileFit f = qrisk::fit(data, model, tau);
  const qrisk::BandwidthOptions bw{iqr_scaled};
  const qrisk::RiskReport report = qrisk::debiased_risk(data, model, f, bandwidth, bw);

  std::ostringstream csv;
  csv << "# qrisk risk --data " << data_path << " --tau " << g17(tau) << " --cols " << cols
      << (intercept ? " --intercept" : " --no-intercept");
  if (bandwidth) csv << " --bandwidth " << g17(*bandwidth);
  if (iqr_scaled) csv << " --iqr-scaled";
  csv << "\n";
  csv << "tau,model,h,in_sample,b_hat,pr_debiased,d0_min_eig\n";
  csv << g17(report.tau) << ',' << model.label() << ',' << g17(report.bandwidth) << ','
      << g17(report.in_sample) << ',' << g17(report.b_hat) << ','
      << g17(report.pr_debiased) << ',' << g17(report.d0_min_eig) << "\n";
  emit(csv.str(), common.out);
  return 0;
}

int run_cv(const std::string& data_path, double tau, const std::string& cols,
           bool intercept, std::size_t k, std::uint64_t seed, const Common& common) {
  const qrisk::Dataset data = load_csv(data_path);
  qrisk::ModelSpec model = qrisk::parse_model_indices(cols);
  model.intercept = intercept;
  model.validate(data.d());
  const qrisk::CvEstimate est = qrisk::kfold_cv(data, model, tau, k, seed);

  std::ostringstream csv;
  csv << "# qrisk cv --data " << data_path << " --tau " << g17(tau) << " --cols " << cols
      << (intercept ? " --intercept" : " --no-intercept") << " --k " << k << " --seed "
      << seed << "\n";
  csv << "tau,model,k,cv_risk,cv_optimism\n";
  csv << g17(tau) << ',' << model.label() << ',' << est.k << ',' << g17(est.cv_risk) << ','
      << g17(est.cv_optimism) << "\n";
  emit(csv.str(), common.out);
  return 0;
}

int run_oracle(int dgp, double tau, const std::string& cols, bool intercept, std::size_t n,
               std::size_t reps, std::size_t eval_samples, std::uint64_t seed,
               const Common& common) {
  qrisk::ModelSpec model = qrisk::parse_model_indices(cols);
  model.intercept = intercept;
  const qrisk::McRiskOracle est =
      qrisk::mc_risk(qrisk::dgp_from_int(dgp), model, tau, n, reps, eval_samples, seed,
                     common.workers);

  std::ostringstream csv;
  csv << "# qrisk oracle --dgp " << dgp << " --tau " << g17(tau) << " --cols " << cols
      << (intercept ? " --intercept" : " --no-intercept") << " --n " << n << " --reps "
      << reps << " --eval-samples " << eval_samples << " --seed " << seed << " --workers "
      << common.workers << "\n";
  csv << "dgp,tau,model,n,reps,pr,pr_se,optimism,optimism_se\n";
  csv << dgp << ',' << g17(tau) << ',' << model.label() << ',' << n << ',' << reps << ','
      << g17(est.pr) << ',' << g17(est.pr_se) << ',' << g17(est.optimism) << ','
      << g17(est.optimism_se) << "\n";
  emit(csv.str(), common.out);
  return 0;
}

int run_simulate(int dgp, std::size_t n, std::size_t p, std::uint64_t seed,
                 const Common& common) {
  const qrisk::DgpSpec spec{qrisk::dgp_from_int(dgp), n, p, seed};
  const qrisk::Dataset data = qrisk::sample(spec);
  std::ostringstream csv;
  csv << "# qrisk simulate --dgp " << dgp << " --n " << n << " --p " << p << " --seed "
      << seed << "\n";
  qrisk::write_csv(data, csv);
  emit(csv.str(), common.out);
  return 0;
}

int run_experiment(const std::string& config_path, const Common& common,
                   bool out_given) {
  std::ifstream in(config_path);
  if (!in) throw std::invalid_argument("cannot open config file: " + config_path);
  const qrisk::ExperimentConfig cfg = qrisk::parse_config(in);
  const auto rows = qrisk::run_experiment(cfg, common.workers);

  std::ostringstream csv;
  csv << "# qrisk experiment --config " << config_path << "\n";
  csv << "# dgp=" << static_cast<int>(cfg.dgp) << " n=" << cfg.n << " p=" << cfg.p
      << " reps=" << cfg.reps << " collection=" << cfg.collection << " seed=" << cfg.seed
      << "\n# taus=";
  for (std::size_t i = 0; i < cfg.taus.size(); ++i)
    csv << (i ? "," : "") << g17(cfg.taus[i]);
  csv << " estimators=";
  bool first = true;
  for (auto [on, name] : {std::pair{cfg.est_trace, "trace"}, {cfg.est_cv, "cv"},
                          {cfg.est_oracle, "oracle"}, {cfg.est_closed_form, "closed_form"}})
    if (on) {
      csv << (first ? "" : ",") << name;
      first = false;
    }
  csv << " cv_k=" << cfg.cv_k << " oracle_reps=" << cfg.oracle_reps
      << " eval_samples=" << cfg.eval_samples << " cf_draws=" << cfg.cf_draws << "\n";
  csv << qrisk::rows_to_csv(rows);
  // the config's own `out` applies unless --out overrides it
  emit(csv.str(), out_given ? common.out : cfg.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantile regression predictive risk toolkit"};
  app.require_subcommand(1);

  Common common;

  std::string data_path, cols = "none", config_path;
  double tau = 0.5;
  bool intercept = true, iqr_scaled = false;
  std::optional<double> bandwidth;
  int dgp = 1;
  std::size_t n = 500, p = 50, k = 10, reps = 1000, eval_samples = 5;
  std::uint64_t seed = 0;

  auto* fit_cmd = app.add_subcommand("fit", "fit a quantile regression on a CSV dataset");
  fit_cmd->add_option("--data", data_path, "dataset CSV")->required();
  fit_cmd->add_option("--tau", tau, "quantile level in (0,1)")->required();
  fit_cmd->add_option("--cols", cols, "predictor columns, e.g. 1,2,5-8 or none");
  fit_cmd->add_flag("--intercept,!--no-intercept", intercept, "include intercept");
  add_common(fit_cmd, common);

  auto* risk_cmd = app.add_subcommand("risk", "de-biased predictive risk of one model");
  risk_cmd->add_option("--data", data_path, "dataset CSV")->required();
  risk_cmd->add_option("--tau", tau, "quantile level in (0,1)")->required();
  risk_cmd->add_option("--cols", cols, "predictor columns");
  risk_cmd->add_flag("--intercept,!--no-intercept", intercept, "include intercept");
  risk_cmd->add_option("--bandwidth", bandwidth, "override the Powell bandwidth");
  risk_cmd->add_flag("--iqr-scaled", iqr_scaled, "use min(sd, IQR/1.349) residual scale");
  add_common(risk_cmd, common);

  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validated risk of one model");
  cv_cmd->add_option("--data", data_path, "dataset CSV")->required();
  cv_cmd->add_option("--tau", tau, "quantile level in (0,1)")->required();
  cv_cmd->add_option("--cols", cols, "predictor columns");
  cv_cmd->add_flag("--intercept,!--no-intercept", intercept, "include intercept");
  cv_cmd->add_option("--k", k, "number of folds")->check(CLI::PositiveNumber);
  cv_cmd->add_option("--seed", seed, "RNG seed for the fold shuffle")->required();
  add_common(cv_cmd, common);

  auto* oracle_cmd = app.add_subcommand("oracle", "Monte Carlo predictive-risk oracle");
  oracle_cmd->add_option("--dgp", dgp, "data generating process 1-4")
      ->check(CLI::Range(1, 4));
  oracle_cmd->add_option("--tau", tau, "quantile level in (0,1)")->required();
  oracle_cmd->add_option("--cols", cols, "predictor columns");
  oracle_cmd->add_flag("--intercept,!--no-intercept", intercept, "include intercept");
  oracle_cmd->add_option("--n", n, "training sample size")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--reps", reps, "replications")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--eval-samples", eval_samples, "fresh points per replication")
      ->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--seed", seed, "RNG seed")->required();
  add_common(oracle_cmd, common);

  auto* sim_cmd = app.add_subcommand("simulate", "draw and print one dataset");
  sim_cmd->add_option("--dgp", dgp, "data generating process 1-4")->check(CLI::Range(1, 4));
  sim_cmd->add_option("--n", n, "sample size")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--p", p, "ambient predictor count")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", seed, "RNG seed")->required();
  add_common(sim_cmd, common);

  auto* exp_cmd = app.add_subcommand("experiment", "run a replication study from a config");
  exp_cmd->add_option("--config", config_path, "key = value config file")->required();
  add_common(exp_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(data_path, tau, cols, intercept, common);
    if (risk_cmd->parsed())
      return run_risk(data_path, tau, cols, intercept, bandwidth, iqr_scaled, common);
    if (cv_cmd->parsed()) return run_cv(data_path, tau, cols, intercept, k, seed, common);
    if (oracle_cmd->parsed())
      return run_oracle(dgp, tau, cols, intercept, n, reps, eval_samples, seed, common);
    if (sim_cmd->parsed()) return run_simulate(dgp, n, p, seed, common);
    if (exp_cmd->parsed())
      return run_experiment(config_path, common, exp_cmd->count("--out") > 0);
  } catch (const std::invalid_argument& e) {
    std::cerr << "qrisk: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "qrisk: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
