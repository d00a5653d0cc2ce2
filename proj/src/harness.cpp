#include "qrisk/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "qrisk/cv.hpp"
#include "qrisk/optimism.hpp"
#include "qrisk/oracle.hpp"
#include "qrisk/parallel.hpp"
#include "qrisk/qr_solver.hpp"
#include "qrisk/rng.hpp"

namespace qrisk {

double RunningStat::sample_sd() const { return std::sqrt(sample_variance()); }

std::vector<ModelSpec> build_collection_dgp1(std::size_t count_per_stratum,
                                             std::size_t ambient_p) {
  if (count_per_stratum < 1)
    throw std::invalid_argument("build_collection_dgp1: count_per_stratum must be >= 1");
  const std::size_t max_index = 4 + count_per_stratum - 1;
  if (ambient_p < max_index)
    throw std::invalid_argument("build_collection_dgp1: ambient p too small, need >= " +
                                std::to_string(max_index));
  std::vector<ModelSpec> models;
  models.reserve(1 + 5 * count_per_stratum);
  models.push_back(ModelSpec{});  // intercept only
  for (int stratum = 0; stratum <= 4; ++stratum) {
    ModelSpec base;
    for (int j = 1; j <= stratum; ++j) base.indices.push_back(j);
    models.push_back(base);
    ModelSpec current = base;
    for (std::size_t ext = 1; ext < count_per_stratum; ++ext) {
      current.indices.push_back(4 + static_cast<int>(ext));
      models.push_back(current);
    }
  }
  return models;
}

namespace {

std::vector<ModelSpec> parse_collection(const std::string& text, std::size_t ambient_p) {
  if (text.rfind("stratified", 0) == 0) {
    std::size_t count = 35;
    const auto colon = text.find(':');
    if (colon != std::string::npos) count = std::stoul(text.substr(colon + 1));
    return build_collection_dgp1(count, ambient_p);
  }
  if (text.rfind("models:", 0) == 0) {
    std::vector<ModelSpec> models;
    std::istringstream in(text.substr(7));
    std::string part;
    while (std::getline(in, part, ';'))
      if (!part.empty()) models.push_back(parse_model_indices(part));
    if (models.empty()) throw std::invalid_argument("collection: no models given");
    return models;
  }
  throw std::invalid_argument("collection: expected 'stratified[:N]' or 'models:...'");
}

std::size_t stratum_of(const ModelSpec& model) {
  std::size_t s = 0;
  for (int idx : model.indices)
    if (idx <= 4) ++s;
  return s;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr std::uint64_t kRepTag = 0x657870;     // "exp"
constexpr std::uint64_t kOracleTag = 0x6F7263;  // "orc"
constexpr std::uint64_t kCvTag = 0x6376;        // "cv"

}  // namespace

std::vector<ModelSpec> ExperimentConfig::models() const {
  return parse_collection(collection, p);
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  bool seed_given = false;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    if (key == "dgp") {
      cfg.dgp = dgp_from_int(std::stoi(value));
    } else if (key == "n") {
      cfg.n = std::stoul(value);
    } else if (key == "p") {
      cfg.p = std::stoul(value);
    } else if (key == "taus") {
      cfg.taus.clear();
      std::istringstream vs(value);
      std::string tok;
      while (std::getline(vs, tok, ',')) cfg.taus.push_back(std::stod(tok));
    } else if (key == "reps") {
      cfg.reps = std::stoul(value);
    } else if (key == "collection") {
      cfg.collection = value;
    } else if (key == "estimators") {
      cfg.est_trace = cfg.est_cv = cfg.est_oracle = cfg.est_closed_form = false;
      std::istringstream vs(value);
      std::string tok;
      while (std::getline(vs, tok, ',')) {
        if (tok == "trace")
          cfg.est_trace = true;
        else if (tok == "cv")
          cfg.est_cv = true;
        else if (tok == "oracle")
          cfg.est_oracle = true;
        else if (tok == "closed_form")
          cfg.est_closed_form = true;
        else if (!tok.empty())
          throw std::invalid_argument("estimators: unknown entry '" + tok + "'");
      }
    } else if (key == "cv_k") {
      cfg.cv_k = std::stoul(value);
    } else if (key == "oracle_reps") {
      cfg.oracle_reps = std::stoul(value);
    } else if (key == "eval_samples") {
      cfg.eval_samples = std::stoul(value);
    } else if (key == "cf_draws") {
      cfg.cf_draws = std::stoul(value);
    } else if (key == "seed") {
      cfg.seed = std::stoull(value);
      seed_given = true;
    } else if (key == "out") {
      cfg.out = value;
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (cfg.reps < 1) throw std::invalid_argument("config: reps must be >= 1");
  if (cfg.taus.empty()) throw std::invalid_argument("config: taus must be nonempty");
  for (double t : cfg.taus)
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("config: taus must lie in (0,1)");
  if (!seed_given) throw std::invalid_argument("config: seed is required");
  return cfg;
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config,
                                          std::size_t workers) {
  const std::vector<ModelSpec> models = config.models();
  for (const ModelSpec& m : models) m.validate(config.p);
  const std::size_t nm = models.size();
  const std::size_t nt = config.taus.size();
  const std::size_t reps = config.reps;

  struct RepCell {
    double b_hat = 0.0;
    double pr_debiased = 0.0;
    double cv_opt = 0.0;
  };
  // slot per (rep, tau, model); written by exactly one task
  std::vector<RepCell> cells(config.est_trace || config.est_cv ? reps * nt * nm : 0);

  if (config.est_trace || config.est_cv) {
    parallel_for(reps, workers, [&](std::size_t r) {
      const DgpSpec spec{config.dgp, config.n, config.p,
                         RngStream(config.seed, kRepTag).substream(r).key()};
      const Dataset data = sample(spec);
      for (std::size_t t = 0; t < nt; ++t) {
        const double tau = config.taus[t];
        for (std::size_t m = 0; m < nm; ++m) {
          RepCell& cell = cells[(r * nt + t) * nm + m];
          try {
            if (config.est_trace) {
              const QuantileFit f = fit(data, models[m], tau);
              const OptimismEstimate est = optimism_estimate(data, models[m], f);
              cell.b_hat = est.b_hat;
              cell.pr_debiased = in_sample_risk(data, models[m], f) + est.b_hat;
            }
            if (config.est_cv) {
              const std::uint64_t cv_seed =
                  RngStream(config.seed, kCvTag).substream(r).key();
              cell.cv_opt =
                  kfold_cv(data, models[m], tau, config.cv_k, cv_seed).cv_optimism;
            }
          } catch (const std::exception& e) {
            throw std::runtime_error("run_experiment: replication " + std::to_string(r) +
                                     ", model " + models[m].label() + ", tau " +
                                     std::to_string(tau) + ": " + e.what());
          }
        }
      }
    });
  }

  std::vector<ExperimentRow> rows;
  rows.reserve(nt * nm);
  for (std::size_t t = 0; t < nt; ++t) {
    const double tau = config.taus[t];

    std::vector<McRiskOracle> oracle;
    if (config.est_oracle)
      oracle = mc_risk_collection(config.dgp, models, tau, config.n, config.oracle_reps,
                                  config.eval_samples,
                                  RngStream(config.seed, kOracleTag).substream(t).key(),
                                  workers);

    for (std::size_t m = 0; m < nm; ++m) {
      ExperimentRow row;
      row.tau = tau;
      row.model_id = models[m].label();
      row.model_size = models[m].size();
      row.stratum = stratum_of(models[m]);

      if (config.est_trace || config.est_cv) {
        RunningStat b_hat, pr_deb, cv_opt;
        for (std::size_t r = 0; r < reps; ++r) {
          const RepCell& cell = cells[(r * nt + t) * nm + m];
          b_hat.push(cell.b_hat);
          pr_deb.push(cell.pr_debiased);
          cv_opt.push(cell.cv_opt);
        }
        if (config.est_trace) {
          row.b_hat_mean = b_hat.mean();
          row.b_hat_sd = b_hat.sample_sd();
          row.pr_debiased_mean = pr_deb.mean();
        }
        if (config.est_cv) {
          row.cv_opt_mean = cv_opt.mean();
          row.cv_opt_sd = cv_opt.sample_sd();
        }
      }
      if (config.est_oracle) {
        row.oracle_optimism = oracle[m].optimism;
        row.oracle_pr = oracle[m].pr;
      }
      if (config.est_closed_form &&
          (config.dgp == DgpId::DGP1 || config.dgp == DgpId::DGP2)) {
        ModelSpec base;
        for (int idx : models[m].indices)
          if (idx <= 4) base.indices.push_back(idx);
        row.closed_form_trace = nested_trace(config.dgp, base, models[m], tau, config.n,
                                             config.cf_draws, config.seed);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string rows_to_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  out << "tau,model_id,model_size,stratum,b_hat_mean,b_hat_sd,cv_opt_mean,cv_opt_sd,"
         "oracle_optimism,oracle_pr,closed_form_trace,pr_debiased_mean\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? format_g17(*v) : std::string("NA");
  };
  for (const ExperimentRow& r : rows) {
    out << format_g17(r.tau) << ',' << r.model_id << ',' << r.model_size << ','
        << r.stratum << ',' << format_g17(r.b_hat_mean) << ',' << format_g17(r.b_hat_sd)
        << ',' << opt(r.cv_opt_mean) << ',' << opt(r.cv_opt_sd) << ','
        << opt(r.oracle_optimism) << ',' << opt(r.oracle_pr) << ','
        << opt(r.closed_form_trace) << ',' << format_g17(r.pr_debiased_mean) << "\n";
  }
  return out.str();
}

std::pair<std::vector<double>, std::vector<std::size_t>> aggregate_histogram(
    const std::vector<double>& values, std::size_t bins) {
  if (values.empty()) throw std::invalid_argument("aggregate_histogram: empty input");
  if (bins < 1) throw std::invalid_argument("aggregate_histogram: bins must be >= 1");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<double> edges(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b)
    edges[b] = lo + width * static_cast<double>(b);
  edges[bins] = hi;
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
    if (b >= bins) b = bins - 1;  // right edge inclusive
    ++counts[b];
  }
  return {edges, counts};
}

}  // namespace qrisk
