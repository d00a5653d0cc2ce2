#include "qrisk/cv.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "qrisk/optimism.hpp"
#include "qrisk/rng.hpp"

namespace qrisk {

std::vector<std::size_t> kfold_assign(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) throw std::invalid_argument("kfold_assign: need 2 <= k <= n");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RngStream rng(seed, 0x666F6C64);  // "fold"
  for (std::size_t i = n; i-- > 1;) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
    std::swap(perm[i], perm[j]);
  }
  // contiguous blocks of the permuted order; first n % k folds get one extra
  std::vector<std::size_t> fold_of(n);
  const std::size_t base = n / k, extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    for (std::size_t t = 0; t < len; ++t) fold_of[perm[pos++]] = f;
  }
  return fold_of;
}

CvEstimate kfold_cv_with_folds(const Dataset& data, const ModelSpec& model, double tau,
                               const std::vector<std::size_t>& fold_of, std::size_t k,
                               const SolverOptions& opts) {
  const std::size_t n = data.n();
  if (fold_of.size() != n) throw std::invalid_argument("kfold_cv: fold assignment length");

  CvEstimate est;
  est.k = k;
  est.fold_sizes.assign(k, 0);
  for (std::size_t f : fold_of) est.fold_sizes.at(f)++;

  double total = 0.0;
  for (std::size_t f = 0; f < k; ++f) {
    Dataset train;
    train.y.reserve(n);
    std::vector<double> rows;
    rows.reserve(n * data.d());
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] == f) continue;
      train.y.push_back(data.y[i]);
      const double* z = data.Z.row(i);
      rows.insert(rows.end(), z, z + data.d());
    }
    train.Z = Matrix(train.y.size(), data.d());
    train.Z.data() = std::move(rows);

    QuantileFit fold_fit;
    try {
      fold_fit = fit(train, model, tau, opts);
    } catch (const std::exception& e) {
      throw std::runtime_error("kfold_cv: fit failed in fold " + std::to_string(f) + ": " +
                               e.what());
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] != f) continue;
      const double* z = data.Z.row(i);
      const double pred = predict(fold_fit, model, {z, data.d()});
      total += check_loss(data.y[i] - pred, tau) - check_loss(data.y[i], tau);
    }
  }
  est.cv_risk = total / static_cast<double>(n);

  const QuantileFit full_fit = fit(data, model, tau, opts);
  est.cv_optimism = est.cv_risk - in_sample_risk(data, model, full_fit);
  return est;
}

CvEstimate kfold_cv(const Dataset& data, const ModelSpec& model, double tau, std::size_t k,
                    std::uint64_t seed, const SolverOptions& opts) {
  return kfold_cv_with_folds(data, model, tau, kfold_assign(data.n(), k, seed), k, opts);
}

}  // namespace qrisk
