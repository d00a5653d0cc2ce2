#pragma once

#include <cstdint>
#include <vector>

#include "qrisk/dgp.hpp"
#include "qrisk/model.hpp"
#include "qrisk/qr_solver.hpp"

namespace qrisk {

struct CvEstimate {
  std::size_t k = 0;
  double cv_risk = 0.0;
  double cv_optimism = 0.0;  // cv_risk minus full-sample in-sample risk
  std::vector<std::size_t> fold_sizes;
};

// fold_of[i] in 0..k-1; a seeded Fisher-Yates permutation cut into
// contiguous blocks whose sizes differ by at most one.
std::vector<std::size_t> kfold_assign(std::size_t n, std::size_t k, std::uint64_t seed);

// Core routine with explicit fold assignment (also used by tests).
CvEstimate kfold_cv_with_folds(const Dataset& data, const ModelSpec& model, double tau,
                               const std::vector<std::size_t>& fold_of, std::size_t k,
                               const SolverOptions& opts = {});

CvEstimate kfold_cv(const Dataset& data, const ModelSpec& model, double tau, std::size_t k,
                    std::uint64_t seed, const SolverOptions& opts = {});

}  // namespace qrisk
