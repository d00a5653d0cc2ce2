#pragma once

#include <string>
#include <vector>

#include "qrisk/dgp.hpp"
#include "qrisk/matrix.hpp"

namespace qrisk {

// A candidate model: strictly increasing 1-based predictor column indices
// plus an intercept flag.
struct ModelSpec {
  std::vector<int> indices;
  bool intercept = true;

  std::size_t size() const { return indices.size(); }
  // |S| plus the intercept column.
  std::size_t dim() const { return indices.size() + (intercept ? 1 : 0); }

  void validate(std::size_t d) const;
  bool nests(const ModelSpec& other) const;  // true when other subset-of this

  std::string label() const;  // "int" or "1+2+5" etc., with "+int" suffix

  bool operator==(const ModelSpec& other) const = default;
};

// n x dim design matrix; intercept column (all ones) first when present.
Matrix design_matrix(const Dataset& data, const ModelSpec& model);

// Design row for a single covariate vector z (length >= max index).
std::vector<double> design_row(const ModelSpec& model, std::span<const double> z);

ModelSpec parse_model_indices(const std::string& text);  // "1,2,5-8" or "none"

}  // namespace qrisk
