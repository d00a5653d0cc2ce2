#include "qrisk/model.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace qrisk {

void ModelSpec::validate(std::size_t d) const {
  int prev = 0;
  for (int idx : indices) {
    if (idx <= prev)
      throw std::invalid_argument("ModelSpec: indices must be strictly increasing and >= 1");
    if (static_cast<std::size_t>(idx) > d)
      throw std::invalid_argument("ModelSpec: index " + std::to_string(idx) +
                                  " exceeds predictor count " + std::to_string(d));
    prev = idx;
  }
  if (dim() == 0) throw std::invalid_argument("ModelSpec: empty model without intercept");
}

bool ModelSpec::nests(const ModelSpec& other) const {
  if (other.intercept && !intercept) return false;
  return std::includes(indices.begin(), indices.end(), other.indices.begin(),
                       other.indices.end());
}

std::string ModelSpec::label() const {
  if (indices.empty()) return intercept ? "int" : "empty";
  std::ostringstream out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) out << '+';
    out << indices[i];
  }
  if (intercept) out << "+int";
  return out.str();
}

Matrix design_matrix(const Dataset& data, const ModelSpec& model) {
  model.validate(data.d());
  const std::size_t n = data.n();
  const std::size_t k = model.dim();
  Matrix x(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = x.row(i);
    const double* z = data.Z.row(i);
    std::size_t c = 0;
    if (model.intercept) row[c++] = 1.0;
    for (int idx : model.indices) row[c++] = z[idx - 1];
  }
  return x;
}

std::vector<double> design_row(const ModelSpec& model, std::span<const double> z) {
  std::vector<double> row;
  row.reserve(model.dim());
  if (model.intercept) row.push_back(1.0);
  for (int idx : model.indices) {
    if (static_cast<std::size_t>(idx) > z.size())
      throw std::invalid_argument("design_row: covariate vector too short");
    row.push_back(z[idx - 1]);
  }
  return row;
}

ModelSpec parse_model_indices(const std::string& text) {
  ModelSpec model;
  if (text == "none" || text == "int" || text.empty()) return model;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      model.indices.push_back(std::stoi(part));
    } else {
      const int lo = std::stoi(part.substr(0, dash));
      const int hi = std::stoi(part.substr(dash + 1));
      for (int v = lo; v <= hi; ++v) model.indices.push_back(v);
    }
  }
  std::sort(model.indices.begin(), model.indices.end());
  model.indices.erase(std::unique(model.indices.begin(), model.indices.end()),
                      model.indices.end());
  return model;
}

}  // namespace qrisk
