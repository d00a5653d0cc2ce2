#include "qrisk/dgp.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qrisk/normal.hpp"
#include "qrisk/rng.hpp"

namespace qrisk {

namespace {

constexpr std::uint64_t kCovariateTag = 0x636F76;  // "cov"
constexpr std::uint64_t kNoiseTag = 0x657073;      // "eps"

constexpr double kDgp2NoiseVar = 12.384;  // signal-to-noise ratio one
constexpr double kDgp2Rho = 0.8;

// Cholesky factor of Sigma_ij = rho^|i-j| (leading p x p block; the factor of
// a leading block equals the leading block of the full factor).
Matrix ar1_cholesky(std::size_t p, double rho) {
  Matrix sigma(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      sigma(i, j) = std::pow(rho, std::abs(static_cast<double>(i) - static_cast<double>(j)));
  Matrix l(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    double d = sigma(j, j);
    for (std::size_t t = 0; t < j; ++t) d -= l(j, t) * l(j, t);
    d = std::sqrt(d);
    l(j, j) = d;
    for (std::size_t i = j + 1; i < p; ++i) {
      double v = sigma(i, j);
      for (std::size_t t = 0; t < j; ++t) v -= l(i, t) * l(j, t);
      l(i, j) = v / d;
    }
  }
  return l;
}

}  // namespace

DgpId dgp_from_int(int id) {
  if (id < 1 || id > 4) throw std::invalid_argument("dgp id must be 1..4");
  return static_cast<DgpId>(id);
}

Dataset sample(const DgpSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("sample: n must be >= 1");
  if (spec.p < 4) throw std::invalid_argument("sample: p must be >= 4");

  RngStream cov(spec.seed, kCovariateTag);
  RngStream noise(spec.seed, kNoiseTag);

  const std::size_t n = spec.n, p = spec.p;
  Dataset data;
  data.y.resize(n);
  data.Z = Matrix(n, p);

  Matrix chol;
  if (spec.id == DgpId::DGP2) chol = ar1_cholesky(p, kDgp2Rho);
  std::vector<double> raw(p);

  for (std::size_t i = 0; i < n; ++i) {
    double* z = data.Z.row(i);
    switch (spec.id) {
      case DgpId::DGP1:
      case DgpId::DGP4:
        for (std::size_t j = 0; j < p; ++j) z[j] = cov.normal();
        break;
      case DgpId::DGP2: {
        for (std::size_t j = 0; j < p; ++j) raw[j] = cov.normal();
        for (std::size_t j = 0; j < p; ++j) {
          double v = 0.0;
          for (std::size_t t = 0; t <= j; ++t) v += chol(j, t) * raw[t];
          z[j] = v;
        }
        break;
      }
      case DgpId::DGP3:
        for (std::size_t j = 0; j < p; ++j) z[j] = 2.0 * cov.uniform();
        break;
    }
    switch (spec.id) {
      case DgpId::DGP1:
        data.y[i] = z[0] + z[1] + z[2] + z[3] + 2.0 * noise.normal();
        break;
      case DgpId::DGP2:
        data.y[i] = z[0] + z[1] + z[2] + z[3] + std::sqrt(kDgp2NoiseVar) * noise.normal();
        break;
      case DgpId::DGP3:
        data.y[i] = z[0] + z[1] + z[2] + (1.0 + 1.5 * z[3]) * noise.normal();
        break;
      case DgpId::DGP4:
        data.y[i] = z[0] + z[1] + z[2] + 4.0 * z[2] * z[3] + noise.student_t(2.0);
        break;
    }
  }
  return data;
}

double student_t2_quantile(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("student_t2_quantile: tau in (0,1)");
  const double a = 2.0 * tau - 1.0;
  return a * std::sqrt(2.0 / (1.0 - a * a));
}

double student_t2_pdf(double u) {
  return std::pow(1.0 + 0.5 * u * u, -1.5) / (2.0 * std::sqrt(2.0));
}

double true_cqf(DgpId id, std::span<const double> x, double tau) {
  if (x.size() < 4) throw std::invalid_argument("true_cqf: x needs at least 4 coordinates");
  switch (id) {
    case DgpId::DGP1:
      return x[0] + x[1] + x[2] + x[3] + 2.0 * normal_inv_cdf(tau);
    case DgpId::DGP2:
      return x[0] + x[1] + x[2] + x[3] + std::sqrt(kDgp2NoiseVar) * normal_inv_cdf(tau);
    case DgpId::DGP3:
      // covariates live in [0,2], so the noise scale 1 + 1.5 x4 >= 1 > 0
      return x[0] + x[1] + x[2] + (1.0 + 1.5 * x[3]) * normal_inv_cdf(tau);
    case DgpId::DGP4:
      return x[0] + x[1] + x[2] + 4.0 * x[2] * x[3] + student_t2_quantile(tau);
  }
  throw std::logic_error("true_cqf: bad id");
}

double conditional_density(DgpId id, std::span<const double> x, double t) {
  if (x.size() < 4) throw std::invalid_argument("conditional_density: x needs >= 4 coordinates");
  switch (id) {
    case DgpId::DGP1: {
      const double loc = x[0] + x[1] + x[2] + x[3];
      return normal_pdf((t - loc) / 2.0) / 2.0;
    }
    case DgpId::DGP2: {
      const double loc = x[0] + x[1] + x[2] + x[3];
      const double sd = std::sqrt(kDgp2NoiseVar);
      return normal_pdf((t - loc) / sd) / sd;
    }
    case DgpId::DGP3: {
      const double loc = x[0] + x[1] + x[2];
      const double s = 1.0 + 1.5 * x[3];
      return normal_pdf((t - loc) / s) / s;
    }
    case DgpId::DGP4: {
      const double loc = x[0] + x[1] + x[2] + 4.0 * x[2] * x[3];
      return student_t2_pdf(t - loc);
    }
  }
  throw std::logic_error("conditional_density: bad id");
}

void write_csv(const Dataset& data, std::ostream& out) {
  out << "y";
  for (std::size_t j = 1; j <= data.d(); ++j) out << ",z" << j;
  out << "\n";
  char buf[40];
  for (std::size_t i = 0; i < data.n(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", data.y[i]);
    out << buf;
    const double* z = data.Z.row(i);
    for (std::size_t j = 0; j < data.d(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", z[j]);
      out << ',' << buf;
    }
    out << "\n";
  }
}

Dataset read_csv(std::istream& in) {
  std::string line;
  do {
    if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty input");
  } while (line.empty() || line[0] == '#');
  std::size_t d = 0;
  for (char c : line)
    if (c == ',') ++d;
  {
    std::string expect = "y";
    for (std::size_t j = 1; j <= d; ++j) expect += ",z" + std::to_string(j);
    if (!line.starts_with(expect) ||
        (line.size() > expect.size() && line[expect.size()] != '\r'))
      d = 0;
  }
  if (d == 0) throw std::runtime_error("read_csv: header must be y,z1,...,zd");

  std::vector<double> ys;
  std::vector<double> zs;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string field;
    std::size_t count = 0;
    while (std::getline(row, field, ',')) {
      const double v = std::stod(field);
      if (count == 0)
        ys.push_back(v);
      else
        zs.push_back(v);
      ++count;
    }
    if (count != d + 1) throw std::runtime_error("read_csv: inconsistent field count");
  }
  Dataset data;
  data.y = std::move(ys);
  if (zs.size() != data.y.size() * d) throw std::runtime_error("read_csv: ragged rows");
  data.Z = Matrix(data.y.size(), d);
  data.Z.data() = std::move(zs);
  if (!data.Z.all_finite()) throw std::runtime_error("read_csv: non-finite entry");
  return data;
}

}  // namespace qrisk
