#include "qrisk/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qrisk {

Matrix Matrix::identity(std::size_t k) {
  Matrix m(k, k);
  for (std::size_t i = 0; i < k; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      double* crow = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

namespace {

// Diagonal-pivoted Cholesky: P' A P = L L'. Returns L (in `f`) and the
// permutation `perm` (perm[j] = original index of elimination step j).
void pivoted_cholesky(const Matrix& a, Matrix& f, std::vector<std::size_t>& perm) {
  const std::size_t k = a.rows();
  if (a.cols() != k) throw std::invalid_argument("solve_spd: A must be square");
  f = a;
  perm.resize(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  double max_diag = 0.0;
  for (std::size_t i = 0; i < k; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double tol = 1e-14 * std::max(max_diag, 1.0);

  for (std::size_t j = 0; j < k; ++j) {
    std::size_t piv = j;
    for (std::size_t i = j + 1; i < k; ++i)
      if (f(i, i) > f(piv, piv)) piv = i;
    if (piv != j) {
      for (std::size_t t = 0; t < k; ++t) std::swap(f(j, t), f(piv, t));
      for (std::size_t t = 0; t < k; ++t) std::swap(f(t, j), f(t, piv));
      std::swap(perm[j], perm[piv]);
    }
    double d = f(j, j);
    for (std::size_t t = 0; t < j; ++t) d -= f(j, t) * f(j, t);
    if (!(d > tol)) throw NotPositiveDefinite(perm[j]);
    d = std::sqrt(d);
    f(j, j) = d;
    for (std::size_t i = j + 1; i < k; ++i) {
      double v = f(i, j);
      for (std::size_t t = 0; t < j; ++t) v -= f(i, t) * f(j, t);
      f(i, j) = v / d;
    }
  }
}

}  // namespace

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  const std::size_t k = a.rows();
  if (b.rows() != k) throw std::invalid_argument("solve_spd: B row count mismatch");
  Matrix l;
  std::vector<std::size_t> perm;
  pivoted_cholesky(a, l, perm);

  const std::size_t m = b.cols();
  Matrix x(k, m);
  std::vector<double> col(k);
  for (std::size_t c = 0; c < m; ++c) {
    // forward: L w = P' b
    for (std::size_t i = 0; i < k; ++i) {
      double v = b(perm[i], c);
      for (std::size_t t = 0; t < i; ++t) v -= l(i, t) * col[t];
      col[i] = v / l(i, i);
    }
    // backward: L' (P' x) = w
    for (std::size_t ii = k; ii-- > 0;) {
      double v = col[ii];
      for (std::size_t t = ii + 1; t < k; ++t) v -= l(t, ii) * col[t];
      col[ii] = v / l(ii, ii);
    }
    for (std::size_t i = 0; i < k; ++i) x(perm[i], c) = col[i];
  }
  return x;
}

double trace_solve_spd(const Matrix& a, const Matrix& b) {
  Matrix x = solve_spd(a, b);
  double tr = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) tr += x(i, i);
  return tr;
}

std::pair<double, double> eig_extremes(const Matrix& a) {
  const std::size_t k = a.rows();
  if (a.cols() != k) throw std::invalid_argument("eig_extremes: A must be square");
  if (k == 0) throw std::invalid_argument("eig_extremes: empty matrix");
  Matrix m = a;
  // symmetrize to suppress roundoff asymmetry
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = m(j, i) = v;
    }

  double norm = max_abs(m);
  if (norm == 0.0) return {0.0, 0.0};
  const double stop = 1e-15 * norm;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = p + 1; q < k; ++q) off = std::max(off, std::abs(m(p, q)));
    if (off <= stop) break;
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) <= stop * 1e-2) continue;
        const double app = m(p, p), aqq = m(q, q);
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < k; ++i) {
          const double mip = m(i, p), miq = m(i, q);
          m(i, p) = c * mip - s * miq;
          m(i, q) = s * mip + c * miq;
        }
        for (std::size_t i = 0; i < k; ++i) {
          const double mpi = m(p, i), mqi = m(q, i);
          m(p, i) = c * mpi - s * mqi;
          m(q, i) = s * mpi + c * mqi;
        }
      }
    }
  }
  double lo = m(0, 0), hi = m(0, 0);
  for (std::size_t i = 1; i < k; ++i) {
    lo = std::min(lo, m(i, i));
    hi = std::max(hi, m(i, i));
  }
  return {lo, hi};
}

double max_abs(const Matrix& a) {
  double v = 0.0;
  for (double x : a.data()) v = std::max(v, std::abs(x));
  return v;
}

}  // namespace qrisk
