#include "qrisk/qr_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qrisk {

double check_loss(double u, double tau) { return u * (u < 0.0 ? tau - 1.0 : tau); }

double score(double u, double tau) { return u < 0.0 ? tau - 1.0 : tau; }

namespace {

double mean_check_loss(std::span<const double> r, double tau) {
  double s = 0.0;
  for (double v : r) s += check_loss(v, tau);
  return s / static_cast<double>(r.size());
}

// X' diag(d) v for n-vector v
void xt_scaled_vec(const Matrix& x, const std::vector<double>& d,
                   const std::vector<double>& v, std::vector<double>& out) {
  const std::size_t n = x.rows(), k = x.cols();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = d[i] * v[i];
    if (w == 0.0) continue;
    const double* row = x.row(i);
    for (std::size_t j = 0; j < k; ++j) out[j] += row[j] * w;
  }
}

// X' diag(d) X (symmetric k x k)
void xt_scaled_x(const Matrix& x, const std::vector<double>& d, Matrix& out) {
  const std::size_t n = x.rows(), k = x.cols();
  std::fill(out.data().begin(), out.data().end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.row(i);
    const double di = d[i];
    for (std::size_t a = 0; a < k; ++a) {
      const double v = di * row[a];
      double* orow = out.row(a);
      for (std::size_t b = a; b < k; ++b) orow[b] += v * row[b];
    }
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < a; ++b) out(a, b) = out(b, a);
}

void mat_vec(const Matrix& x, const std::vector<double>& v, std::vector<double>& out) {
  const std::size_t n = x.rows(), k = x.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += row[j] * v[j];
    out[i] = s;
  }
}

std::vector<double> solve_spd_vec(const Matrix& a, const std::vector<double>& rhs) {
  Matrix b(rhs.size(), 1);
  for (std::size_t i = 0; i < rhs.size(); ++i) b(i, 0) = rhs[i];
  Matrix x = solve_spd(a, b);
  std::vector<double> out(rhs.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) out[i] = x(i, 0);
  return out;
}

// Crossover: interpolate the k smallest-|residual| rows. Keeps the interior
// solution when the candidate basis is singular or does not improve.
void polish_to_vertex(const Matrix& x, std::span<const double> y, double tau,
                      QuantileFit& fit) {
  const std::size_t n = x.rows(), k = x.cols();
  if (n < k) return;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return std::abs(fit.residuals[a]) < std::abs(fit.residuals[b]);
                    });
  Matrix xb(k, k);
  std::vector<double> yb(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double* row = x.row(order[i]);
    std::copy(row, row + k, xb.row(i));
    yb[i] = y[order[i]];
  }
  Matrix gram = multiply(transpose(xb), xb);
  std::vector<double> rhs(k, 0.0);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t i = 0; i < k; ++i) rhs[a] += xb(i, a) * yb[i];
  std::vector<double> theta;
  try {
    theta = solve_spd_vec(gram, rhs);
  } catch (const NotPositiveDefinite&) {
    return;
  }
  std::vector<double> resid(n);
  std::vector<double> fitted(n);
  mat_vec(x, theta, fitted);
  for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - fitted[i];
  const double obj = mean_check_loss(resid, tau);
  if (obj <= fit.objective + 1e-12 * (1.0 + std::abs(fit.objective))) {
    fit.theta = std::move(theta);
    fit.residuals = std::move(resid);
    fit.objective = obj;
  }
}

}  // namespace

QuantileFit fit_design(const Matrix& x, std::span<const double> y, double tau,
                       const SolverOptions& opts) {
  const std::size_t n = x.rows(), k = x.cols();
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("fit: tau must lie in (0,1)");
  if (y.size() != n) throw std::invalid_argument("fit: y length mismatch");
  if (k == 0) throw std::invalid_argument("fit: empty design");
  if (n < k + 1) throw std::invalid_argument("fit: need n > dim");

  // Rank check doubles as the least-squares start.
  Matrix gram(k, k);
  {
    std::vector<double> ones(n, 1.0);
    xt_scaled_x(x, ones, gram);
  }
  std::vector<double> xty(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.row(i);
    for (std::size_t j = 0; j < k; ++j) xty[j] += row[j] * y[i];
  }
  std::vector<double> theta;
  try {
    theta = solve_spd_vec(gram, xty);
  } catch (const NotPositiveDefinite& e) {
    throw std::runtime_error("fit: design is rank deficient, column " +
                             std::to_string(e.pivot) + " is linearly dependent");
  }

  const double ysum = std::accumulate(y.begin(), y.end(), 0.0);
  std::vector<double> b(k, 0.0);  // (1-tau) X'e
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.row(i);
    for (std::size_t j = 0; j < k; ++j) b[j] += row[j];
  }
  for (double& v : b) v *= (1.0 - tau);
  double bmax = 0.0;
  for (double v : b) bmax = std::max(bmax, std::abs(v));

  std::vector<double> r(n), fitted(n);
  mat_vec(x, theta, fitted);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - fitted[i];

  double rbar = 0.0;
  for (double v : r) rbar += std::abs(v);
  rbar /= static_cast<double>(n);
  const double delta = std::max(0.1 * rbar, 1e-4);

  std::vector<double> xd(n), s(n), z(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    xd[i] = 1.0 - tau;
    s[i] = tau;
    z[i] = std::max(-r[i], 0.0) + delta;
    w[i] = std::max(r[i], 0.0) + delta;
  }

  std::vector<double> rho1(n), invq(n), g(n), dx(n), dz(n), dw(n), tmp(n);
  std::vector<double> r2(k), rhs(k), dtheta(k), xdth(n);
  std::vector<double> dxa(n), dza(n), dwa(n);
  Matrix m(k, k);

  QuantileFit out;
  out.tau = tau;
  double relgap = 0.0;
  bool converged = false;
  int iter = 0;

  for (; iter < opts.max_iter; ++iter) {
    mat_vec(x, theta, fitted);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = y[i] - fitted[i];
      rho1[i] = r[i] + z[i] - w[i];
    }
    for (std::size_t j = 0; j < k; ++j) r2[j] = b[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = x.row(i);
      for (std::size_t j = 0; j < k; ++j) r2[j] -= row[j] * xd[i];
    }

    const double pobj = mean_check_loss(r, tau) * static_cast<double>(n);
    double dobj = -(1.0 - tau) * ysum;
    for (std::size_t i = 0; i < n; ++i) dobj += y[i] * xd[i];
    double infeas = 0.0;
    for (double v : r2) infeas = std::max(infeas, std::abs(v));
    infeas /= 1.0 + bmax;
    relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    if (relgap <= opts.tol && infeas <= opts.tol) {
      converged = true;
      break;
    }

    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += xd[i] * z[i] + s[i] * w[i];
    mu /= 2.0 * static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) invq[i] = 1.0 / (z[i] / xd[i] + w[i] / s[i]);

    auto solve_direction = [&](const std::vector<double>& gvec) {
      // dx = invq .* (g + rho1 - X dtheta); X' dx = r2
      for (std::size_t i = 0; i < n; ++i) tmp[i] = gvec[i] + rho1[i];
      xt_scaled_vec(x, invq, tmp, rhs);
      for (std::size_t j = 0; j < k; ++j) rhs[j] -= r2[j];
      dtheta = solve_spd_vec(m, rhs);
      mat_vec(x, dtheta, xdth);
      for (std::size_t i = 0; i < n; ++i) dx[i] = invq[i] * (gvec[i] + rho1[i] - xdth[i]);
    };

    xt_scaled_x(x, invq, m);

    // affine (predictor) direction
    for (std::size_t i = 0; i < n; ++i) g[i] = w[i] - z[i];
    solve_direction(g);
    for (std::size_t i = 0; i < n; ++i) {
      dz[i] = -z[i] - (z[i] / xd[i]) * dx[i];
      dw[i] = -w[i] + (w[i] / s[i]) * dx[i];
    }

    auto primal_step = [&]() {
      double a = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (dx[i] < 0.0) a = std::min(a, -xd[i] / dx[i]);
        if (dx[i] > 0.0) a = std::min(a, s[i] / dx[i]);
      }
      return a;
    };
    auto dual_step = [&]() {
      double a = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (dz[i] < 0.0) a = std::min(a, -z[i] / dz[i]);
        if (dw[i] < 0.0) a = std::min(a, -w[i] / dw[i]);
      }
      return a;
    };

    const double apa = primal_step();
    const double ada = dual_step();
    double mu_aff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double xn = xd[i] + apa * dx[i];
      const double sn = s[i] - apa * dx[i];
      mu_aff += xn * (z[i] + ada * dz[i]) + sn * (w[i] + ada * dw[i]);
    }
    mu_aff /= 2.0 * static_cast<double>(n);
    const double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3.0) : 0.0;

    dxa = dx;
    dza = dz;
    dwa = dw;

    // corrector
    const double target = sigma * mu;
    for (std::size_t i = 0; i < n; ++i) {
      const double t1 = target - dxa[i] * dza[i];
      const double t2 = target + dxa[i] * dwa[i];
      g[i] = w[i] - z[i] + t1 / xd[i] - t2 / s[i];
    }
    solve_direction(g);
    for (std::size_t i = 0; i < n; ++i) {
      const double t1 = target - dxa[i] * dza[i];
      const double t2 = target + dxa[i] * dwa[i];
      dz[i] = (t1 - xd[i] * z[i]) / xd[i] - (z[i] / xd[i]) * dx[i];
      dw[i] = (t2 - s[i] * w[i]) / s[i] + (w[i] / s[i]) * dx[i];
    }

    const double ap = std::min(1.0, 0.9995 * primal_step());
    const double ad = std::min(1.0, 0.9995 * dual_step());
    for (std::size_t i = 0; i < n; ++i) {
      xd[i] += ap * dx[i];
      s[i] = 1.0 - xd[i];
      z[i] += ad * dz[i];
      w[i] += ad * dw[i];
    }
    for (std::size_t j = 0; j < k; ++j) theta[j] += ad * dtheta[j];
  }

  if (!converged)
    throw std::runtime_error("fit: no convergence in " + std::to_string(opts.max_iter) +
                             " iterations, relative gap " + std::to_string(relgap));

  mat_vec(x, theta, fitted);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - fitted[i];
  out.theta = std::move(theta);
  out.residuals = std::move(r);
  out.objective = mean_check_loss(out.residuals, tau);
  out.duality_gap = relgap;
  out.iterations = iter;
  if (opts.polish_vertex) polish_to_vertex(x, y, tau, out);
  return out;
}

QuantileFit fit(const Dataset& data, const ModelSpec& model, double tau,
                const SolverOptions& opts) {
  if (data.n() < model.size() + 2)
    throw std::invalid_argument("fit: need n >= |S| + 2");
  return fit_design(design_matrix(data, model), data.y, tau, opts);
}

double predict(const QuantileFit& fit, const ModelSpec& model, std::span<const double> z) {
  const std::vector<double> row = design_row(model, z);
  if (row.size() != fit.theta.size())
    throw std::invalid_argument("predict: fit and model dimensions disagree");
  double v = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) v += row[i] * fit.theta[i];
  return v;
}

}  // namespace qrisk
