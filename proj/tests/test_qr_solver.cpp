#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qrisk/dgp.hpp"
#include "qrisk/model.hpp"
#include "qrisk/qr_solver.hpp"
#include "qrisk/rng.hpp"

#include "vertex_oracle.hpp"

using namespace qrisk;

namespace {

Dataset make_dataset(std::vector<double> y, std::size_t d,
                     const std::vector<double>& z = {}) {
  Dataset data;
  data.y = std::move(y);
  data.Z = Matrix(data.y.size(), d);
  if (!z.empty()) data.Z.data() = z;
  return data;
}

}  // namespace

TEST_CASE("check_loss examples") {
  CHECK(check_loss(0.0, 0.3) == 0.0);
  CHECK(check_loss(3.0, 0.5) == doctest::Approx(1.5));
  CHECK(check_loss(-3.0, 0.5) == doctest::Approx(1.5));
  CHECK(check_loss(-1.0, 0.8) == doctest::Approx(0.2));
  CHECK(check_loss(2.0, 0.8) == doctest::Approx(1.6));
}

TEST_CASE("score uses the strict u<0 convention") {
  CHECK(score(1.0, 0.5) == doctest::Approx(0.5));
  CHECK(score(-1.0, 0.5) == doctest::Approx(-0.5));
  CHECK(score(0.0, 0.8) == doctest::Approx(0.8));
  CHECK(score(-1e-300, 0.8) == doctest::Approx(-0.2));
}

TEST_CASE("intercept-only fit is the sample median") {
  Dataset d = make_dataset({1.0, 2.0, 4.0}, 1);
  ModelSpec m;  // intercept only
  QuantileFit f = fit(d, m, 0.5);
  CHECK(f.theta.size() == 1);
  CHECK(f.theta[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(f.objective == doctest::Approx(1.5 / 3.0).epsilon(1e-8));
  CHECK(f.duality_gap <= 1e-8);
}

TEST_CASE("flat minimizer interval at tau=0.25") {
  Dataset d = make_dataset({1.0, 2.0, 3.0, 4.0}, 1);
  ModelSpec m;
  QuantileFit f = fit(d, m, 0.25);
  // objective is flat on [1,2]; interior point lands inside the face
  CHECK(f.theta[0] >= 1.0 - 1e-6);
  CHECK(f.theta[0] <= 2.0 + 1e-6);
  auto obj_at = [&](double t) {
    double s = 0;
    for (double y : d.y) s += check_loss(y - t, 0.25);
    return s / 4.0;
  };
  CHECK(obj_at(1.0) == doctest::Approx(obj_at(2.0)));
  CHECK(f.objective == doctest::Approx(obj_at(1.0)).epsilon(1e-8));
}

TEST_CASE("residuals, objective and predict are consistent") {
  Dataset d = sample({DgpId::DGP1, 80, 6, 5});
  ModelSpec m;
  m.indices = {2, 5};
  QuantileFit f = fit(d, m, 0.7);
  double s = 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    std::vector<double> z(d.Z.row(i), d.Z.row(i) + d.d());
    const double pred = predict(f, m, z);
    CHECK(d.y[i] - pred == doctest::Approx(f.residuals[i]).epsilon(1e-10));
    s += check_loss(f.residuals[i], 0.7);
  }
  CHECK(f.objective == doctest::Approx(s / d.n()).epsilon(1e-10));
}

TEST_CASE("predict hand example") {
  QuantileFit f;
  f.theta = {1.0, 2.0};
  ModelSpec m;
  m.indices = {3};
  std::vector<double> z = {9.0, 9.0, 5.0};
  CHECK(predict(f, m, z) == doctest::Approx(11.0));
}

TEST_CASE("solver matches the vertex-enumeration oracle on random instances") {
  RngStream rng(314, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 6 + rng.next_u64() % 5;     // 6..10
    const std::size_t ncov = 1 + rng.next_u64() % 2;  // 1..2 predictors
    Dataset d;
    d.y.resize(n);
    d.Z = Matrix(n, ncov);
    for (auto& v : d.Z.data()) v = 2.0 * rng.uniform() - 1.0;
    for (auto& v : d.y) v = 3.0 * rng.normal();
    ModelSpec m;
    for (std::size_t j = 1; j <= ncov; ++j) m.indices.push_back(int(j));
    const double tau = std::vector<double>{0.25, 0.5, 0.8}[trial % 3];
    QuantileFit f = fit(d, m, tau);
    const double oracle = qrisk_test::vertex_oracle(design_matrix(d, m), d.y, tau);
    CHECK(f.objective == doctest::Approx(oracle).epsilon(1e-7));
    CHECK(f.objective >= oracle - 1e-9);
  }
}

TEST_CASE("scale equivariance in y") {
  Dataset d = sample({DgpId::DGP1, 100, 4, 9});
  ModelSpec m;
  m.indices = {1, 2};
  QuantileFit base = fit(d, m, 0.6);
  Dataset scaled = d;
  for (auto& v : scaled.y) v *= 7.5;
  QuantileFit big = fit(scaled, m, 0.6);
  CHECK(big.objective == doctest::Approx(7.5 * base.objective).epsilon(1e-6));
  for (std::size_t j = 0; j < base.theta.size(); ++j)
    CHECK(big.theta[j] == doctest::Approx(7.5 * base.theta[j]).epsilon(1e-4));
}

TEST_CASE("negative residual fraction brackets tau") {
  Dataset d = sample({DgpId::DGP1, 400, 6, 12});
  ModelSpec m;
  m.indices = {1, 2, 3, 4};
  for (double tau : {0.25, 0.5, 0.8}) {
    QuantileFit f = fit(d, m, tau);
    std::size_t neg = 0;
    for (double r : f.residuals)
      if (r < 0) ++neg;
    const double slack = (m.size() + 1.0) / d.n();
    CHECK(neg / double(d.n()) >= tau - slack - 1e-12);
    CHECK(neg / double(d.n()) <= tau + slack + 1e-12);
  }
}

TEST_CASE("subgradient optimality bound with bounded covariates") {
  // |Z| entries <= 1 here, so the LP bound ||X' score||_inf <= (|S|+1) holds
  RngStream rng(218, 1);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 30 + rng.next_u64() % 30;
    Dataset d;
    d.y.resize(n);
    d.Z = Matrix(n, 3);
    for (auto& v : d.Z.data()) v = 2.0 * rng.uniform() - 1.0;
    for (std::size_t i = 0; i < n; ++i)
      d.y[i] = d.Z(i, 0) - d.Z(i, 1) + rng.normal();
    ModelSpec m;
    m.indices = {1, 2, 3};
    const double tau = std::vector<double>{0.25, 0.5, 0.8}[trial % 3];
    SolverOptions opts;
    opts.polish_vertex = true;
    QuantileFit f = fit(d, m, tau, opts);
    Matrix x = design_matrix(d, m);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) g += x(i, j) * score(f.residuals[i], tau);
      CHECK(std::abs(g) / n <= (m.size() + 1.0) / n + 1e-8);
    }
  }
}

TEST_CASE("vertex polish interpolates dim observations") {
  Dataset d = sample({DgpId::DGP1, 150, 5, 77});
  ModelSpec m;
  m.indices = {1, 3, 5};
  SolverOptions opts;
  opts.polish_vertex = true;
  QuantileFit f = fit(d, m, 0.5, opts);
  double scale = 0.0;
  for (double y : d.y) scale = std::max(scale, std::abs(y));
  std::size_t zeros = 0;
  for (double r : f.residuals)
    if (std::abs(r) <= 1e-6 * scale) ++zeros;
  CHECK(zeros >= m.dim());
  // polish never worsens the objective
  QuantileFit plain = fit(d, m, 0.5);
  CHECK(f.objective <= plain.objective + 1e-10);
}

TEST_CASE("intercept-only quantile is monotone in tau") {
  Dataset d = sample({DgpId::DGP2, 200, 5, 21});
  ModelSpec m;
  double prev = -1e300;
  for (double tau : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    QuantileFit f = fit(d, m, tau);
    CHECK(f.theta[0] >= prev - 1e-7);
    prev = f.theta[0];
  }
}

TEST_CASE("error contracts") {
  Dataset d = sample({DgpId::DGP1, 50, 4, 3});
  ModelSpec m;
  m.indices = {1, 2};
  CHECK_THROWS((void)fit(d, m, 0.0));
  CHECK_THROWS((void)fit(d, m, 1.0));
  // duplicate a column to force rank deficiency
  Dataset dup = d;
  dup.Z = Matrix(d.n(), 5);
  for (std::size_t i = 0; i < d.n(); ++i) {
    for (std::size_t j = 0; j < 4; ++j) dup.Z(i, j) = d.Z(i, j);
    dup.Z(i, 4) = d.Z(i, 0);
  }
  ModelSpec bad;
  bad.indices = {1, 2, 5};
  CHECK_THROWS_WITH_AS((void)fit(dup, bad, 0.5),
                       doctest::Contains("rank deficient"), std::runtime_error);
  // n too small: |S| = 1 needs n >= 3
  Dataset tiny = make_dataset({1.0, 2.0}, 1, {0.5, -0.5});
  ModelSpec one;
  one.indices = {1};
  CHECK_THROWS((void)fit(tiny, one, 0.5));
}
