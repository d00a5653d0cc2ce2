#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "qrisk/cv.hpp"
#include "qrisk/dgp.hpp"

using namespace qrisk;

TEST_CASE("fold assignment is a balanced partition") {
  for (std::size_t n : {10, 23, 100}) {
    for (std::size_t k : {2, 3, 7, 10}) {
      std::vector<std::size_t> fold = kfold_assign(n, k, 99);
      REQUIRE(fold.size() == n);
      std::vector<std::size_t> sizes(k, 0);
      for (std::size_t f : fold) {
        REQUIRE(f < k);
        ++sizes[f];
      }
      const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      CHECK(*hi - *lo <= 1);
      std::size_t total = 0;
      for (std::size_t s : sizes) total += s;
      CHECK(total == n);
    }
  }
}

TEST_CASE("fold assignment is deterministic and seed dependent") {
  CHECK(kfold_assign(50, 5, 1) == kfold_assign(50, 5, 1));
  CHECK(kfold_assign(50, 5, 1) != kfold_assign(50, 5, 2));
}

TEST_CASE("hand-computed two-fold cv") {
  // y = (0,0,10,10), folds {0,1} and {2,3}: each fold is predicted by the
  // median of the other -> per-point loss rho(±10) = 5, rho(y) terms 0 and 5
  Dataset d;
  d.y = {0.0, 0.0, 10.0, 10.0};
  d.Z = Matrix(4, 1);
  ModelSpec m;  // intercept only
  std::vector<std::size_t> fold = {0, 0, 1, 1};
  CvEstimate est = kfold_cv_with_folds(d, m, 0.5, fold, 2);
  CHECK(est.cv_risk == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(est.fold_sizes == std::vector<std::size_t>{2, 2});
  // full-sample objective is 2.5 for every theta in [0,10] and the rho(y)
  // baseline is also 2.5, so the in-sample risk is 0 and cv_optimism = cv_risk
  CHECK(est.cv_optimism == doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("cv determinism and fold-order invariance") {
  Dataset d = sample({DgpId::DGP1, 120, 5, 41});
  ModelSpec m;
  m.indices = {1, 2};
  CvEstimate a = kfold_cv(d, m, 0.5, 10, 7);
  CvEstimate b = kfold_cv(d, m, 0.5, 10, 7);
  CHECK(a.cv_risk == b.cv_risk);
  CHECK(a.cv_optimism == b.cv_optimism);

  // relabeling folds does not change the estimate
  std::vector<std::size_t> fold = kfold_assign(120, 4, 3);
  std::vector<std::size_t> relabeled(fold.size());
  for (std::size_t i = 0; i < fold.size(); ++i) relabeled[i] = 3 - fold[i];
  CvEstimate c = kfold_cv_with_folds(d, m, 0.5, fold, 4);
  CvEstimate r = kfold_cv_with_folds(d, m, 0.5, relabeled, 4);
  CHECK(c.cv_risk == doctest::Approx(r.cv_risk).epsilon(1e-12));
}

TEST_CASE("leave-one-out is finite and reproducible") {
  Dataset d = sample({DgpId::DGP1, 40, 4, 43});
  ModelSpec m;
  m.indices = {1};
  CvEstimate a = kfold_cv(d, m, 0.5, 40, 11);
  CvEstimate b = kfold_cv(d, m, 0.5, 40, 11);
  CHECK(std::isfinite(a.cv_risk));
  CHECK(a.cv_risk == b.cv_risk);
  CHECK(a.fold_sizes.size() == 40);
}

TEST_CASE("invalid fold counts are rejected") {
  Dataset d = sample({DgpId::DGP1, 30, 4, 44});
  ModelSpec m;
  CHECK_THROWS((void)kfold_cv(d, m, 0.5, 1, 5));
  CHECK_THROWS((void)kfold_cv(d, m, 0.5, 31, 5));
}
