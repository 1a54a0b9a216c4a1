#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>

#include "fusioncurve/error.hpp"
#include "fusioncurve/init.hpp"
#include "fusioncurve/metrics.hpp"
#include "../support/oracles.hpp"

using namespace fusioncurve;

namespace {

const OrthoSplineBasis& cubic_basis() {
  static const OrthoSplineBasis b = build_basis({4, 3, {0.0, 1.0}});
  return b;
}

LongitudinalDataset wiggly_curves(int n, int obs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  std::vector<Curve> curves;
  for (int i = 0; i < n; ++i) {
    Curve c{"c" + std::to_string(i), {}, {}};
    const double a = z(rng);
    for (int h = 0; h < obs; ++h) c.times.push_back(u(rng));
    std::sort(c.times.begin(), c.times.end());
    for (double t : c.times) c.values.push_back(a * std::sin(6 * t) + 0.3 * z(rng));
    curves.push_back(std::move(c));
  }
  return LongitudinalDataset(std::move(curves));
}

double literal_gcv(const Design& d, double tau1) {
  double total = 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    const Eigen::MatrixXd& B = d.B[i];
    const auto ni = B.rows();
    Eigen::MatrixXd a = B.transpose() * B;
    a.diagonal().array() += tau1;
    const Eigen::MatrixXd H = B * a.inverse() * B.transpose();
    const Eigen::MatrixXd IH = Eigen::MatrixXd::Identity(ni, ni) - H;
    const double tr = IH.trace();
    total += static_cast<double>(ni) * d.Y[i].dot(IH * IH * d.Y[i]) / (tr * tr);
  }
  return total;
}

}  // namespace

TEST_CASE("ridge grid") {
  const auto g = default_ridge_grid();
  REQUIRE(g.size() == 20);
  CHECK(g.front() == doctest::Approx(1e-6));
  CHECK(g.back() == doctest::Approx(1e2));
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(std::log10(g[k]) - std::log10(g[k - 1]) == doctest::Approx(8.0 / 19));
}

TEST_CASE("GCV matches the hat-matrix formula") {
  std::mt19937_64 rng(3);
  const Design d = make_design(wiggly_curves(6, 14, rng), cubic_basis());
  for (double tau1 : {0.0, 1e-6, 1e-3, 0.1, 1.0, 50.0}) {
    const double ref = literal_gcv(d, tau1);
    CHECK(std::abs(ridge_gcv(d, tau1) - ref) < 1e-10 * std::max(1.0, ref));
  }
}

TEST_CASE("GCV is infinite when a curve has no residual degrees of freedom") {
  std::mt19937_64 rng(4);
  const int q = cubic_basis().dimension();
  const Design d = make_design(wiggly_curves(3, q, rng), cubic_basis());
  CHECK(std::isinf(ridge_gcv(d, 0.0)));
  CHECK(std::isfinite(ridge_gcv(d, 1.0)));
}

TEST_CASE("ridge coefficients") {
  std::mt19937_64 rng(5);
  const Design d = make_design(wiggly_curves(5, 12, rng), cubic_basis());

  SUBCASE("no penalty gives least squares") {
    const std::vector<double> grid{0.0};
    const RidgeFit r = ridge_coefficients_gcv(d, grid);
    for (std::size_t i = 0; i < d.n(); ++i) {
      const Eigen::VectorXd ols = d.B[i].colPivHouseholderQr().solve(d.Y[i]);
      CHECK((r.beta_star.row(static_cast<Eigen::Index>(i)).transpose() - ols).norm() < 1e-9);
    }
  }
  SUBCASE("huge penalty shrinks to zero") {
    const std::vector<double> grid{1e12};
    const RidgeFit r = ridge_coefficients_gcv(d, grid);
    CHECK(r.beta_star.cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("the chosen value attains the grid minimum") {
    const auto grid = default_ridge_grid();
    const RidgeFit r = ridge_coefficients_gcv(d, grid);
    REQUIRE(r.gcv.size() == grid.size());
    const auto it = std::min_element(r.gcv.begin(), r.gcv.end());
    CHECK(r.tau1 == grid[static_cast<std::size_t>(it - r.gcv.begin())]);
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(r.gcv[k] == doctest::Approx(literal_gcv(d, grid[k])).epsilon(1e-9));
  }
  SUBCASE("bad grids") {
    CHECK_THROWS_AS((void)ridge_coefficients_gcv(d, std::vector<double>{}), ConfigError);
    CHECK_THROWS_AS((void)ridge_coefficients_gcv(d, std::vector<double>{-1.0}), ConfigError);
  }
}

TEST_CASE("ridge fails cleanly when every grid point is undefined") {
  std::mt19937_64 rng(6);
  const int q = cubic_basis().dimension();
  const Design d = make_design(wiggly_curves(2, q, rng), cubic_basis());
  CHECK_THROWS_AS((void)ridge_coefficients_gcv(d, std::vector<double>{0.0}), DataError);
}

TEST_CASE("k-means") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z;

  SUBCASE("one cluster") {
    const Eigen::MatrixXd x = oracle::random_matrix(9, 3, rng);
    const KMeansResult r = kmeans(x, 1, 1);
    CHECK(std::all_of(r.labels.begin(), r.labels.end(), [](int l) { return l == 1; }));
    const Eigen::RowVectorXd c = x.colwise().mean();
    CHECK(r.wcss == doctest::Approx((x.rowwise() - c).squaredNorm()));
  }
  SUBCASE("one point per cluster") {
    const Eigen::MatrixXd x = oracle::random_matrix(7, 2, rng);
    const KMeansResult r = kmeans(x, 7, 2);
    CHECK(r.wcss == 0.0);
    CHECK(std::set<int>(r.labels.begin(), r.labels.end()).size() == 7);
  }
  SUBCASE("separated blobs") {
    Eigen::MatrixXd x(60, 2);
    std::vector<int> truth;
    for (int i = 0; i < 60; ++i) {
      const int g = i % 3;
      x(i, 0) = 10.0 * g + 0.1 * z(rng);
      x(i, 1) = -5.0 * g + 0.1 * z(rng);
      truth.push_back(g + 1);
    }
    const KMeansResult r = kmeans(x, 3, 11);
    CHECK(adjusted_rand_index(r.labels, truth) == doctest::Approx(1.0));
    CHECK(r.labels.front() == 1);
  }
  SUBCASE("deterministic in the seed") {
    const Eigen::MatrixXd x = oracle::random_matrix(40, 3, rng);
    CHECK(kmeans(x, 4, 5).labels == kmeans(x, 4, 5).labels);
    CHECK(kmeans_init(x, 4, 5) == kmeans(x, 4, 5).labels);
  }
  SUBCASE("every label is used") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(10, 2);
    x(9, 0) = 1.0;
    const KMeansResult r = kmeans(x, 3, 1);
    CHECK(std::set<int>(r.labels.begin(), r.labels.end()) == std::set<int>{1, 2, 3});
  }
  SUBCASE("bad k") {
    const Eigen::MatrixXd x = oracle::random_matrix(4, 2, rng);
    CHECK_THROWS_AS((void)kmeans(x, 5, 1), ConfigError);
    CHECK_THROWS_AS((void)kmeans(x, 0, 1), ConfigError);
  }
}

TEST_CASE("initialize") {
  std::mt19937_64 rng(8);
  const Design d = make_design(wiggly_curves(12, 15, rng), cubic_basis());

  SUBCASE("a single group without covariance is pooled least squares") {
    const Initialization init = initialize(d, 0, 1, 1);
    CHECK(init.k0 == 1);
    CHECK(init.params.theta.cols() == 0);
    Eigen::MatrixXd btb = Eigen::MatrixXd::Zero(d.q(), d.q());
    Eigen::VectorXd bty = Eigen::VectorXd::Zero(d.q());
    for (std::size_t i = 0; i < d.n(); ++i) {
      btb += d.BtB[i];
      bty += d.BtY[i];
    }
    const Eigen::VectorXd pooled = btb.ldlt().solve(bty);
    double rss = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i) {
      CHECK((init.params.beta.row(static_cast<Eigen::Index>(i)).transpose() - pooled).norm() < 1e-10);
      rss += (d.Y[i] - d.B[i] * pooled).squaredNorm();
    }
    CHECK(init.params.sigma2 == doctest::Approx(rss / static_cast<double>(d.total_obs)));
  }
  SUBCASE("start parameters are valid and follow the k-means partition") {
    const Initialization init = initialize(d, 2, 3, 4);
    CHECK_NOTHROW(check_params(init.params));
    CHECK(init.kmeans_labels.size() == d.n());
    for (std::size_t i = 0; i < d.n(); ++i) {
      for (std::size_t j = 0; j < d.n(); ++j) {
        if (init.kmeans_labels[i] != init.kmeans_labels[j]) continue;
        CHECK((init.params.beta.row(static_cast<Eigen::Index>(i)) - init.params.beta.row(static_cast<Eigen::Index>(j)))
                  .norm() == 0.0);
      }
    }
  }
  SUBCASE("reusing the ridge fit gives the same start") {
    const RidgeFit ridge = ridge_coefficients_gcv(d, default_ridge_grid());
    const Initialization a = initialize(d, 1, 2, 9);
    const Initialization b = initialize(d, ridge, 1, 2, 9);
    CHECK(a.params.beta == b.params.beta);
    CHECK(a.params.sigma2 == b.params.sigma2);
    CHECK(a.tau1 == ridge.tau1);
  }
}
