#include <doctest.h>

#include <cmath>
#include <random>

#include "fusioncurve/error.hpp"
#include "fusioncurve/metrics.hpp"
#include "../support/oracles.hpp"

using namespace fusioncurve;

TEST_CASE("adjusted rand index hand values") {
  const std::vector<int> a{1, 1, 2, 2};
  CHECK(adjusted_rand_index(a, a) == 1.0);
  const std::vector<int> singletons{1, 2, 3, 4}, block{1, 1, 1, 1};
  CHECK(adjusted_rand_index(singletons, block) == 0.0);
  const std::vector<int> crossed{1, 2, 1, 2};
  // three pairs never agree; pair counting gives -1/2
  CHECK(adjusted_rand_index(a, crossed) == doctest::Approx(-0.5));
  CHECK(oracle::pair_count_ari(a, crossed) == doctest::Approx(-0.5));
  CHECK(adjusted_rand_index(block, block) == 1.0);
  CHECK(adjusted_rand_index(singletons, singletons) == 1.0);
  const std::vector<int> three{1};
  CHECK_THROWS_AS(adjusted_rand_index(a, three), DataError);
}

TEST_CASE("adjusted rand index matches pair counting, symmetric and permutation invariant") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> k(1, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 30;
    std::vector<int> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = k(rng);
      b[i] = k(rng);
    }
    const double ari = adjusted_rand_index(a, b);
    CHECK(ari == doctest::Approx(oracle::pair_count_ari(a, b)).epsilon(1e-12));
    CHECK(adjusted_rand_index(b, a) == doctest::Approx(ari).epsilon(1e-14));
    std::vector<int> relabel = a;
    for (int& x : relabel) x = 10 - x;
    CHECK(adjusted_rand_index(relabel, b) == doctest::Approx(ari).epsilon(1e-14));
  }
}

TEST_CASE("adjusted rand index keyed by id") {
  const std::map<std::string, int> a{{"x", 1}, {"y", 1}, {"z", 2}};
  const std::map<std::string, int> b{{"z", 5}, {"y", 3}, {"x", 3}};
  CHECK(adjusted_rand_index(a, b) == 1.0);
  const std::map<std::string, int> c{{"x", 1}, {"y", 1}, {"w", 2}};
  CHECK_THROWS_AS(adjusted_rand_index(a, c), DataError);
}

TEST_CASE("rmse") {
  CHECK(rmse({{1.0, 2.0}}, {{1.0, 2.0}}) == 0.0);
  CHECK(rmse({{0.3}}, {{0.0}}) == doctest::Approx(0.3));
  // squared norms 1 and 3
  CHECK(rmse({{1.0}, {1.0, 1.0, 1.0}}, {{0.0}, {0.0, 0.0, 0.0}}) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(rmse({{1.0}}, {{1.0, 2.0}}), DataError);
  CHECK_THROWS_AS(rmse({{1.0}}, {{1.0}, {2.0}}), DataError);
}

TEST_CASE("replicate summaries") {
  const std::vector<ReplicateOutcome> one{{3, 0.9, 2, 0.1}};
  const auto s1 = summarize_replicates(one);
  CHECK(s1.K_hat_sd == 0.0);
  CHECK(s1.ARI_mean == doctest::Approx(0.9));
  const std::vector<ReplicateOutcome> three{{3, 1, 2, 0.1}, {3, 1, 2, 0.2}, {4, 1, 2, 0.3}};
  const auto s3 = summarize_replicates(three);
  CHECK(s3.K_hat_mean == doctest::Approx(10.0 / 3.0));
  CHECK(s3.K_hat_sd == doctest::Approx(std::sqrt(1.0 / 3.0)));
  CHECK(s3.K_hat_sd == doctest::Approx(0.577).epsilon(1e-3));
  CHECK(s3.RMSE_mean == doctest::Approx(0.2));
  CHECK(s3.P_sd == 0.0);
  CHECK(summary_columns() ==
        std::vector<std::string>{"K_hat_mean", "K_hat_sd", "ARI_mean", "ARI_sd", "P_mean", "P_sd", "RMSE_mean"});
  CHECK_THROWS_AS(summarize_replicates({}), DataError);
}
