#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "fusioncurve/error.hpp"
#include "fusioncurve/simgen.hpp"
#include "fusioncurve/weights.hpp"

using namespace fusioncurve;

TEST_CASE("mean functions") {
  CHECK(group_mean(MeanSet::Distinct, 0, 0.125) == doctest::Approx(1.0));
  CHECK(group_mean(MeanSet::Distinct, 1, 0.25) == doctest::Approx(1.0));
  CHECK(group_mean(MeanSet::Distinct, 2, 0.0) == doctest::Approx(-1.0));
  CHECK(group_mean(MeanSet::Similar, 0, 0.125) == doctest::Approx(2.0));
  CHECK(group_mean(MeanSet::Similar, 1, 0.125) == doctest::Approx(1.3));
  CHECK(group_mean(MeanSet::Similar, 2, 0.25) == doctest::Approx(2.5 + 2.0 * std::exp(-12.5)));
  CHECK_THROWS_AS((void)group_mean(MeanSet::Distinct, 3, 0.5), ConfigError);
  CHECK(eigenfunction(0, 0.25) == doctest::Approx(std::numbers::sqrt2));
  CHECK(eigenfunction(1, 0.5) == doctest::Approx(-std::numbers::sqrt2));
}

TEST_CASE("scenario one layout") {
  ScenarioSpec spec;
  const Simulated sim = generate(spec);
  REQUIRE(sim.data.size() == 150);
  std::vector<int> counts(3, 0);
  for (int l : sim.truth.labels) ++counts[l - 1];
  CHECK(counts == std::vector<int>{50, 50, 50});
  REQUIRE(sim.truth.times.size() == 20);
  for (int h = 1; h <= 20; ++h) CHECK(sim.truth.times[h - 1] == doctest::Approx(h / 21.0));
  CHECK(sim.truth.scores.rows() == 150);
  CHECK(sim.truth.scores.cols() == 2);
  CHECK_FALSE(sim.data.sites().has_value());
  std::set<std::string> ids;
  for (const Curve& c : sim.data.curves()) ids.insert(c.id);
  CHECK(ids.size() == 150);
}

TEST_CASE("noiseless curves equal their group means") {
  ScenarioSpec spec;
  spec.sigma = 0.0;
  spec.lambda = {0.0, 0.0};
  const Simulated sim = generate(spec);
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    const auto& mean = sim.truth.curve_mean(i);
    const auto& values = sim.data.curves()[i].values;
    for (std::size_t h = 0; h < values.size(); ++h) CHECK(values[h] == mean[h]);
  }
}

TEST_CASE("curves decompose into mean, scores and noise") {
  ScenarioSpec spec;
  spec.sigma = 0.0;
  spec.seed = 3;
  const Simulated sim = generate(spec);
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    const auto& c = sim.data.curves()[i];
    for (std::size_t h = 0; h < c.values.size(); ++h) {
      const double t = sim.truth.times[h];
      const double expect = sim.truth.curve_mean(i)[h] +
                            sim.truth.scores(static_cast<Eigen::Index>(i), 0) * eigenfunction(0, t) +
                            sim.truth.scores(static_cast<Eigen::Index>(i), 1) * eigenfunction(1, t);
      CHECK(c.values[h] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("pointwise variance matches the model") {
  ScenarioSpec spec;
  spec.scenario = Scenario::Custom;
  spec.group_sizes = {4000, 3000, 3000};
  spec.seed = 11;
  const Simulated sim = generate(spec);
  const double n = static_cast<double>(sim.data.size());
  for (std::size_t h = 0; h < sim.truth.times.size(); ++h) {
    const double t = sim.truth.times[h];
    const double p0 = eigenfunction(0, t);
    const double p1 = eigenfunction(1, t);
    const double v = spec.lambda[0] * p0 * p0 + spec.lambda[1] * p1 * p1 + spec.sigma * spec.sigma;
    double mean = 0.0;
    for (std::size_t i = 0; i < sim.data.size(); ++i) mean += sim.data.curves()[i].values[h] - sim.truth.curve_mean(i)[h];
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < sim.data.size(); ++i) {
      const double e = sim.data.curves()[i].values[h] - sim.truth.curve_mean(i)[h] - mean;
      ss += e * e;
    }
    const double sample = ss / (n - 1.0);
    // Gaussian sample variance has standard error v sqrt(2 / (n - 1)).
    CHECK(std::abs(sample - v) < 3.0 * v * std::sqrt(2.0 / (n - 1.0)));
    CHECK(std::abs(mean) < 3.0 * std::sqrt(v / n));
  }
}

TEST_CASE("lattice scenarios") {
  const LatticeLayout layout = scenario2_lattice();
  REQUIRE(layout.sites.size() == 144);
  std::vector<int> counts(3, 0);
  for (int l : layout.labels) ++counts[l - 1];
  CHECK(counts == std::vector<int>{48, 48, 48});

  // Each region is connected under rook adjacency.
  const Eigen::MatrixXi order = neighbor_order(layout.sites, Adjacency::Rook);
  for (int g = 1; g <= 3; ++g) {
    std::vector<int> members;
    for (int i = 0; i < 144; ++i) {
      if (layout.labels[i] == g) members.push_back(i);
    }
    std::vector<bool> seen(144, false);
    std::vector<int> stack{members.front()};
    seen[members.front()] = true;
    int reached = 0;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      ++reached;
      for (int b : members) {
        if (!seen[b] && order(a, b) == 1) {
          seen[b] = true;
          stack.push_back(b);
        }
      }
    }
    CHECK(reached == 48);
  }

  for (Scenario s : {Scenario::Two, Scenario::Three}) {
    ScenarioSpec spec;
    spec.scenario = s;
    const Simulated sim = generate(spec);
    REQUIRE(sim.data.size() == 144);
    REQUIRE(sim.data.sites().has_value());
    CHECK(sim.truth.labels == layout.labels);
    const MeanSet set = s == Scenario::Two ? MeanSet::Distinct : MeanSet::Similar;
    CHECK(sim.truth.group_means[1][3] == group_mean(set, 1, sim.truth.times[3]));
  }
}

TEST_CASE("custom scenario carries an index") {
  ScenarioSpec spec;
  spec.scenario = Scenario::Custom;
  spec.group_sizes = {3, 4};
  spec.mean_set = MeanSet::Similar;
  const Simulated sim = generate(spec);
  REQUIRE(sim.data.index().has_value());
  CHECK(sim.data.index()->size() == 7);
  CHECK(sim.truth.labels == std::vector<int>{1, 1, 1, 2, 2, 2, 2});
}

TEST_CASE("reproducible in the seed") {
  ScenarioSpec spec;
  spec.seed = 42;
  const Simulated a = generate(spec);
  const Simulated b = generate(spec);
  CHECK(a.truth.labels == b.truth.labels);
  for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(a.data.curves()[i].values == b.data.curves()[i].values);
  spec.seed = 43;
  const Simulated c = generate(spec);
  CHECK(c.data.curves()[0].values != a.data.curves()[0].values);
}

TEST_CASE("invalid specs") {
  ScenarioSpec spec;
  spec.group_sizes = {};
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = ScenarioSpec{};
  spec.group_sizes = {1};
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = ScenarioSpec{};
  spec.sigma = -1.0;
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = ScenarioSpec{};
  spec.lambda = {0.1, 0.2, 0.3};
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = ScenarioSpec{};
  spec.m = 0;
  CHECK_THROWS_AS(validate(spec), ConfigError);
}
