#include "fusioncurve/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>

#include "fusioncurve/error.hpp"

namespace fusioncurve {

void validate(const ScenarioSpec& spec) {
  if (spec.m < 1) throw ConfigError("m must be >= 1");
  if (!(spec.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
  if (spec.lambda.size() > 2) throw ConfigError("at most two score variances are supported");
  for (double l : spec.lambda) {
    if (!(l >= 0.0)) throw ConfigError("score variances must be >= 0");
  }
  if (spec.scenario == Scenario::One || spec.scenario == Scenario::Custom) {
    if (spec.group_sizes.empty() || spec.group_sizes.size() > 3) throw ConfigError("between 1 and 3 groups are supported");
    int total = 0;
    for (int g : spec.group_sizes) {
      if (g < 1) throw ConfigError("group sizes must be >= 1");
      total += g;
    }
    if (total < 2) throw ConfigError("at least 2 curves are required");
  }
}

double group_mean(MeanSet set, int k, double t) {
  const double pi = std::numbers::pi;
  if (set == MeanSet::Distinct) {
    switch (k) {
      case 0:
        return std::sin(4.0 * pi * t);
      case 1:
        return std::exp(-10.0 * (t - 0.25) * (t - 0.25));
      case 2:
        return 1.5 * t - 1.0;
      default:
        break;
    }
  } else {
    switch (k) {
      case 0:
        return std::sin(4.0 * pi * t) + 1.0;
      case 1:
        return std::sin(4.0 * pi * t) + 0.3;
      case 2:
        return 2.5 * std::exp(-25.0 * (t - 0.25) * (t - 0.25)) + 2.0 * std::exp(-50.0 * (t - 0.75) * (t - 0.75));
      default:
        break;
    }
  }
  throw ConfigError("group mean index out of range");
}

double eigenfunction(int l, double t) {
  const double arg = 2.0 * std::numbers::pi * t;
  return std::numbers::sqrt2 * (l == 0 ? std::sin(arg) : std::cos(arg));
}

LatticeLayout scenario2_lattice() {
  LatticeLayout layout;
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 12; ++c) {
      layout.sites.push_back({r, c});
      layout.labels.push_back(c < 4 ? 1 : (r < 6 ? 2 : 3));
    }
  }
  return layout;
}

Simulated generate(const ScenarioSpec& spec) {
  validate(spec);
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(spec.scenario)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  const MeanSet set = spec.scenario == Scenario::Three ? MeanSet::Similar
                      : spec.scenario == Scenario::Custom ? spec.mean_set
                                                          : MeanSet::Distinct;

  Truth truth;
  truth.spec = spec;
  std::optional<std::vector<LatticeSite>> sites;
  std::optional<std::vector<double>> index;

  if (spec.scenario == Scenario::Two || spec.scenario == Scenario::Three) {
    LatticeLayout layout = scenario2_lattice();
    truth.labels = std::move(layout.labels);
    sites = std::move(layout.sites);
  } else {
    for (std::size_t k = 0; k < spec.group_sizes.size(); ++k) {
      truth.labels.insert(truth.labels.end(), static_cast<std::size_t>(spec.group_sizes[k]), static_cast<int>(k) + 1);
    }
    if (spec.scenario == Scenario::One) {
      std::shuffle(truth.labels.begin(), truth.labels.end(), rng);
    } else {
      index.emplace(truth.labels.size());
      std::iota(index->begin(), index->end(), 1.0);
    }
  }

  const int K = *std::max_element(truth.labels.begin(), truth.labels.end());
  truth.times.resize(static_cast<std::size_t>(spec.m));
  for (int h = 1; h <= spec.m; ++h) truth.times[h - 1] = static_cast<double>(h) / (spec.m + 1.0);
  truth.group_means.assign(static_cast<std::size_t>(K), std::vector<double>(truth.times.size()));
  for (int k = 0; k < K; ++k) {
    for (std::size_t h = 0; h < truth.times.size(); ++h) truth.group_means[k][h] = group_mean(set, k, truth.times[h]);
  }

  const std::size_t n = truth.labels.size();
  const auto L = static_cast<Eigen::Index>(spec.lambda.size());
  truth.scores.resize(static_cast<Eigen::Index>(n), L);
  const int width = n >= 1000 ? 5 : 3;
  std::vector<Curve> curves;
  curves.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Curve c;
    char id[32];
    std::snprintf(id, sizeof id, "c%0*zu", width, i + 1);
    c.id = id;
    c.times = truth.times;
    for (Eigen::Index l = 0; l < L; ++l) {
      truth.scores(static_cast<Eigen::Index>(i), l) = std::sqrt(spec.lambda[l]) * normal(rng);
    }
    c.values.resize(truth.times.size());
    for (std::size_t h = 0; h < truth.times.size(); ++h) {
      double x = truth.group_means[truth.labels[i] - 1][h];
      for (Eigen::Index l = 0; l < L; ++l) {
        x += truth.scores(static_cast<Eigen::Index>(i), l) * eigenfunction(static_cast<int>(l), truth.times[h]);
      }
      c.values[h] = x + spec.sigma * normal(rng);
    }
    curves.push_back(std::move(c));
  }

  return {LongitudinalDataset(std::move(curves), std::move(sites), std::move(index)), std::move(truth)};
}

}  // namespace fusioncurve
