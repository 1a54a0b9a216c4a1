#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fusioncurve/model.hpp"

namespace fusioncurve {

enum class Scenario { One = 1, Two = 2, Three = 3, Custom = 4 };

/// Which trio of group mean functions a custom scenario uses.
enum class MeanSet { Distinct, Similar };

struct ScenarioSpec {
  Scenario scenario = Scenario::One;
  /// Group sizes for scenarios 1 and custom; scenarios 2 and 3 use the fixed lattice.
  std::vector<int> group_sizes = {50, 50, 50};
  MeanSet mean_set = MeanSet::Distinct;  // custom only
  int m = 20;
  double sigma = 0.2;
  std::vector<double> lambda = {0.1, 0.2};
  std::uint64_t seed = 1;
};

void validate(const ScenarioSpec& spec);

/// Group mean function k (0-based) of a mean set; t in [0, 1].
double group_mean(MeanSet set, int k, double t);

/// psi_1 = sqrt(2) sin(2 pi t), psi_2 = sqrt(2) cos(2 pi t).
double eigenfunction(int l, double t);

struct Truth {
  std::vector<int> labels;                       // per curve, 1..K
  std::vector<double> times;                     // common grid t_h = h / (m + 1)
  std::vector<std::vector<double>> group_means;  // K x m on the grid
  Eigen::MatrixXd scores;                        // n x L
  ScenarioSpec spec;

  /// True mean of curve i on the grid.
  [[nodiscard]] const std::vector<double>& curve_mean(std::size_t i) const { return group_means.at(labels.at(i) - 1); }
};

struct Simulated {
  LongitudinalDataset data;
  Truth truth;
};

struct LatticeLayout {
  std::vector<LatticeSite> sites;  // row-major over the 12 x 12 grid
  std::vector<int> labels;         // 1..3, 48 sites each
};

/// Fixed 12 x 12 map with three contiguous regions of 48 sites: columns 0-3;
/// columns 4-11 in rows 0-5; columns 4-11 in rows 6-11.
LatticeLayout scenario2_lattice();

/// Deterministic given spec.seed.
Simulated generate(const ScenarioSpec& spec);

}  // namespace fusioncurve
