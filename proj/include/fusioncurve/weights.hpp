#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fusioncurve/model.hpp"

namespace fusioncurve {

enum class WeightScheme { Equal, Lattice, Index };
enum class Adjacency { Rook, Queen };

struct WeightConfig {
  WeightScheme scheme = WeightScheme::Equal;
  double alpha = 0.0;
  Adjacency adjacency = Adjacency::Rook;
};

WeightScheme parse_weight_scheme(const std::string& name);
std::string to_string(WeightScheme scheme);

/// Default alpha grids: lattice {0.1, 0.5, 1}, index {0, 0.25, 0.5, 0.75, 1}, equal {0}.
std::vector<double> default_alpha_grid(WeightScheme scheme);

/// Neighbor order between lattice sites: the graph distance in the infinite
/// lattice graph (Manhattan distance for rook adjacency, Chebyshev for queen).
/// Throws DataError on duplicate sites.
Eigen::MatrixXi neighbor_order(std::span<const LatticeSite> sites, Adjacency adjacency = Adjacency::Rook);

/// Symmetric n x n weights c_ij (diagonal set to 1):
/// equal -> 1; lattice -> exp(alpha (1 - a_ij)); index -> exp(alpha (1 - |idx_i - idx_j|)).
Eigen::MatrixXd build_weights(const WeightConfig& config, const LongitudinalDataset& data);

}  // namespace fusioncurve
