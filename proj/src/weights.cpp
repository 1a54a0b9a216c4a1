#include "fusioncurve/weights.hpp"

#include <cmath>
#include <cstdlib>
#include <set>
#include <utility>

#include "fusioncurve/error.hpp"

namespace fusioncurve {

WeightScheme parse_weight_scheme(const std::string& name) {
  if (name == "equal") return WeightScheme::Equal;
  if (name == "lattice" || name == "spatial") return WeightScheme::Lattice;
  if (name == "index") return WeightScheme::Index;
  throw ConfigError("unknown weight scheme '" + name + "' (expected equal, lattice or index)");
}

std::string to_string(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::Equal:
      return "equal";
    case WeightScheme::Lattice:
      return "lattice";
    case WeightScheme::Index:
      return "index";
  }
  return "equal";
}

std::vector<double> default_alpha_grid(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::Lattice:
      return {0.1, 0.5, 1.0};
    case WeightScheme::Index:
      return {0.0, 0.25, 0.5, 0.75, 1.0};
    case WeightScheme::Equal:
      break;
  }
  return {0.0};
}

Eigen::MatrixXi neighbor_order(std::span<const LatticeSite> sites, Adjacency adjacency) {
  std::set<std::pair<int, int>> seen;
  for (const auto& s : sites) {
    if (!seen.emplace(s.row, s.col).second) {
      throw DataError("duplicate lattice site (" + std::to_string(s.row) + ", " + std::to_string(s.col) + ")");
    }
  }
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXi order = Eigen::MatrixXi::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const int dr = std::abs(sites[i].row - sites[j].row);
      const int dc = std::abs(sites[i].col - sites[j].col);
      const int a = adjacency == Adjacency::Rook ? dr + dc : std::max(dr, dc);
      order(i, j) = a;
      order(j, i) = a;
    }
  }
  return order;
}

Eigen::MatrixXd build_weights(const WeightConfig& config, const LongitudinalDataset& data) {
  if (!std::isfinite(config.alpha) || config.alpha < 0.0) throw ConfigError("alpha must be finite and >= 0");
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(n, n);
  switch (config.scheme) {
    case WeightScheme::Equal:
      break;
    case WeightScheme::Lattice: {
      if (!data.sites()) throw ConfigError("lattice weights need row/col coordinates in the dataset");
      const Eigen::MatrixXi a = neighbor_order(*data.sites(), config.adjacency);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (i != j) c(i, j) = std::exp(config.alpha * (1.0 - a(i, j)));
        }
      }
      break;
    }
    case WeightScheme::Index: {
      if (!data.index()) throw ConfigError("index weights need an index column in the dataset");
      const auto& idx = *data.index();
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (i != j) c(i, j) = std::exp(config.alpha * (1.0 - std::abs(idx[i] - idx[j])));
        }
      }
      break;
    }
  }
  return c;
}

}  // namespace fusioncurve
