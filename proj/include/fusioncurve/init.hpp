#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fusioncurve/admm.hpp"
#include "fusioncurve/em.hpp"
#include "fusioncurve/model.hpp"

namespace fusioncurve {

/// 20 log-spaced ridge parameters in [1e-6, 1e2].
std::vector<double> default_ridge_grid();

/// GCV(tau1) = sum_i n_i Y_i^T (I - H_i)^2 Y_i / tr(I - H_i)^2 with
/// H_i = B_i (B_i^T B_i + tau1 I)^{-1} B_i^T. Returns +inf when some trace vanishes.
double ridge_gcv(const Design& design, double tau1);

struct RidgeFit {
  Eigen::MatrixXd beta_star;  // n x q
  double tau1 = 0.0;
  std::vector<double> gcv;    // per grid point
};

/// Per-curve ridge coefficients (B_i^T B_i + tau1 I)^{-1} B_i^T Y_i at the
/// GCV-minimizing tau1 of the grid (first minimum on ties).
RidgeFit ridge_coefficients_gcv(const Design& design, std::span<const double> tau1_grid);

struct KMeansResult {
  std::vector<int> labels;  // 1..k, every label used
  double wcss = 0.0;
};

/// Lloyd iterations from k-means++ seeding, best of `restarts` by WCSS (ties to
/// the earlier restart). Rows of `points` are observations.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts = 10,
                    int max_iterations = 300);

std::vector<int> kmeans_init(const Eigen::MatrixXd& beta_star, int k0, std::uint64_t seed, int restarts = 10);

struct Initialization {
  ModelParams params;
  std::vector<int> kmeans_labels;
  Eigen::MatrixXd beta_star;
  double tau1 = 0.0;
  int k0 = 0;
};

/// Ridge/GCV coefficients, k-means on them, then known-group EM.
Initialization initialize(const Design& design, int P, int k0, std::uint64_t seed);
/// Same, reusing ridge coefficients computed once.
Initialization initialize(const Design& design, const RidgeFit& ridge, int P, int k0, std::uint64_t seed);

}  // namespace fusioncurve
