#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fusioncurve/admm.hpp"
#include "fusioncurve/basis.hpp"
#include "fusioncurve/init.hpp"
#include "fusioncurve/model.hpp"
#include "fusioncurve/weights.hpp"

namespace fusioncurve {

/// 30 log-spaced values in [1e-3, 2].
std::vector<double> default_tau_grid();

struct SolverConfig {
  int max_outer_iterations = 500;
  std::vector<double> tau_grid = default_tau_grid();
  std::vector<int> P_grid = {1, 2, 3};
  std::vector<double> alpha_grid = {0.0};
  double gamma = 3.0;
  double vartheta = 1.0;
  double eps_abs = 1e-4;
  double eps_rel = 1e-2;
  double group_tolerance = 1e-6;
  double pair_cutoff = 0.0;  // pairs with c_ij below this are left unpenalized
  int k0 = 0;       // k-means groups for the start; 0 picks k0 in [2, k0_max] by modified BIC
  int k0_max = 10;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool record_steps = false;
  /// Called after every outer iteration with the current parameters.
  std::function<void(int, const ModelParams&)> iteration_hook;
};

void validate(const SolverConfig& config);

struct Partition {
  std::vector<int> labels;      // contiguous from 1, ordered by first member
  Eigen::MatrixXd group_beta;   // K x q, average of member rows
  [[nodiscard]] int k() const noexcept { return static_cast<int>(group_beta.rows()); }
};

/// Connected components of the graph with an edge (i, j) when ||delta_ij|| <= tolerance.
Partition extract_groups(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& delta, double tolerance);

/// sigma_p^2 = (1/N) sum_i ||Y_i - B_i beta_i - B_i Theta m_i||^2 with moments
/// refreshed at `params` (plain RSS / N when P = 0).
double conditional_sigma2(const ModelParams& params, const Design& design);

/// N log(sigma_p^2) + log(log(n q)) log(N) K q + 2 n (P q - P (P + 1) / 2),
/// the last term dropped for P = 0. N = total observations.
double modified_bic(double sigma2_p, std::size_t n, std::size_t total_obs, int q, int k_hat, int P);
double modified_bic(const FitResult& fit, const Design& design);

struct StartEntry {
  int P = 0;
  int k0 = 0;
  double bic = 0.0;
};

/// Starting values for one P. With config.k0 = 0, every k0 in [2, min(k0_max, n)]
/// is tried and the known-group start with the smallest modified BIC (K = k0) is
/// kept; ties go to the smaller k0. `table`, when given, receives one entry per k0 tried.
Initialization choose_initialization(const Design& design, int P, const SolverConfig& config,
                                     std::vector<StartEntry>* table = nullptr);

/// EM-ADMM from a given starting point (normally initialize()'s params).
FitResult fit(const Design& design, const Eigen::MatrixXd& weights, int P, double tau, const SolverConfig& config,
              const ModelParams& start);

/// Convenience overload that initializes via choose_initialization.
FitResult fit(const LongitudinalDataset& data, const OrthoSplineBasis& basis, const Eigen::MatrixXd& weights, int P,
              double tau, const SolverConfig& config);

struct BicEntry {
  double alpha = 0.0;
  int P = 0;
  double tau = 0.0;
  double bic = 0.0;
  int k_hat = 0;
  int iterations = 0;
  bool converged = false;
  double sigma2_conditional = 0.0;
};

struct Selection {
  FitResult best;
  std::vector<BicEntry> table;  // ordered alpha-major, then P, then tau
  std::vector<StartEntry> starts;
};

/// Grid search over (alpha, P, tau) by modified BIC. Ties go to smaller P, then
/// smaller tau, then smaller alpha. Jobs run on config.jobs threads; the result
/// does not depend on the thread count.
Selection select(const LongitudinalDataset& data, const OrthoSplineBasis& basis, const WeightConfig& weights,
                 const SolverConfig& config);

}  // namespace fusioncurve
