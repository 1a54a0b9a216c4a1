#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fusioncurve/basis.hpp"

namespace fusioncurve {

inline constexpr double kLambdaFloor = 1e-10;
inline constexpr double kSigma2Floor = 1e-12;

struct Curve {
  std::string id;
  std::vector<double> times;
  std::vector<double> values;
};

struct LatticeSite {
  int row = 0;
  int col = 0;
  friend bool operator==(const LatticeSite&, const LatticeSite&) = default;
};

/// n curves observed at per-curve time points, with optional side information
/// used by the lattice and index weight schemes.
class LongitudinalDataset {
 public:
  LongitudinalDataset() = default;
  /// Validates: n >= 2, per-curve len(times) == len(values) >= 1, times strictly
  /// increasing, ids unique, side information sized n when present.
  explicit LongitudinalDataset(std::vector<Curve> curves,
                               std::optional<std::vector<LatticeSite>> sites = std::nullopt,
                               std::optional<std::vector<double>> index = std::nullopt);

  [[nodiscard]] std::size_t size() const noexcept { return curves_.size(); }
  [[nodiscard]] const Curve& curve(std::size_t i) const { return curves_.at(i); }
  [[nodiscard]] const std::vector<Curve>& curves() const noexcept { return curves_; }
  [[nodiscard]] const std::optional<std::vector<LatticeSite>>& sites() const noexcept { return sites_; }
  [[nodiscard]] const std::optional<std::vector<double>>& index() const noexcept { return index_; }
  [[nodiscard]] std::size_t total_observations() const noexcept;
  /// Position of `id`, or nullopt.
  [[nodiscard]] std::optional<std::size_t> find(const std::string& id) const;

 private:
  std::vector<Curve> curves_;
  std::optional<std::vector<LatticeSite>> sites_;
  std::optional<std::vector<double>> index_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

/// Per-curve design matrices B_i and their cross products, evaluated once per
/// (dataset, basis). `shared` is set when all curves have identical time grids.
struct Design {
  std::vector<Eigen::MatrixXd> B;    // n_i x q
  std::vector<Eigen::MatrixXd> BtB;  // q x q
  std::vector<Eigen::VectorXd> Y;
  std::vector<Eigen::VectorXd> BtY;
  bool shared = false;
  std::size_t total_obs = 0;

  [[nodiscard]] std::size_t n() const noexcept { return B.size(); }
  [[nodiscard]] int q() const noexcept { return B.empty() ? 0 : static_cast<int>(B.front().cols()); }
  [[nodiscard]] double mean_obs() const noexcept {
    return static_cast<double>(total_obs) / static_cast<double>(n());
  }
};

Design make_design(const LongitudinalDataset& data, const OrthoSplineBasis& basis);

/// beta: n x q (row i is beta_i); theta: q x P; lambda: length P.
/// P = 0 is the covariance-free mode (theta has zero columns).
struct ModelParams {
  Eigen::MatrixXd beta;
  Eigen::MatrixXd theta;
  Eigen::VectorXd lambda;
  double sigma2 = 1.0;

  [[nodiscard]] int num_components() const noexcept { return static_cast<int>(theta.cols()); }
};

/// Throws NumericError describing the first violated invariant (orthonormal
/// theta, sign rule, sorted positive lambda, positive sigma2).
void check_params(const ModelParams& params, double tol = 1e-8);

/// Posterior moments of the scores: m is n x P, V holds one P x P matrix per
/// curve, or a single matrix when the design is shared.
struct ConditionalMoments {
  Eigen::MatrixXd m;
  std::vector<Eigen::MatrixXd> V;

  [[nodiscard]] const Eigen::MatrixXd& cov(std::size_t i) const { return V.size() == 1 ? V.front() : V[i]; }
};

struct Tuning {
  double tau = 0.0;
  int P = 0;
  double alpha = 0.0;
};

struct IterationRecord {
  double r_norm = 0.0;
  double s_norm = 0.0;
  double eps_pri = 0.0;
  double eps_dual = 0.0;
  double sigma2 = 0.0;
};

enum class Step { Moments, Sigma2, Theta, Orthonormalize, Beta, Delta, Duals, Check };

struct FitResult {
  ModelParams params;            // beta rows replaced by their group average
  Eigen::MatrixXd raw_beta;      // beta at termination, before group averaging
  std::vector<int> labels;       // per curve, contiguous from 1, ordered by first member
  int k_hat = 0;
  std::vector<double> objective_trace;  // marginal negative log-likelihood per iteration
  std::vector<IterationRecord> iterations_log;
  std::vector<Step> step_log;    // filled only when requested
  double bic = 0.0;
  double sigma2_conditional = 0.0;
  Tuning tuning;
  int k0 = 0;                    // k-means groups of the starting point
  int iterations = 0;
  bool converged = false;
};

/// Fitted mean of curve `id` at `times`.
std::vector<double> mean_curve(const ModelParams& params, const OrthoSplineBasis& basis,
                               const LongitudinalDataset& data, const std::string& id,
                               std::span<const double> times);

/// B(s)^T Theta Lambda Theta^T B(t) over the grid outer product.
Eigen::MatrixXd covariance_surface(const ModelParams& params, const OrthoSplineBasis& basis,
                                   std::span<const double> s_grid, std::span<const double> t_grid);

/// Conditional negative log-likelihood with the scores fixed at `scores` (n x P).
double negative_loglikelihood_conditional(const ModelParams& params, const Design& design,
                                          const Eigen::MatrixXd& scores);

/// Marginal negative log-likelihood with Y_i ~ N(B_i beta_i, B_i Theta Lambda Theta^T B_i^T + sigma2 I),
/// without the (N/2) log(2 pi) constant.
double negative_loglikelihood_marginal(const ModelParams& params, const Design& design);

}  // namespace fusioncurve
