#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fusioncurve/model.hpp"

namespace fusioncurve {

/// E-step: posterior mean m_i and covariance V_i of the scores given the
/// current parameters. Requires P >= 1. V is computed once for a shared design.
ConditionalMoments conditional_moments(const ModelParams& params, const Design& design);

/// sigma2 maximizing the expected complete-data likelihood at fixed moments:
/// (1/N) sum_i [ ||Y_i - B_i beta_i - B_i Theta m_i||^2 + tr(B_i Theta V_i Theta^T B_i^T) ].
/// With P = 0 this is RSS / N. Floored at kSigma2Floor.
double update_sigma2(const ModelParams& params, const ConditionalMoments& moments, const Design& design);

/// Column j (0-based) of the unnormalized Theta update, reading the other
/// columns from `theta` as given.
Eigen::VectorXd update_theta_column(int j, const Eigen::MatrixXd& theta, const ModelParams& params,
                                    const ConditionalMoments& moments, const Design& design);

/// One sequential sweep j = 0..P-1 starting from params.theta; each updated
/// column is visible to the later ones.
Eigen::MatrixXd update_theta(const ModelParams& params, const ConditionalMoments& moments, const Design& design);

/// Second moment of the scores: (1/n) sum_i (m_i m_i^T + V_i).
Eigen::MatrixXd score_second_moment(const ConditionalMoments& moments);

/// Flip each column so that its first entry of largest magnitude is positive.
void apply_sign_rule(Eigen::MatrixXd& theta);

struct Orthonormalized {
  Eigen::MatrixXd theta;
  Eigen::VectorXd lambda;
};

/// Eigendecomposition of theta_tilde * Sigma * theta_tilde^T, keeping the top P
/// eigenpairs in decreasing order with the sign rule applied and lambda floored.
/// Throws NumericError when theta_tilde is column-rank deficient.
Orthonormalized orthonormalize_theta(const Eigen::MatrixXd& theta_tilde, const ConditionalMoments& moments);

/// Loop-safe variant: columns of theta_tilde that carry no information (zero or
/// non-finite) are replaced by the matching column of `fallback` first.
Orthonormalized orthonormalize_theta_guarded(Eigen::MatrixXd theta_tilde, const Eigen::MatrixXd& fallback,
                                             const ConditionalMoments& moments);

/// (1/n) sum_i (beta_star_i - beta_tilde_i)(beta_star_i - beta_tilde_i)^T.
Eigen::MatrixXd coefficient_scatter(const Eigen::MatrixXd& beta_star, const Eigen::MatrixXd& beta_tilde);

struct KnownGroupOptions {
  int max_iterations = 200;
  double tolerance = 1e-6;
};

struct KnownGroupResult {
  ModelParams params;     // beta rows equal their group's alpha
  Eigen::MatrixXd alpha;  // K x q
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
};

/// EM with a fixed partition. `labels` must use every value in 1..K.
/// beta_star provides the per-curve coefficients used to seed Theta and Lambda.
KnownGroupResult known_group_em(const Design& design, std::span<const int> labels, int P,
                                const Eigen::MatrixXd& beta_star, const KnownGroupOptions& options = {});

}  // namespace fusioncurve
