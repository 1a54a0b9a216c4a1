#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fusioncurve/model.hpp"

namespace fusioncurve {

/// Pairs (i, j), i < j, in lexicographic order: (0,1), (0,2), ..., (n-2, n-1).
class PairIndex {
 public:
  explicit PairIndex(std::size_t n = 0) : n_(n) {}
  [[nodiscard]] std::size_t n() const noexcept { return n_; }
  [[nodiscard]] std::size_t size() const noexcept { return n_ < 2 ? 0 : n_ * (n_ - 1) / 2; }
  [[nodiscard]] std::size_t operator()(std::size_t i, std::size_t j) const noexcept {
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }

 private:
  std::size_t n_;
};

struct PenaltyConfig {
  double tau = 0.0;
  double gamma = 3.0;
  double vartheta = 1.0;
};

/// Throws ConfigError unless tau >= 0, vartheta > 0 and gamma > 1 + 1/vartheta.
void validate(const PenaltyConfig& penalty);

/// ADMM splitting variables. delta and duals are q x npairs (column p is pair p);
/// weights holds c_ij per pair.
struct FusionState {
  Eigen::MatrixXd delta;
  Eigen::MatrixXd duals;
  Eigen::VectorXd weights;
  PenaltyConfig penalty;
};

/// Pairwise weights c_ij from a symmetric n x n matrix; entries below `cutoff`
/// get zero weight (the pair is left unpenalized).
Eigen::VectorXd pair_weights(const Eigen::MatrixXd& weights, double cutoff = 0.0);

/// State with delta = A beta and zero duals.
FusionState make_fusion_state(const Eigen::MatrixXd& beta, Eigen::VectorXd weights, const PenaltyConfig& penalty);

/// A beta: column (i,j) is beta_i - beta_j.
Eigen::MatrixXd pair_differences(const Eigen::MatrixXd& beta);

/// A^T w as an n x q matrix: row i is sum_{j>i} w_ij - sum_{j<i} w_ji.
Eigen::MatrixXd pair_adjoint(const Eigen::MatrixXd& w, std::size_t n);

/// Solver for (B0^T B0 + c A^T A) beta = b with c = vartheta * nbar. Factorizes
/// blockdiag(B_i^T B_i + c n I) once and applies a rank-q Woodbury correction for
/// the -c (1 1^T) (x) I_q part; A is never formed.
class BetaSolver {
 public:
  BetaSolver(const Design& design, double vartheta);
  /// rhs is n x q (row i is the block for curve i).
  [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  [[nodiscard]] double coupling() const noexcept { return coupling_; }

 private:
  [[nodiscard]] const Eigen::LLT<Eigen::MatrixXd>& block(std::size_t i) const {
    return blocks_.size() == 1 ? blocks_.front() : blocks_[i];
  }

  std::size_t n_ = 0;
  double coupling_ = 0.0;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> blocks_;
  Eigen::LDLT<Eigen::MatrixXd> capacitance_;
};

/// Right-hand side B0^T (Y - B~ m) + c vec((Delta - Upsilon / vartheta) D).
/// `scores` is n x P (P may be 0, then theta is ignored).
Eigen::MatrixXd beta_rhs(const Design& design, const Eigen::MatrixXd& theta, const Eigen::MatrixXd& scores,
                         const FusionState& state);

/// Beta update of the ADMM sweep. Builds a BetaSolver; loops should keep one instead.
Eigen::MatrixXd update_beta(const Design& design, const Eigen::MatrixXd& theta, const Eigen::MatrixXd& scores,
                            const FusionState& state);

/// SCAD penalty p_gamma(t, lambda) for t >= 0.
double scad_penalty(double t, double lambda, double gamma);

/// Scalar f with prox(sigma) = f * sigma, given ||sigma||; branch boundaries use <=.
double scad_prox_factor(double norm, double tau_c, double gamma, double vartheta);

/// Group SCAD proximal map: argmin_d vartheta/2 ||sigma - d||^2 + p_gamma(||d||, tau_c).
Eigen::VectorXd scad_prox(const Eigen::VectorXd& sigma, double tau_c, double gamma, double vartheta);

/// delta_ij = prox(beta_i - beta_j + v_ij / vartheta) for every pair.
Eigen::MatrixXd update_delta(const FusionState& state, const Eigen::MatrixXd& beta);

/// v_ij + vartheta (beta_i - beta_j - delta_ij).
Eigen::MatrixXd update_duals(const FusionState& state, const Eigen::MatrixXd& beta, const Eigen::MatrixXd& delta_new);

struct ConvergenceState {
  double r_norm = 0.0;
  double s_norm = 0.0;
  double eps_pri = 0.0;
  double eps_dual = 0.0;
};

struct Tolerances {
  double eps_abs = 1e-4;
  double eps_rel = 1e-2;
};

/// Primal/dual residual test; reads the (already updated) duals from `state`.
std::pair<ConvergenceState, bool> check_convergence(const FusionState& state, const Eigen::MatrixXd& beta,
                                                    const Eigen::MatrixXd& delta_prev,
                                                    const Eigen::MatrixXd& delta_new, const Tolerances& tol = {});

/// Fused delta, dual and residual pass over all pairs, equivalent to
/// update_delta, update_duals and check_convergence in sequence. Updates
/// state.delta and state.duals in place.
ConvergenceState pair_sweep(FusionState& state, const Eigen::MatrixXd& beta, const Tolerances& tol, bool& converged);

}  // namespace fusioncurve
