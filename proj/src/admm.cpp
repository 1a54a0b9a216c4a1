#include "fusioncurve/admm.hpp"

#include <algorithm>
#include <cmath>

#include "fusioncurve/error.hpp"

namespace fusioncurve {

void validate(const PenaltyConfig& penalty) {
  if (!(penalty.tau >= 0.0) || !std::isfinite(penalty.tau)) throw ConfigError("tau must be finite and >= 0");
  if (!(penalty.vartheta > 0.0) || !std::isfinite(penalty.vartheta)) throw ConfigError("vartheta must be > 0");
  if (!(penalty.gamma > 1.0 + 1.0 / penalty.vartheta)) throw ConfigError("gamma must exceed 1 + 1/vartheta");
}

Eigen::VectorXd pair_weights(const Eigen::MatrixXd& weights, double cutoff) {
  const auto n = static_cast<std::size_t>(weights.rows());
  if (weights.cols() != weights.rows()) throw ConfigError("weight matrix must be square");
  const PairIndex index(n);
  Eigen::VectorXd out(static_cast<Eigen::Index>(index.size()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (!std::isfinite(c) || c < 0.0) throw ConfigError("pair weights must be finite and nonnegative");
      out(static_cast<Eigen::Index>(index(i, j))) = c < cutoff ? 0.0 : c;
    }
  }
  return out;
}

FusionState make_fusion_state(const Eigen::MatrixXd& beta, Eigen::VectorXd weights, const PenaltyConfig& penalty) {
  validate(penalty);
  FusionState state;
  state.delta = pair_differences(beta);
  if (weights.size() != state.delta.cols()) throw ConfigError("weight count differs from the number of pairs");
  state.duals = Eigen::MatrixXd::Zero(state.delta.rows(), state.delta.cols());
  state.weights = std::move(weights);
  state.penalty = penalty;
  return state;
}

Eigen::MatrixXd pair_differences(const Eigen::MatrixXd& beta) {
  const auto n = static_cast<std::size_t>(beta.rows());
  const PairIndex index(n);
  Eigen::MatrixXd out(beta.cols(), static_cast<Eigen::Index>(index.size()));
  Eigen::Index p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      out.col(p) = (beta.row(static_cast<Eigen::Index>(i)) - beta.row(static_cast<Eigen::Index>(j))).transpose();
    }
  }
  return out;
}

Eigen::MatrixXd pair_adjoint(const Eigen::MatrixXd& w, std::size_t n) {
  // Accumulate in q x n layout so each update is a contiguous column.
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(w.rows(), static_cast<Eigen::Index>(n));
  Eigen::Index p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      acc.col(ii) += w.col(p);
      acc.col(static_cast<Eigen::Index>(j)) -= w.col(p);
    }
  }
  return acc.transpose();
}

BetaSolver::BetaSolver(const Design& design, double vartheta) : n_(design.n()) {
  if (!(vartheta > 0.0)) throw ConfigError("vartheta must be > 0");
  const int q = design.q();
  coupling_ = vartheta * design.mean_obs();
  const double diag = coupling_ * static_cast<double>(n_);

  const auto make_block = [&](const Eigen::MatrixXd& btb) {
    Eigen::MatrixXd k = btb;
    k.diagonal().array() += diag;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) throw NumericError("beta system block is not positive definite");
    return llt;
  };

  // Capacitance (1/(c n)) sum_i K_i^{-1} B_i^T B_i, written without the
  // cancellation-prone form I/c - sum_i K_i^{-1}.
  Eigen::MatrixXd cap = Eigen::MatrixXd::Zero(q, q);
  if (design.shared) {
    blocks_.push_back(make_block(design.BtB.front()));
    cap = static_cast<double>(n_) * blocks_.front().solve(design.BtB.front());
  } else {
    blocks_.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      blocks_.push_back(make_block(design.BtB[i]));
      cap += blocks_.back().solve(design.BtB[i]);
    }
  }
  cap /= diag;
  cap = 0.5 * (cap + cap.transpose());
  capacitance_.compute(cap);
  if (capacitance_.info() != Eigen::Success || !(capacitance_.vectorD().minCoeff() > 0.0)) {
    throw NumericError("beta system is singular: pooled design B_0^T B_0 is not positive definite");
  }
}

Eigen::MatrixXd BetaSolver::solve(const Eigen::MatrixXd& rhs) const {
  const auto q = rhs.cols();
  Eigen::MatrixXd kinv(q, static_cast<Eigen::Index>(n_));
  Eigen::VectorXd y = Eigen::VectorXd::Zero(q);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    kinv.col(ii) = block(i).solve(rhs.row(ii).transpose());
    y += kinv.col(ii);
  }
  const Eigen::VectorXd z = capacitance_.solve(y);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_), q);
  if (blocks_.size() == 1) {
    const Eigen::VectorXd kz = blocks_.front().solve(z);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      out.row(ii) = (kinv.col(ii) + kz).transpose();
    }
  } else {
    for (std::size_t i = 0; i < n_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      out.row(ii) = (kinv.col(ii) + block(i).solve(z)).transpose();
    }
  }
  return out;
}

Eigen::MatrixXd beta_rhs(const Design& design, const Eigen::MatrixXd& theta, const Eigen::MatrixXd& scores,
                         const FusionState& state) {
  const std::size_t n = design.n();
  const double c = state.penalty.vartheta * design.mean_obs();
  const Eigen::MatrixXd shifted = state.delta - state.duals / state.penalty.vartheta;
  Eigen::MatrixXd rhs = c * pair_adjoint(shifted, n);
  const bool with_scores = theta.cols() > 0 && scores.cols() > 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    Eigen::VectorXd b = design.BtY[i];
    if (with_scores) b -= design.BtB[i] * (theta * scores.row(ii).transpose());
    rhs.row(ii) += b.transpose();
  }
  return rhs;
}

Eigen::MatrixXd update_beta(const Design& design, const Eigen::MatrixXd& theta, const Eigen::MatrixXd& scores,
                            const FusionState& state) {
  const BetaSolver solver(design, state.penalty.vartheta);
  return solver.solve(beta_rhs(design, theta, scores, state));
}

double scad_penalty(double t, double lambda, double gamma) {
  if (t <= lambda) return lambda * t;
  if (t <= gamma * lambda) return (2.0 * gamma * lambda * t - t * t - lambda * lambda) / (2.0 * (gamma - 1.0));
  return 0.5 * (gamma + 1.0) * lambda * lambda;
}

double scad_prox_factor(double norm, double tau_c, double gamma, double vartheta) {
  if (norm == 0.0) return 0.0;
  if (norm <= tau_c + tau_c / vartheta) return std::max(0.0, 1.0 - (tau_c / vartheta) / norm);
  if (norm <= gamma * tau_c) {
    const double threshold = gamma * tau_c / ((gamma - 1.0) * vartheta);
    return std::max(0.0, 1.0 - threshold / norm) / (1.0 - 1.0 / ((gamma - 1.0) * vartheta));
  }
  return 1.0;
}

Eigen::VectorXd scad_prox(const Eigen::VectorXd& sigma, double tau_c, double gamma, double vartheta) {
  return scad_prox_factor(sigma.norm(), tau_c, gamma, vartheta) * sigma;
}

Eigen::MatrixXd update_delta(const FusionState& state, const Eigen::MatrixXd& beta) {
  const auto n = static_cast<std::size_t>(beta.rows());
  const auto& pen = state.penalty;
  Eigen::MatrixXd out(beta.cols(), state.delta.cols());
  Eigen::Index p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      const Eigen::VectorXd sigma = (beta.row(static_cast<Eigen::Index>(i)) - beta.row(static_cast<Eigen::Index>(j))).transpose() +
                                    state.duals.col(p) / pen.vartheta;
      out.col(p) = scad_prox(sigma, pen.tau * state.weights(p), pen.gamma, pen.vartheta);
    }
  }
  return out;
}

Eigen::MatrixXd update_duals(const FusionState& state, const Eigen::MatrixXd& beta, const Eigen::MatrixXd& delta_new) {
  return state.duals + state.penalty.vartheta * (pair_differences(beta) - delta_new);
}

ConvergenceState pair_sweep(FusionState& state, const Eigen::MatrixXd& beta, const Tolerances& tol, bool& converged) {
  const auto n = static_cast<std::size_t>(beta.rows());
  const auto q = static_cast<std::size_t>(beta.cols());
  const auto& pen = state.penalty;
  const double inv_vt = 1.0 / pen.vartheta;
  const Eigen::MatrixXd bt = beta.transpose();
  Eigen::MatrixXd adj_change = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd adj_duals = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(n));
  std::vector<double> diff(q);
  std::vector<double> sigma(q);
  double r2 = 0.0;
  double abeta2 = 0.0;
  double delta2 = 0.0;

  Eigen::Index p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* bi = bt.col(static_cast<Eigen::Index>(i)).data();
    double* ci = adj_change.col(static_cast<Eigen::Index>(i)).data();
    double* ai = adj_duals.col(static_cast<Eigen::Index>(i)).data();
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      const double* bj = bt.col(static_cast<Eigen::Index>(j)).data();
      double* cj = adj_change.col(static_cast<Eigen::Index>(j)).data();
      double* aj = adj_duals.col(static_cast<Eigen::Index>(j)).data();
      double* d = state.delta.col(p).data();
      double* v = state.duals.col(p).data();
      double norm2 = 0.0;
      for (std::size_t k = 0; k < q; ++k) {
        diff[k] = bi[k] - bj[k];
        sigma[k] = diff[k] + v[k] * inv_vt;
        norm2 += sigma[k] * sigma[k];
      }
      const double f = scad_prox_factor(std::sqrt(norm2), pen.tau * state.weights(p), pen.gamma, pen.vartheta);
      for (std::size_t k = 0; k < q; ++k) {
        const double dn = f * sigma[k];
        const double r = diff[k] - dn;
        const double change = dn - d[k];
        const double vn = v[k] + pen.vartheta * r;
        r2 += r * r;
        abeta2 += diff[k] * diff[k];
        delta2 += dn * dn;
        ci[k] += change;
        cj[k] -= change;
        ai[k] += vn;
        aj[k] -= vn;
        d[k] = dn;
        v[k] = vn;
      }
    }
  }

  ConvergenceState cs;
  const double pairs = static_cast<double>(PairIndex(n).size());
  const double qd = static_cast<double>(q);
  cs.r_norm = std::sqrt(r2);
  cs.s_norm = pen.vartheta * adj_change.norm();
  cs.eps_pri = std::sqrt(pairs * qd) * tol.eps_abs + tol.eps_rel * std::sqrt(std::max(abeta2, delta2));
  cs.eps_dual = std::sqrt(static_cast<double>(n) * qd) * tol.eps_abs + tol.eps_rel * adj_duals.norm();
  converged = cs.r_norm <= cs.eps_pri && cs.s_norm <= cs.eps_dual;
  return cs;
}

std::pair<ConvergenceState, bool> check_convergence(const FusionState& state, const Eigen::MatrixXd& beta,
                                                    const Eigen::MatrixXd& delta_prev,
                                                    const Eigen::MatrixXd& delta_new, const Tolerances& tol) {
  const auto n = static_cast<std::size_t>(beta.rows());
  const auto q = static_cast<double>(beta.cols());
  const Eigen::MatrixXd a_beta = pair_differences(beta);
  ConvergenceState cs;
  cs.r_norm = (a_beta - delta_new).norm();
  cs.s_norm = state.penalty.vartheta * pair_adjoint(delta_new - delta_prev, n).norm();
  const double pairs = static_cast<double>(PairIndex(n).size());
  cs.eps_pri = std::sqrt(pairs * q) * tol.eps_abs + tol.eps_rel * std::max(a_beta.norm(), delta_new.norm());
  cs.eps_dual = std::sqrt(static_cast<double>(n) * q) * tol.eps_abs + tol.eps_rel * pair_adjoint(state.duals, n).norm();
  return {cs, cs.r_norm <= cs.eps_pri && cs.s_norm <= cs.eps_dual};
}

}  // namespace fusioncurve
