#include "fusioncurve/em.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fusioncurve/error.hpp"

namespace fusioncurve {

namespace {

// Columns B_i^T (Y_i - B_i beta_i), q x n.
Eigen::MatrixXd projected_residuals(const ModelParams& params, const Design& design) {
  const auto n = static_cast<Eigen::Index>(design.n());
  Eigen::MatrixXd out(design.q(), n);
  for (Eigen::Index i = 0; i < n; ++i) out.col(i) = design.BtY[i];
  if (design.shared) {
    out.noalias() -= design.BtB.front() * params.beta.transpose();
  } else {
    for (Eigen::Index i = 0; i < n; ++i) out.col(i).noalias() -= design.BtB[i] * params.beta.row(i).transpose();
  }
  return out;
}

double sup_change(const Eigen::MatrixXd& next, const Eigen::MatrixXd& prev) {
  if (next.size() == 0) return 0.0;
  const double scale = std::max(prev.cwiseAbs().maxCoeff(), 1e-10);
  return (next - prev).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

ConditionalMoments conditional_moments(const ModelParams& params, const Design& design) {
  const int P = params.num_components();
  if (P < 1) throw ConfigError("conditional moments need at least one component");
  const std::size_t n = design.n();
  const Eigen::VectorXd lambda = params.lambda.cwiseMax(kLambdaFloor);
  const double s2 = params.sigma2;

  ConditionalMoments out;
  out.m.resize(static_cast<Eigen::Index>(n), P);

  const auto factor = [&](const Eigen::MatrixXd& btb) {
    Eigen::MatrixXd core = params.theta.transpose() * btb * params.theta;
    core.diagonal() += s2 * lambda.cwiseInverse();
    Eigen::LLT<Eigen::MatrixXd> llt(core);
    if (llt.info() != Eigen::Success) throw NumericError("conditional moment system is not positive definite");
    return llt;
  };

  const Eigen::MatrixXd rhs = params.theta.transpose() * projected_residuals(params, design);
  if (design.shared) {
    const auto llt = factor(design.BtB.front());
    out.V.push_back(s2 * llt.solve(Eigen::MatrixXd::Identity(P, P)));
    out.m = llt.solve(rhs).transpose();
  } else {
    out.V.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto llt = factor(design.BtB[i]);
      out.V.push_back(s2 * llt.solve(Eigen::MatrixXd::Identity(P, P)));
      out.m.row(static_cast<Eigen::Index>(i)) = llt.solve(rhs.col(static_cast<Eigen::Index>(i))).transpose();
    }
  }
  for (auto& v : out.V) v = 0.5 * (v + v.transpose());
  return out;
}

double update_sigma2(const ModelParams& params, const ConditionalMoments& moments, const Design& design) {
  const int P = params.num_components();
  const auto n = static_cast<Eigen::Index>(design.n());
  // Fitted coefficients beta_i + Theta m_i, q x n.
  Eigen::MatrixXd coef = params.beta.transpose();
  if (P > 0) coef.noalias() += params.theta * moments.m.transpose();
  double total = 0.0;
  if (design.shared) {
    const Eigen::MatrixXd& B = design.B.front();
    Eigen::MatrixXd resid(B.rows(), n);
    for (Eigen::Index i = 0; i < n; ++i) resid.col(i) = design.Y[i];
    resid.noalias() -= B * coef;
    total = resid.squaredNorm();
    if (P > 0) {
      // tr(B Theta V Theta^T B^T) = tr(V Theta^T B^T B Theta)
      total += static_cast<double>(n) *
               (moments.V.front() * (params.theta.transpose() * design.BtB.front() * params.theta)).trace();
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      total += (design.Y[i] - design.B[i] * coef.col(i)).squaredNorm();
      if (P > 0) total += (moments.cov(i) * (params.theta.transpose() * design.BtB[i] * params.theta)).trace();
    }
  }
  return std::max(total / static_cast<double>(design.total_obs), kSigma2Floor);
}

namespace {

Eigen::VectorXd theta_column(int j, const Eigen::MatrixXd& theta, const Eigen::MatrixXd& proj,
                             const ConditionalMoments& moments, const Design& design) {
  const int P = static_cast<int>(theta.cols());
  const int q = static_cast<int>(theta.rows());
  const auto n = static_cast<Eigen::Index>(design.n());
  const Eigen::VectorXd mj = moments.m.col(j);
  Eigen::MatrixXd lhs;
  Eigen::VectorXd rhs = proj * mj;
  if (design.shared) {
    const Eigen::MatrixXd& V = moments.V.front();
    lhs = design.BtB.front() * (mj.squaredNorm() + static_cast<double>(n) * V(j, j));
    Eigen::VectorXd others = Eigen::VectorXd::Zero(q);
    for (int l = 0; l < P; ++l) {
      if (l != j) others += theta.col(l) * (moments.m.col(l).dot(mj) + static_cast<double>(n) * V(l, j));
    }
    rhs.noalias() -= design.BtB.front() * others;
  } else {
    lhs = Eigen::MatrixXd::Zero(q, q);
    Eigen::VectorXd others(q);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::MatrixXd& V = moments.cov(static_cast<std::size_t>(i));
      lhs += design.BtB[i] * (mj(i) * mj(i) + V(j, j));
      others.setZero();
      for (int l = 0; l < P; ++l) {
        if (l != j) others += theta.col(l) * (moments.m(i, l) * mj(i) + V(l, j));
      }
      rhs.noalias() -= design.BtB[i] * others;
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
  if (ldlt.info() != Eigen::Success) throw NumericError("theta column normal matrix is singular");
  Eigen::VectorXd out = ldlt.solve(rhs);
  if (!out.allFinite()) throw NumericError("theta column update is not finite");
  return out;
}

}  // namespace

Eigen::VectorXd update_theta_column(int j, const Eigen::MatrixXd& theta, const ModelParams& params,
                                    const ConditionalMoments& moments, const Design& design) {
  if (j < 0 || j >= theta.cols()) throw ConfigError("theta column index out of range");
  return theta_column(j, theta, projected_residuals(params, design), moments, design);
}

Eigen::MatrixXd update_theta(const ModelParams& params, const ConditionalMoments& moments, const Design& design) {
  Eigen::MatrixXd theta = params.theta;
  const Eigen::MatrixXd proj = projected_residuals(params, design);
  for (int j = 0; j < theta.cols(); ++j) theta.col(j) = theta_column(j, theta, proj, moments, design);
  return theta;
}
Eigen::MatrixXd score_second_moment(const ConditionalMoments& moments) {
  const auto n = moments.m.rows();
  Eigen::MatrixXd sigma = moments.m.transpose() * moments.m;
  if (moments.V.size() == 1) {
    sigma += static_cast<double>(n) * moments.V.front();
  } else {
    for (const auto& v : moments.V) sigma += v;
  }
  sigma /= static_cast<double>(n);
  return 0.5 * (sigma + sigma.transpose());
}

void apply_sign_rule(Eigen::MatrixXd& theta) {
  for (int j = 0; j < theta.cols(); ++j) {
    Eigen::Index row = 0;
    theta.col(j).cwiseAbs().maxCoeff(&row);
    if (theta(row, j) < 0.0) theta.col(j) *= -1.0;
  }
}

Orthonormalized orthonormalize_theta(const Eigen::MatrixXd& theta_tilde, const ConditionalMoments& moments) {
  const auto P = theta_tilde.cols();
  if (!theta_tilde.allFinite()) throw NumericError("theta update is not finite");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(theta_tilde);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > 1e-12 * smax && sv(k) > 0.0) ++rank;
  }
  if (rank < P) {
    std::ostringstream msg;
    msg << "theta update is rank deficient: " << (P - rank) << " of " << P << " columns";
    throw NumericError(msg.str());
  }

  const Eigen::MatrixXd sigma = score_second_moment(moments);
  Eigen::MatrixXd target = theta_tilde * sigma * theta_tilde.transpose();
  target = 0.5 * (target + target.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(target);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed in orthonormalization");

  const auto q = theta_tilde.rows();
  Orthonormalized out;
  out.theta.resize(q, P);
  out.lambda.resize(P);
  // SelfAdjointEigenSolver sorts ascending.
  for (Eigen::Index j = 0; j < P; ++j) {
    out.theta.col(j) = eig.eigenvectors().col(q - 1 - j);
    out.lambda(j) = std::max(eig.eigenvalues()(q - 1 - j), kLambdaFloor);
  }
  apply_sign_rule(out.theta);
  return out;
}

Orthonormalized orthonormalize_theta_guarded(Eigen::MatrixXd theta_tilde, const Eigen::MatrixXd& fallback,
                                             const ConditionalMoments& moments) {
  for (Eigen::Index j = 0; j < theta_tilde.cols(); ++j) {
    if (!theta_tilde.col(j).allFinite() || theta_tilde.col(j).squaredNorm() == 0.0) {
      theta_tilde.col(j) = fallback.col(j);
    }
  }
  return orthonormalize_theta(theta_tilde, moments);
}

Eigen::MatrixXd coefficient_scatter(const Eigen::MatrixXd& beta_star, const Eigen::MatrixXd& beta_tilde) {
  const Eigen::MatrixXd diff = beta_star - beta_tilde;
  return diff.transpose() * diff / static_cast<double>(diff.rows());
}

KnownGroupResult known_group_em(const Design& design, std::span<const int> labels, int P,
                                const Eigen::MatrixXd& beta_star, const KnownGroupOptions& options) {
  const std::size_t n = design.n();
  const int q = design.q();
  if (labels.size() != n) throw GroupingError("group labels do not cover all curves");
  if (P < 0) throw ConfigError("number of components must be >= 0");
  const int K = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
  if (K < 1) throw GroupingError("at least one group is required");
  std::vector<int> counts(K, 0);
  for (int l : labels) {
    if (l < 1 || l > K) throw GroupingError("group labels must lie in 1..K");
    ++counts[l - 1];
  }
  for (int k = 0; k < K; ++k) {
    if (counts[k] == 0) throw GroupingError("group " + std::to_string(k + 1) + " is empty");
  }

  // U^T U is block diagonal with blocks sum_{i in k} B_i^T B_i.
  std::vector<Eigen::MatrixXd> utu(K, Eigen::MatrixXd::Zero(q, q));
  for (std::size_t i = 0; i < n; ++i) utu[labels[i] - 1] += design.BtB[i];
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors;
  factors.reserve(K);
  for (int k = 0; k < K; ++k) {
    factors.emplace_back(utu[k]);
    if (factors.back().info() != Eigen::Success) {
      throw GroupingError("group " + std::to_string(k + 1) + " has a singular design");
    }
  }

  const auto solve_alpha = [&](const std::vector<Eigen::VectorXd>& targets) {
    std::vector<Eigen::VectorXd> rhs(K, Eigen::VectorXd::Zero(q));
    for (std::size_t i = 0; i < n; ++i) rhs[labels[i] - 1] += design.B[i].transpose() * targets[i];
    Eigen::MatrixXd alpha(K, q);
    for (int k = 0; k < K; ++k) alpha.row(k) = factors[k].solve(rhs[k]).transpose();
    return alpha;
  };
  const auto expand = [&](const Eigen::MatrixXd& alpha) {
    Eigen::MatrixXd beta(static_cast<Eigen::Index>(n), q);
    for (std::size_t i = 0; i < n; ++i) beta.row(static_cast<Eigen::Index>(i)) = alpha.row(labels[i] - 1);
    return beta;
  };

  KnownGroupResult out;
  out.alpha = solve_alpha(design.Y);
  out.params.beta = expand(out.alpha);
  out.params.theta.resize(q, P);
  out.params.lambda.resize(P);

  if (P == 0) {
    ConditionalMoments none;
    out.params.sigma2 = update_sigma2(out.params, none, design);
    out.objective_trace.push_back(negative_loglikelihood_marginal(out.params, design));
    out.iterations = 1;
    out.converged = true;
    return out;
  }

  // Initial Theta, Lambda from the scatter of individual around group coefficients.
  {
    const Eigen::MatrixXd scatter = coefficient_scatter(beta_star, out.params.beta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (scatter + scatter.transpose()));
    for (int j = 0; j < P; ++j) {
      out.params.theta.col(j) = eig.eigenvectors().col(q - 1 - j);
      out.params.lambda(j) = std::max(eig.eigenvalues()(q - 1 - j), kLambdaFloor);
    }
    apply_sign_rule(out.params.theta);
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      rss += (design.Y[i] - design.B[i] * beta_star.row(static_cast<Eigen::Index>(i)).transpose()).squaredNorm();
    }
    out.params.sigma2 = std::max(rss / static_cast<double>(design.total_obs), kSigma2Floor);
  }

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const ModelParams prev = out.params;
    const ConditionalMoments moments = conditional_moments(out.params, design);
    out.params.sigma2 = update_sigma2(out.params, moments, design);
    const Eigen::MatrixXd theta_tilde = update_theta(out.params, moments, design);
    auto ortho = orthonormalize_theta_guarded(theta_tilde, out.params.theta, moments);
    out.params.theta = std::move(ortho.theta);
    out.params.lambda = std::move(ortho.lambda);

    std::vector<Eigen::VectorXd> targets(n);
    for (std::size_t i = 0; i < n; ++i) {
      targets[i] = design.Y[i] - design.B[i] * (out.params.theta * moments.m.row(static_cast<Eigen::Index>(i)).transpose());
    }
    out.alpha = solve_alpha(targets);
    out.params.beta = expand(out.alpha);
    out.objective_trace.push_back(negative_loglikelihood_marginal(out.params, design));
    out.iterations = iter;

    const double change = std::max({sup_change(out.params.beta, prev.beta), sup_change(out.params.theta, prev.theta),
                                    sup_change(out.params.lambda, prev.lambda),
                                    std::abs(out.params.sigma2 - prev.sigma2) / std::max(prev.sigma2, 1e-10)});
    if (change < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace fusioncurve
