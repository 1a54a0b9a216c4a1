#include "fusioncurve/model.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "fusioncurve/error.hpp"

namespace fusioncurve {

LongitudinalDataset::LongitudinalDataset(std::vector<Curve> curves,
                                         std::optional<std::vector<LatticeSite>> sites,
                                         std::optional<std::vector<double>> index)
    : curves_(std::move(curves)), sites_(std::move(sites)), index_(std::move(index)) {
  if (curves_.size() < 2) throw DataError("dataset needs at least 2 curves");
  for (std::size_t i = 0; i < curves_.size(); ++i) {
    const Curve& c = curves_[i];
    if (c.times.empty()) throw DataError("curve '" + c.id + "' has no observations");
    if (c.times.size() != c.values.size()) {
      throw DataError("curve '" + c.id + "' has mismatched times/values lengths");
    }
    for (std::size_t h = 0; h < c.times.size(); ++h) {
      if (!std::isfinite(c.times[h]) || !std::isfinite(c.values[h])) {
        throw DataError("curve '" + c.id + "' has a non-finite observation");
      }
      if (h > 0 && !(c.times[h] > c.times[h - 1])) {
        throw DataError("curve '" + c.id + "' times are not strictly increasing");
      }
    }
    if (!lookup_.emplace(c.id, i).second) throw DataError("duplicate curve id '" + c.id + "'");
  }
  if (sites_ && sites_->size() != curves_.size()) throw DataError("site list size differs from curve count");
  if (index_ && index_->size() != curves_.size()) throw DataError("index list size differs from curve count");
}

std::size_t LongitudinalDataset::total_observations() const noexcept {
  std::size_t total = 0;
  for (const auto& c : curves_) total += c.times.size();
  return total;
}

std::optional<std::size_t> LongitudinalDataset::find(const std::string& id) const {
  const auto it = lookup_.find(id);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

Design make_design(const LongitudinalDataset& data, const OrthoSplineBasis& basis) {
  Design d;
  const std::size_t n = data.size();
  d.B.reserve(n);
  d.BtB.reserve(n);
  d.Y.reserve(n);
  d.BtY.reserve(n);
  d.shared = true;
  const auto& first = data.curve(0).times;
  for (const auto& c : data.curves()) {
    if (c.times != first) d.shared = false;
  }
  Eigen::MatrixXd common;
  if (d.shared) common = basis.eval(first);
  for (const auto& c : data.curves()) {
    Eigen::MatrixXd b = d.shared ? common : basis.eval(c.times);
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(c.values.data(), static_cast<Eigen::Index>(c.values.size()));
    d.BtB.push_back(b.transpose() * b);
    d.BtY.push_back(b.transpose() * y);
    d.B.push_back(std::move(b));
    d.Y.push_back(std::move(y));
    d.total_obs += c.times.size();
  }
  return d;
}

void check_params(const ModelParams& params, double tol) {
  const int P = params.num_components();
  if (!(params.sigma2 > 0.0) || !std::isfinite(params.sigma2)) throw NumericError("sigma2 must be positive");
  if (params.lambda.size() != P) throw NumericError("lambda length differs from theta columns");
  if (P == 0) return;
  const Eigen::MatrixXd gram = params.theta.transpose() * params.theta;
  const double err = (gram - Eigen::MatrixXd::Identity(P, P)).cwiseAbs().maxCoeff();
  if (!(err <= tol)) {
    std::ostringstream msg;
    msg << "theta columns not orthonormal (max deviation " << err << ")";
    throw NumericError(msg.str());
  }
  for (int j = 0; j < P; ++j) {
    Eigen::Index row = 0;
    params.theta.col(j).cwiseAbs().maxCoeff(&row);
    if (!(params.theta(row, j) > 0.0)) throw NumericError("theta column violates the sign rule");
    if (!(params.lambda(j) > 0.0)) throw NumericError("lambda must be positive");
    if (j > 0 && params.lambda(j) > params.lambda(j - 1)) throw NumericError("lambda not nonincreasing");
  }
}

std::vector<double> mean_curve(const ModelParams& params, const OrthoSplineBasis& basis,
                               const LongitudinalDataset& data, const std::string& id,
                               std::span<const double> times) {
  const auto pos = data.find(id);
  if (!pos) throw DataError("unknown curve id '" + id + "'");
  const Eigen::VectorXd mu = basis.eval(times) * params.beta.row(static_cast<Eigen::Index>(*pos)).transpose();
  return {mu.data(), mu.data() + mu.size()};
}

Eigen::MatrixXd covariance_surface(const ModelParams& params, const OrthoSplineBasis& basis,
                                   std::span<const double> s_grid, std::span<const double> t_grid) {
  if (params.num_components() == 0) {
    return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s_grid.size()), static_cast<Eigen::Index>(t_grid.size()));
  }
  const Eigen::MatrixXd psi_s = basis.eval(s_grid) * params.theta;
  const Eigen::MatrixXd psi_t = basis.eval(t_grid) * params.theta;
  return psi_s * params.lambda.asDiagonal() * psi_t.transpose();
}

double negative_loglikelihood_conditional(const ModelParams& params, const Design& design,
                                          const Eigen::MatrixXd& scores) {
  const int P = params.num_components();
  const double n = static_cast<double>(design.n());
  double rss = 0.0;
  double prior = 0.0;
  for (std::size_t i = 0; i < design.n(); ++i) {
    Eigen::VectorXd r = design.Y[i] - design.B[i] * params.beta.row(static_cast<Eigen::Index>(i)).transpose();
    if (P > 0) {
      const Eigen::VectorXd xi = scores.row(static_cast<Eigen::Index>(i)).transpose();
      r -= design.B[i] * (params.theta * xi);
      prior += (xi.array().square() / params.lambda.array()).sum();
    }
    rss += r.squaredNorm();
  }
  double value = 0.5 * static_cast<double>(design.total_obs) * std::log(params.sigma2) + rss / (2.0 * params.sigma2);
  if (P > 0) value += 0.5 * n * params.lambda.array().log().sum() + 0.5 * prior;
  return value;
}

double negative_loglikelihood_marginal(const ModelParams& params, const Design& design) {
  const int P = params.num_components();
  const double s2 = params.sigma2;
  // Woodbury and the determinant lemma on the P x P core
  // M = Theta^T B^T B Theta + s2 Lambda^{-1}.
  struct Core {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double logdet = 0.0;  // log det(I + Lambda Theta^T B^T B Theta / s2)
  };
  const auto make_core = [&](const Eigen::MatrixXd& btb) {
    Eigen::MatrixXd core = params.theta.transpose() * btb * params.theta;
    core.diagonal() += s2 * params.lambda.cwiseInverse();
    Core c{Eigen::LLT<Eigen::MatrixXd>(core), 0.0};
    if (c.llt.info() != Eigen::Success) throw NumericError("marginal covariance is not positive definite");
    const Eigen::MatrixXd L = c.llt.matrixL();
    c.logdet = 2.0 * L.diagonal().array().log().sum() + params.lambda.array().log().sum() - P * std::log(s2);
    return c;
  };
  std::optional<Core> shared;
  if (P > 0 && design.shared) shared = make_core(design.BtB.front());

  double value = 0.0;
  for (std::size_t i = 0; i < design.n(); ++i) {
    const Eigen::VectorXd r = design.Y[i] - design.B[i] * params.beta.row(static_cast<Eigen::Index>(i)).transpose();
    const double ni = static_cast<double>(r.size());
    double quad = r.squaredNorm();
    double logdet = ni * std::log(s2);
    if (P > 0) {
      const Core own = shared ? Core{} : make_core(design.BtB[i]);
      const Core& c = shared ? *shared : own;
      const Eigen::VectorXd u = params.theta.transpose() * (design.B[i].transpose() * r);
      quad -= u.dot(c.llt.solve(u));
      logdet += c.logdet;
    }
    value += 0.5 * (logdet + quad / s2);
  }
  return value;
}

}  // namespace fusioncurve
