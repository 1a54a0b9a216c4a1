#include "fusioncurve/basis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fusioncurve/error.hpp"

namespace fusioncurve {

namespace {

void validate(const SplineConfig& config) {
  if (config.degree < 0) throw ConfigError("spline degree must be >= 0");
  if (config.num_interior_knots < 0) throw ConfigError("number of interior knots must be >= 0");
  const auto [a, b] = config.interval;
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw ConfigError("spline interval must be finite and nondegenerate");
  }
}

// Index s of the knot span with knots[s] <= t < knots[s+1]; the right endpoint
// maps to the last nonempty span.
int find_span(int degree, int q, std::span<const double> knots, double t) {
  if (t >= knots[q]) return q - 1;
  int lo = degree;
  int hi = q;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (t < knots[mid]) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

}  // namespace

GaussRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss-Legendre rule needs at least one node");
  GaussRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 2.0);
  if (n == 1) return rule;

  // Legendre P_n and its derivative at x via the three-term recurrence.
  const auto legendre = [n](double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };

  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

std::vector<double> clamped_knots(const SplineConfig& config) {
  validate(config);
  const auto [a, b] = config.interval;
  const int p = config.degree;
  const int k = config.num_interior_knots;
  std::vector<double> knots;
  knots.reserve(k + 2 * (p + 1));
  for (int i = 0; i <= p; ++i) knots.push_back(a);
  for (int i = 1; i <= k; ++i) knots.push_back(a + (b - a) * i / (k + 1.0));
  for (int i = 0; i <= p; ++i) knots.push_back(b);
  return knots;
}

Eigen::VectorXd eval_raw(const SplineConfig& config, std::span<const double> knots, double t) {
  const int p = config.degree;
  const int q = config.dimension();
  const int span = find_span(p, q, knots, t);

  // Nonzero functions N_{span-p..span}, NURBS Book algorithm A2.2.
  std::vector<double> n(p + 1, 0.0);
  std::vector<double> left(p + 1, 0.0);
  std::vector<double> right(p + 1, 0.0);
  n[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = t - knots[span + 1 - j];
    right[j] = knots[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(q);
  for (int r = 0; r <= p; ++r) out(span - p + r) = n[r];
  return out;
}

Eigen::MatrixXd gram_raw(const SplineConfig& config) {
  const auto knots = clamped_knots(config);
  const int q = config.dimension();
  const int npts = (2 * config.degree + 2) / 2 + 1;  // ceil((2p+1)/2) + 1
  const GaussRule rule = gauss_legendre(npts);

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(q, q);
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    const double lo = knots[s];
    const double hi = knots[s + 1];
    if (!(hi > lo)) continue;
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (int g = 0; g < npts; ++g) {
      const Eigen::VectorXd b = eval_raw(config, knots, mid + half * rule.nodes[g]);
      gram.noalias() += (rule.weights[g] * half) * (b * b.transpose());
    }
  }
  return 0.5 * (gram + gram.transpose());
}

OrthoSplineBasis::OrthoSplineBasis(const SplineConfig& config)
    : config_(config), knots_(clamped_knots(config)) {
  const Eigen::MatrixXd gram = gram_raw(config_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw NumericError("raw B-spline Gram matrix is not positive definite");
  }
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues().array().rsqrt();
  transform_ = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
}

void OrthoSplineBasis::check_domain(double t) const {
  const auto [a, b] = config_.interval;
  if (!(t >= a && t <= b)) {
    std::ostringstream msg;
    msg << "time " << t << " outside basis interval [" << a << ", " << b << "]";
    throw DomainError(msg.str());
  }
}

Eigen::MatrixXd OrthoSplineBasis::eval_raw(std::span<const double> times) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(times.size()), dimension());
  for (std::size_t h = 0; h < times.size(); ++h) {
    check_domain(times[h]);
    out.row(static_cast<Eigen::Index>(h)) =
        fusioncurve::eval_raw(config_, knots_, times[h]).transpose();
  }
  return out;
}

Eigen::MatrixXd OrthoSplineBasis::eval(std::span<const double> times) const {
  return eval_raw(times) * transform_;
}

Eigen::VectorXd OrthoSplineBasis::eval(double t) const {
  check_domain(t);
  return transform_.transpose() * fusioncurve::eval_raw(config_, knots_, t);
}

OrthoSplineBasis build_basis(const SplineConfig& config) { return OrthoSplineBasis(config); }

}  // namespace fusioncurve
