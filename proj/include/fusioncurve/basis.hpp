#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fusioncurve {

/// Spline layout: clamped knot vector with equally spaced interior knots.
struct SplineConfig {
  int degree = 3;
  int num_interior_knots = 0;
  std::pair<double, double> interval{0.0, 1.0};

  [[nodiscard]] int dimension() const noexcept { return num_interior_knots + degree + 1; }
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

/// Clamped knot vector (boundary multiplicity degree + 1).
std::vector<double> clamped_knots(const SplineConfig& config);

/// Raw B-spline values of all q basis functions at t (Cox-de Boor).
/// t must lie in the closed interval; the right endpoint belongs to the last span.
Eigen::VectorXd eval_raw(const SplineConfig& config, std::span<const double> knots, double t);

/// Exact Gram matrix of the raw basis, by per-span Gauss-Legendre quadrature.
Eigen::MatrixXd gram_raw(const SplineConfig& config);

/// B-spline basis orthonormalized in L2 over the interval: the evaluated basis is
/// transform^T * raw, with transform = G^{-1/2} (symmetric inverse square root).
class OrthoSplineBasis {
 public:
  OrthoSplineBasis() = default;
  explicit OrthoSplineBasis(const SplineConfig& config);

  [[nodiscard]] const SplineConfig& config() const noexcept { return config_; }
  [[nodiscard]] const std::vector<double>& knot_vector() const noexcept { return knots_; }
  [[nodiscard]] const Eigen::MatrixXd& transform() const noexcept { return transform_; }
  [[nodiscard]] int dimension() const noexcept { return config_.dimension(); }

  /// Row h is the orthonormal basis at times[h]. Throws DomainError outside the interval.
  [[nodiscard]] Eigen::MatrixXd eval(std::span<const double> times) const;
  [[nodiscard]] Eigen::VectorXd eval(double t) const;
  [[nodiscard]] Eigen::MatrixXd eval_raw(std::span<const double> times) const;

 private:
  void check_domain(double t) const;

  SplineConfig config_{};
  std::vector<double> knots_;
  Eigen::MatrixXd transform_;
};

OrthoSplineBasis build_basis(const SplineConfig& config);

}  // namespace fusioncurve
