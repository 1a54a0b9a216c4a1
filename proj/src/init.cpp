#include "fusioncurve/init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fusioncurve/error.hpp"

namespace fusioncurve {

namespace {

Eigen::LLT<Eigen::MatrixXd> ridge_factor(const Eigen::MatrixXd& btb, double tau1) {
  Eigen::MatrixXd a = btb;
  a.diagonal().array() += tau1;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  return llt;
}

double squared_distance(const Eigen::MatrixXd& points, Eigen::Index i, const Eigen::MatrixXd& centers, Eigen::Index k) {
  return (points.row(i) - centers.row(k)).squaredNorm();
}

}  // namespace

std::vector<double> default_ridge_grid() {
  std::vector<double> grid(20);
  for (int k = 0; k < 20; ++k) grid[k] = std::pow(10.0, -6.0 + 8.0 * k / 19.0);
  return grid;
}

double ridge_gcv(const Design& design, double tau1) {
  double total = 0.0;
  for (std::size_t i = 0; i < design.n(); ++i) {
    const auto llt = ridge_factor(design.BtB[i], tau1);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd coef = llt.solve(design.BtY[i]);
    const Eigen::VectorXd resid = design.Y[i] - design.B[i] * coef;
    const double ni = static_cast<double>(design.Y[i].size());
    const double trace = ni - llt.solve(design.BtB[i]).trace();
    if (!(trace > 1e-12)) return std::numeric_limits<double>::infinity();
    total += ni * resid.squaredNorm() / (trace * trace);
  }
  return total;
}

RidgeFit ridge_coefficients_gcv(const Design& design, std::span<const double> tau1_grid) {
  if (tau1_grid.empty()) throw ConfigError("ridge grid must be nonempty");
  RidgeFit fit;
  fit.gcv.reserve(tau1_grid.size());
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (double tau1 : tau1_grid) {
    if (!(tau1 >= 0.0)) throw ConfigError("ridge parameters must be >= 0");
    const double g = ridge_gcv(design, tau1);
    fit.gcv.push_back(g);
    if (std::isfinite(g) && (!found || g < best)) {
      best = g;
      fit.tau1 = tau1;
      found = true;
    }
  }
  if (!found) throw DataError("ridge GCV is undefined at every grid point (curves too short for the basis)");

  const auto n = static_cast<Eigen::Index>(design.n());
  fit.beta_star.resize(n, design.q());
  for (std::size_t i = 0; i < design.n(); ++i) {
    const auto llt = ridge_factor(design.BtB[i], fit.tau1);
    if (llt.info() != Eigen::Success) throw DataError("ridge system is singular");
    fit.beta_star.row(static_cast<Eigen::Index>(i)) = llt.solve(design.BtY[i]).transpose();
  }
  return fit;
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts, int max_iterations) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw ConfigError("k-means needs k >= 1");
  if (k > n) throw ConfigError("k-means needs k <= number of points");
  if (restarts < 1) restarts = 1;

  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();

  for (int run = 0; run < restarts; ++run) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(run)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // k-means++ seeding.
    Eigen::MatrixXd centers(k, points.cols());
    const auto first = static_cast<Eigen::Index>(std::min<double>(unif(rng) * n, n - 1));
    centers.row(0) = points.row(first);
    Eigen::VectorXd d2(n);
    for (Eigen::Index i = 0; i < n; ++i) d2(i) = squared_distance(points, i, centers, 0);
    for (int c = 1; c < k; ++c) {
      const double total = d2.sum();
      Eigen::Index pick = 0;
      if (total > 0.0) {
        const double target = unif(rng) * total;
        double acc = 0.0;
        pick = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
          acc += d2(i);
          if (acc >= target && d2(i) > 0.0) {
            pick = i;
            break;
          }
        }
      } else {
        pick = static_cast<Eigen::Index>(std::min<double>(unif(rng) * n, n - 1));
      }
      centers.row(c) = points.row(pick);
      for (Eigen::Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), squared_distance(points, i, centers, c));
    }

    // Lloyd iterations.
    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < max_iterations; ++iter) {
      bool changed = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        double dmin = squared_distance(points, i, centers, 0);
        for (int c = 1; c < k; ++c) {
          const double d = squared_distance(points, i, centers, c);
          if (d < dmin) {
            dmin = d;
            arg = c;
          }
        }
        if (assign[i] != arg) {
          assign[i] = arg;
          changed = true;
        }
      }
      // Refill empty clusters with the point farthest from its center.
      std::vector<int> counts(k, 0);
      for (int a : assign) ++counts[a];
      for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        Eigen::Index far = 0;
        double dfar = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (counts[assign[i]] <= 1) continue;
          const double d = squared_distance(points, i, centers, assign[i]);
          if (d > dfar) {
            dfar = d;
            far = i;
          }
        }
        --counts[assign[far]];
        assign[far] = c;
        counts[c] = 1;
        centers.row(c) = points.row(far);
        changed = true;
      }
      centers.setZero();
      for (Eigen::Index i = 0; i < n; ++i) centers.row(assign[i]) += points.row(i);
      for (int c = 0; c < k; ++c) centers.row(c) /= static_cast<double>(counts[c]);
      if (!changed) break;
    }

    double wcss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) wcss += squared_distance(points, i, centers, assign[i]);
    if (wcss < best.wcss) {
      best.wcss = wcss;
      best.labels.assign(assign.begin(), assign.end());
    }
  }

  // Relabel 1..k by first appearance.
  std::vector<int> remap(k, 0);
  int next = 0;
  for (int& l : best.labels) {
    if (remap[l] == 0) remap[l] = ++next;
    l = remap[l];
  }
  return best;
}

std::vector<int> kmeans_init(const Eigen::MatrixXd& beta_star, int k0, std::uint64_t seed, int restarts) {
  return kmeans(beta_star, k0, seed, restarts).labels;
}

Initialization initialize(const Design& design, const RidgeFit& ridge, int P, int k0, std::uint64_t seed) {
  Initialization init;
  init.beta_star = ridge.beta_star;
  init.tau1 = ridge.tau1;
  init.k0 = k0;
  init.kmeans_labels = kmeans_init(init.beta_star, k0, seed);
  init.params = known_group_em(design, init.kmeans_labels, P, init.beta_star).params;
  return init;
}

Initialization initialize(const Design& design, int P, int k0, std::uint64_t seed) {
  return initialize(design, ridge_coefficients_gcv(design, default_ridge_grid()), P, k0, seed);
}

}  // namespace fusioncurve
