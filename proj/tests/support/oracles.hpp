#pragma once

// Small brute-force references shared by the unit tests. Everything here is
// deliberately naive: dense matrices, scalar searches, explicit loops.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Adaptive Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 0) {
  const double c = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fc = f(c);
  const auto rec = [&](auto&& self, double lo, double hi, double flo, double fmid, double fhi, double whole,
                       double eps, int d) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (d > 40 || std::abs(left + right - whole) <= 15.0 * eps) return left + right + (left + right - whole) / 15.0;
    return self(self, lo, mid, flo, flm, fmid, left, 0.5 * eps, d + 1) +
           self(self, mid, hi, fmid, frm, fhi, right, 0.5 * eps, d + 1);
  };
  return rec(rec, a, b, fa, fc, fb, (b - a) / 6.0 * (fa + 4.0 * fc + fb), tol, depth);
}

// Golden-section minimum of a unimodal f on [a, b].
inline double golden_min(const std::function<double(double)>& f, double a, double b, int iters = 200) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int k = 0; k < iters; ++k) {
    if (fc < fd) {
      b = d; d = c; fd = fc; c = b - g * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd; d = a + g * (b - a); fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Dense pairwise difference operator A = D (x) I_q, rows ordered pair-major.
inline Eigen::MatrixXd dense_A(int n, int q) {
  const int pairs = n * (n - 1) / 2;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(pairs * q, n * q);
  int p = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++p) {
      for (int k = 0; k < q; ++k) {
        A(p * q + k, i * q + k) = 1.0;
        A(p * q + k, j * q + k) = -1.0;
      }
    }
  }
  return A;
}

// vec of an n x q matrix by rows: (beta_1^T, ..., beta_n^T)^T.
inline Eigen::VectorXd stack_rows(const Eigen::MatrixXd& m) {
  Eigen::VectorXd out(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.segment(i * m.cols(), m.cols()) = m.row(i).transpose();
  return out;
}

inline Eigen::VectorXd stack_cols(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

inline Eigen::MatrixXd random_spd(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = z(rng);
  return a * a.transpose() + d * Eigen::MatrixXd::Identity(d, d);
}

inline Eigen::MatrixXd random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) a(i, j) = z(rng);
  return a;
}

// Hubert-Arabie ARI by enumerating all item pairs.
inline double pair_count_ari(const std::vector<int>& a, const std::vector<int>& b) {
  double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      if (sa && sb) ++n11;
      else if (sa) ++n10;
      else if (sb) ++n01;
      else ++n00;
    }
  }
  const double total = n11 + n10 + n01 + n00;
  const double expected = (n11 + n10) * (n11 + n01) / total;
  const double max_index = 0.5 * ((n11 + n10) + (n11 + n01));
  if (max_index == expected) return 1.0;
  return (n11 - expected) / (max_index - expected);
}

}  // namespace oracle
