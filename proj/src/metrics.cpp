#include "fusioncurve/metrics.hpp"

#include <cmath>
#include <map>
#include <utility>

#include "fusioncurve/error.hpp"

namespace fusioncurve {

namespace {

double choose2(double x) { return 0.5 * x * (x - 1.0); }

struct Stats {
  double mean = 0.0;
  double sd = 0.0;
};

template <typename Get>
Stats stats(std::span<const ReplicateOutcome> xs, Get get) {
  Stats s;
  for (const auto& x : xs) s.mean += get(x);
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (const auto& x : xs) ss += (get(x) - s.mean) * (get(x) - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DataError("partitions cover different numbers of items");
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [key, count] : table) index += choose2(count);
  double sum_a = 0.0;
  for (const auto& [key, count] : rows) sum_a += choose2(count);
  double sum_b = 0.0;
  for (const auto& [key, count] : cols) sum_b += choose2(count);
  const double total = choose2(n);
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return index == max_index ? 1.0 : 0.0;
  return (index - expected) / denom;
}

double adjusted_rand_index(const std::map<std::string, int>& a, const std::map<std::string, int>& b) {
  if (a.size() != b.size()) throw DataError("partitions cover different item sets");
  std::vector<int> la;
  std::vector<int> lb;
  la.reserve(a.size());
  lb.reserve(b.size());
  for (const auto& [id, label] : a) {
    const auto it = b.find(id);
    if (it == b.end()) throw DataError("item '" + id + "' missing from the second partition");
    la.push_back(label);
    lb.push_back(it->second);
  }
  return adjusted_rand_index(la, lb);
}

double rmse(const std::vector<std::vector<double>>& estimated, const std::vector<std::vector<double>>& truth) {
  if (estimated.size() != truth.size() || estimated.empty()) throw DataError("RMSE inputs cover different curve counts");
  double total = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    if (estimated[i].size() != truth[i].size()) throw DataError("RMSE grids differ for curve " + std::to_string(i));
    for (std::size_t h = 0; h < truth[i].size(); ++h) {
      const double d = estimated[i][h] - truth[i][h];
      total += d * d;
    }
  }
  return std::sqrt(total / static_cast<double>(estimated.size()));
}

ReplicateSummary summarize_replicates(std::span<const ReplicateOutcome> results) {
  if (results.empty()) throw DataError("no replicates to summarize");
  ReplicateSummary s;
  s.replicates = results.size();
  const auto k = stats(results, [](const ReplicateOutcome& r) { return r.k_hat; });
  const auto ari = stats(results, [](const ReplicateOutcome& r) { return r.ari; });
  const auto p = stats(results, [](const ReplicateOutcome& r) { return r.P; });
  const auto e = stats(results, [](const ReplicateOutcome& r) { return r.rmse; });
  s.K_hat_mean = k.mean;
  s.K_hat_sd = k.sd;
  s.ARI_mean = ari.mean;
  s.ARI_sd = ari.sd;
  s.P_mean = p.mean;
  s.P_sd = p.sd;
  s.RMSE_mean = e.mean;
  return s;
}

std::vector<std::string> summary_columns() {
  return {"K_hat_mean", "K_hat_sd", "ARI_mean", "ARI_sd", "P_mean", "P_sd", "RMSE_mean"};
}

}  // namespace fusioncurve
