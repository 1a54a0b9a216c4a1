#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace fusioncurve {

/// Hubert-Arabie adjusted Rand index over aligned label vectors. Returns 1 when
/// both partitions are identical even if the index is degenerate (0/0).
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Same, keyed by item id; throws DataError when the id sets differ.
double adjusted_rand_index(const std::map<std::string, int>& a, const std::map<std::string, int>& b);

/// sqrt((1/n) sum_i ||estimated_i - truth_i||^2). Throws DataError on length mismatch.
double rmse(const std::vector<std::vector<double>>& estimated, const std::vector<std::vector<double>>& truth);

struct ReplicateOutcome {
  double k_hat = 0.0;
  double ari = 0.0;
  double P = 0.0;
  double rmse = 0.0;
};

struct ReplicateSummary {
  double K_hat_mean = 0.0;
  double K_hat_sd = 0.0;
  double ARI_mean = 0.0;
  double ARI_sd = 0.0;
  double P_mean = 0.0;
  double P_sd = 0.0;
  double RMSE_mean = 0.0;
  std::size_t replicates = 0;
};

/// Means and sample standard deviations (sd = 0 for a single replicate).
ReplicateSummary summarize_replicates(std::span<const ReplicateOutcome> results);

/// Column names of a summary row, in output order.
std::vector<std::string> summary_columns();

}  // namespace fusioncurve
