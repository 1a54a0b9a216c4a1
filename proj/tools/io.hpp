#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fusioncurve/basis.hpp"
#include "fusioncurve/model.hpp"
#include "fusioncurve/simgen.hpp"
#include "fusioncurve/solver.hpp"

namespace fusioncurve::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1.0";
inline constexpr int kSchemaMajor = 1;

/// Throws DataError unless `version` is "MAJOR[.MINOR]" with a supported major.
void check_schema_version(const std::string& version, const std::string& what);

/// Shortest round-trip decimal form.
std::string format_double(double x);

/// Long-format CSV: id,time,value[,row,col][,index]. An optional first line
/// "# schema_version=X.Y" is checked when present. Rows of a curve may come in
/// any order; side columns must be constant within a curve. Errors name the line.
LongitudinalDataset read_dataset_csv(const std::filesystem::path& path);
LongitudinalDataset parse_dataset_csv(std::istream& in, const std::string& source);
void write_dataset_csv(const std::filesystem::path& path, const LongitudinalDataset& data);

Json truth_to_json(const Simulated& sim);

struct TruthFile {
  std::map<std::string, int> partition;
  std::vector<double> times;
  std::vector<std::vector<double>> group_means;  // K x len(times)
};
TruthFile read_truth(const std::filesystem::path& path);

/// Parses a JSON document, mapping syntax errors to DataError.
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Fitted mean of every curve at `times`, from group coefficients and labels.
std::vector<std::vector<double>> fitted_means(const OrthoSplineBasis& basis, const Eigen::MatrixXd& group_beta,
                                              const std::vector<int>& labels, const std::vector<double>& times);

struct Evaluation {
  double ari = 0.0;
  int k_hat = 0;
  int k_true = 0;
  double rmse = 0.0;
};
/// Compares a fitted partition (labels aligned with `ids`) with the truth.
Evaluation evaluate_fit(const std::vector<std::string>& ids, const std::vector<int>& labels,
                        const Eigen::MatrixXd& group_beta, const OrthoSplineBasis& basis, const TruthFile& truth);

}  // namespace fusioncurve::cli
