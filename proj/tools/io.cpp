#include "io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "fusioncurve/error.hpp"
#include "fusioncurve/metrics.hpp"

namespace fusioncurve::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, const std::string& where, const std::string& column) {
  const std::string t = trim(cell);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(x)) {
    throw DataError(where + ": column '" + column + "' is not a finite number: '" + t + "'");
  }
  return x;
}

int parse_int(const std::string& cell, const std::string& where, const std::string& column) {
  const std::string t = trim(cell);
  int x = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw DataError(where + ": column '" + column + "' is not an integer: '" + t + "'");
  }
  return x;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

void check_schema_version(const std::string& version, const std::string& what) {
  int major = 0;
  const auto [ptr, ec] = std::from_chars(version.data(), version.data() + version.size(), major);
  const bool well_formed = ec == std::errc() && ptr != version.data() && (ptr == version.data() + version.size() || *ptr == '.');
  if (!well_formed) throw DataError(what + ": malformed schema_version '" + version + "'");
  if (major != kSchemaMajor) {
    throw DataError(what + ": unsupported schema_version " + version + " (this build reads " +
                    std::to_string(kSchemaMajor) + ".x)");
  }
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

LongitudinalDataset parse_dataset_csv(std::istream& in, const std::string& source) {
  std::string line;
  int lineno = 0;
  const auto where = [&] { return source + " line " + std::to_string(lineno); };

  // Optional version comment, then the header.
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto eq = t.find("schema_version");
      if (eq != std::string::npos) {
        const auto sep = t.find_first_of("=:", eq);
        if (sep == std::string::npos) throw DataError(where() + ": malformed schema_version comment");
        check_schema_version(trim(t.substr(sep + 1)), source);
      }
      continue;
    }
    for (auto& h : split(t, ',')) header.push_back(trim(h));
    break;
  }
  if (header.empty()) throw DataError(source + ": missing header row");

  std::map<std::string, int> col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!col.emplace(header[c], static_cast<int>(c)).second) {
      throw DataError(source + ": duplicate column '" + header[c] + "'");
    }
  }
  for (const char* need : {"id", "time", "value"}) {
    if (!col.count(need)) throw DataError(source + ": missing required column '" + std::string(need) + "'");
  }
  const bool has_row = col.count("row") > 0;
  const bool has_col = col.count("col") > 0;
  if (has_row != has_col) throw DataError(source + ": 'row' and 'col' columns must appear together");
  const bool has_index = col.count("index") > 0;

  struct Acc {
    std::vector<std::pair<double, double>> obs;
    std::optional<LatticeSite> site;
    std::optional<double> index;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Acc> acc;

  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split(t, ',');
    if (cells.size() != header.size()) {
      throw DataError(where() + ": expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    }
    const std::string id = trim(cells[col["id"]]);
    if (id.empty()) throw DataError(where() + ": empty id");
    const double time = parse_number(cells[col["time"]], where(), "time");
    if (time < 0.0 || time > 1.0) throw DataError(where() + ": time " + trim(cells[col["time"]]) + " outside [0, 1]");
    const double value = parse_number(cells[col["value"]], where(), "value");

    auto [it, inserted] = acc.try_emplace(id);
    if (inserted) order.push_back(id);
    Acc& a = it->second;
    a.obs.emplace_back(time, value);
    if (has_row) {
      const LatticeSite s{parse_int(cells[col["row"]], where(), "row"), parse_int(cells[col["col"]], where(), "col")};
      if (a.site && !(*a.site == s)) throw DataError(where() + ": curve '" + id + "' changes its lattice site");
      a.site = s;
    }
    if (has_index) {
      const double x = parse_number(cells[col["index"]], where(), "index");
      if (a.index && *a.index != x) throw DataError(where() + ": curve '" + id + "' changes its index");
      a.index = x;
    }
  }
  if (order.empty()) throw DataError(source + ": no data rows");

  std::vector<Curve> curves;
  std::optional<std::vector<LatticeSite>> sites;
  std::optional<std::vector<double>> index;
  if (has_row) sites.emplace();
  if (has_index) index.emplace();
  for (const std::string& id : order) {
    Acc& a = acc[id];
    std::stable_sort(a.obs.begin(), a.obs.end(), [](auto& x, auto& y) { return x.first < y.first; });
    Curve c{id, {}, {}};
    for (std::size_t h = 0; h < a.obs.size(); ++h) {
      if (h > 0 && a.obs[h].first == a.obs[h - 1].first) {
        throw DataError(source + ": curve '" + id + "' has two observations at time " + format_double(a.obs[h].first));
      }
      c.times.push_back(a.obs[h].first);
      c.values.push_back(a.obs[h].second);
    }
    curves.push_back(std::move(c));
    if (sites) sites->push_back(*a.site);
    if (index) index->push_back(*a.index);
  }
  return LongitudinalDataset(std::move(curves), std::move(sites), std::move(index));
}

LongitudinalDataset read_dataset_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  return parse_dataset_csv(in, path.string());
}

void write_dataset_csv(const fs::path& path, const LongitudinalDataset& data) {
  std::ofstream out = open_out(path);
  out << "# schema_version=" << kSchemaVersion << "\n";
  out << "id,time,value";
  if (data.sites()) out << ",row,col";
  if (data.index()) out << ",index";
  out << "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Curve& c = data.curve(i);
    for (std::size_t h = 0; h < c.times.size(); ++h) {
      out << c.id << ',' << format_double(c.times[h]) << ',' << format_double(c.values[h]);
      if (data.sites()) out << ',' << (*data.sites())[i].row << ',' << (*data.sites())[i].col;
      if (data.index()) out << ',' << format_double((*data.index())[i]);
      out << "\n";
    }
  }
}

Json truth_to_json(const Simulated& sim) {
  const Truth& t = sim.truth;
  const ScenarioSpec& s = t.spec;
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "truth";
  Json gen;
  gen["scenario"] = s.scenario == Scenario::Custom ? Json("custom") : Json(static_cast<int>(s.scenario));
  gen["m"] = s.m;
  gen["sigma"] = s.sigma;
  gen["lambda"] = s.lambda;
  gen["seed"] = s.seed;
  if (s.scenario == Scenario::One || s.scenario == Scenario::Custom) gen["group_sizes"] = s.group_sizes;
  const bool similar = s.scenario == Scenario::Three || (s.scenario == Scenario::Custom && s.mean_set == MeanSet::Similar);
  gen["mean_set"] = similar ? "similar" : "distinct";
  doc["generator"] = gen;
  Json part = Json::object();
  for (std::size_t i = 0; i < sim.data.size(); ++i) part[sim.data.curve(i).id] = t.labels[i];
  doc["partition"] = part;
  doc["times"] = t.times;
  doc["group_means"] = t.group_means;
  Json scores = Json::object();
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(t.scores.cols()));
    for (Eigen::Index l = 0; l < t.scores.cols(); ++l) row[l] = t.scores(static_cast<Eigen::Index>(i), l);
    scores[sim.data.curve(i).id] = row;
  }
  doc["scores"] = scores;
  return doc;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

TruthFile read_truth(const fs::path& path) {
  const Json doc = read_json(path);
  const std::string src = path.string();
  try {
    check_schema_version(doc.at("schema_version").get<std::string>(), src);
    TruthFile t;
    for (const auto& [id, label] : doc.at("partition").items()) t.partition[id] = label.get<int>();
    t.times = doc.at("times").get<std::vector<double>>();
    t.group_means = doc.at("group_means").get<std::vector<std::vector<double>>>();
    for (const auto& g : t.group_means) {
      if (g.size() != t.times.size()) throw DataError(src + ": group_means rows must match times");
    }
    for (const auto& [id, label] : t.partition) {
      if (label < 1 || label > static_cast<int>(t.group_means.size())) {
        throw DataError(src + ": label of '" + id + "' has no group mean");
      }
    }
    return t;
  } catch (const Json::exception& e) {
    throw DataError(src + ": not a truth file (" + e.what() + ")");
  }
}

void write_json(const fs::path& path, const Json& doc) {
  std::ofstream out = open_out(path);
  out << doc.dump(2) << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
}

std::vector<std::vector<double>> fitted_means(const OrthoSplineBasis& basis, const Eigen::MatrixXd& group_beta,
                                              const std::vector<int>& labels, const std::vector<double>& times) {
  const Eigen::MatrixXd curves = basis.eval(times) * group_beta.transpose();  // len(times) x K
  std::vector<std::vector<double>> out;
  out.reserve(labels.size());
  for (int l : labels) {
    const Eigen::VectorXd c = curves.col(l - 1);
    out.emplace_back(c.data(), c.data() + c.size());
  }
  return out;
}

Evaluation evaluate_fit(const std::vector<std::string>& ids, const std::vector<int>& labels,
                        const Eigen::MatrixXd& group_beta, const OrthoSplineBasis& basis, const TruthFile& truth) {
  if (ids.size() != labels.size()) throw DataError("labels do not match the curve ids");
  std::map<std::string, int> fitted;
  for (std::size_t i = 0; i < ids.size(); ++i) fitted[ids[i]] = labels[i];
  Evaluation ev;
  ev.ari = adjusted_rand_index(fitted, truth.partition);
  ev.k_hat = static_cast<int>(group_beta.rows());
  ev.k_true = static_cast<int>(truth.group_means.size());
  std::vector<std::vector<double>> expected;
  for (const std::string& id : ids) expected.push_back(truth.group_means[truth.partition.at(id) - 1]);
  ev.rmse = rmse(fitted_means(basis, group_beta, labels, truth.times), expected);
  return ev;
}

}  // namespace fusioncurve::cli
