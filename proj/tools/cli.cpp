#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fusioncurve/error.hpp"
#include "fusioncurve/metrics.hpp"
#include "fusioncurve/simgen.hpp"
#include "fusioncurve/solver.hpp"
#include "fusioncurve/weights.hpp"
#include "io.hpp"

namespace fusioncurve::cli {

namespace fs = std::filesystem;

namespace {

struct SimulateOptions {
  std::string scenario;
  int m = 20;
  double sigma = 0.2;
  std::vector<double> lambda = {0.1, 0.2};
  std::vector<int> group_sizes;
  std::string mean_set = "distinct";
  std::uint64_t seed = 1;
  std::string out;
};

struct FitOptions {
  std::string data;
  std::string truth;
  bool no_truth = false;
  std::string out;
  std::string config;
  std::string weights = "equal";
  std::string adjacency = "rook";
  int knots = -1;
  int degree = 3;
  int k0 = 0;
  int k0_max = 10;
  std::uint64_t seed = 1;
  std::optional<int> jobs;
  int max_iter = 500;
  double gamma = 3.0;
  double vartheta = 1.0;
  double eps_abs = 1e-4;
  double eps_rel = 1e-2;
  double group_tolerance = 1e-6;
  double pair_cutoff = 0.0;
  std::vector<int> P_grid = {1, 2, 3};
  std::vector<double> tau_grid;
  std::vector<double> alpha_grid;
  // fit only
  int P = 2;
  double tau = 0.0;
  double alpha = 0.0;
};

struct EvaluateOptions {
  std::vector<std::string> results;
  std::vector<std::string> truths;
  std::string out;
};

template <typename T>
T json_value(const Json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const Json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

// Config file keys mirror the long flag names with '-' replaced by '_'.
void apply_config(const fs::path& path, FitOptions& o, bool single_fit) {
  Json doc;
  try {
    doc = read_json(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  if (!doc.is_object()) throw ConfigError(path.string() + ": config must be a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "schema_version") {
      try {
        check_schema_version(json_value<std::string>(v, key), path.string());
      } catch (const DataError& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "weights") o.weights = json_value<std::string>(v, key);
    else if (key == "adjacency") o.adjacency = json_value<std::string>(v, key);
    else if (key == "knots") o.knots = json_value<int>(v, key);
    else if (key == "degree") o.degree = json_value<int>(v, key);
    else if (key == "k0") o.k0 = json_value<int>(v, key);
    else if (key == "k0_max") o.k0_max = json_value<int>(v, key);
    else if (key == "seed") o.seed = json_value<std::uint64_t>(v, key);
    else if (key == "jobs") o.jobs = json_value<int>(v, key);
    else if (key == "max_iter") o.max_iter = json_value<int>(v, key);
    else if (key == "gamma") o.gamma = json_value<double>(v, key);
    else if (key == "vartheta") o.vartheta = json_value<double>(v, key);
    else if (key == "eps_abs") o.eps_abs = json_value<double>(v, key);
    else if (key == "eps_rel") o.eps_rel = json_value<double>(v, key);
    else if (key == "group_tol") o.group_tolerance = json_value<double>(v, key);
    else if (key == "pair_cutoff") o.pair_cutoff = json_value<double>(v, key);
    else if (!single_fit && key == "P_grid") o.P_grid = json_value<std::vector<int>>(v, key);
    else if (!single_fit && key == "tau_grid") o.tau_grid = json_value<std::vector<double>>(v, key);
    else if (!single_fit && key == "alpha_grid") o.alpha_grid = json_value<std::vector<double>>(v, key);
    else if (single_fit && key == "P") o.P = json_value<int>(v, key);
    else if (single_fit && key == "tau") o.tau = json_value<double>(v, key);
    else if (single_fit && key == "alpha") o.alpha = json_value<double>(v, key);
    else throw ConfigError(path.string() + ": unknown config key '" + key + "'");
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

Json matrix_rows(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd rows_matrix(const Json& rows, const std::string& what) {
  const auto v = rows.get<std::vector<std::vector<double>>>();
  if (v.empty()) throw DataError(what + " is empty");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.front().size()));
  for (std::size_t r = 0; r < v.size(); ++r) {
    if (v[r].size() != v.front().size()) throw DataError(what + " has ragged rows");
    for (std::size_t c = 0; c < v[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r][c];
  }
  return m;
}

std::string csv_header() { return std::string("# schema_version=") + kSchemaVersion + "\n"; }

Scenario parse_scenario(const std::string& s) {
  if (s == "1") return Scenario::One;
  if (s == "2") return Scenario::Two;
  if (s == "3") return Scenario::Three;
  return Scenario::Custom;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  ScenarioSpec spec;
  spec.scenario = parse_scenario(o.scenario);
  spec.m = o.m;
  spec.sigma = o.sigma;
  spec.lambda = o.lambda;
  spec.seed = o.seed;
  if (!o.group_sizes.empty()) {
    if (spec.scenario == Scenario::Two || spec.scenario == Scenario::Three) {
      throw ConfigError("--group-sizes does not apply to the lattice scenarios");
    }
    spec.group_sizes = o.group_sizes;
  }
  spec.mean_set = o.mean_set == "similar" ? MeanSet::Similar : MeanSet::Distinct;
  const Simulated sim = generate(spec);
  const fs::path dir(o.out);
  write_dataset_csv(dir / "data.csv", sim.data);
  write_json(dir / "truth.json", truth_to_json(sim));
  out << "simulated " << sim.data.size() << " curves (" << sim.data.total_observations() << " rows) into "
      << dir.string() << "\n";
  return kExitOk;
}

int cmd_fit(FitOptions o, bool single_fit, const std::string& command, std::ostream& out) {
  if (!o.config.empty()) apply_config(o.config, o, single_fit);
  if (single_fit) {
    o.P_grid = {o.P};
    o.tau_grid = {o.tau};
    o.alpha_grid = {o.alpha};
  }

  WeightConfig wc;
  try {
    wc.scheme = parse_weight_scheme(o.weights);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (o.adjacency != "rook" && o.adjacency != "queen") throw ConfigError("adjacency must be rook or queen");
  wc.adjacency = o.adjacency == "queen" ? Adjacency::Queen : Adjacency::Rook;

  const LongitudinalDataset data = read_dataset_csv(o.data);
  if (o.degree < 0) throw ConfigError("degree must be >= 0");
  const int knots = o.knots >= 0 ? o.knots : default_interior_knots(data.total_observations(), o.degree);
  const OrthoSplineBasis basis = build_basis({o.degree, knots, {0.0, 1.0}});

  SolverConfig sc;
  sc.max_outer_iterations = o.max_iter;
  if (!o.tau_grid.empty()) sc.tau_grid = o.tau_grid;
  sc.P_grid = o.P_grid;
  sc.alpha_grid = o.alpha_grid.empty() ? default_alpha_grid(wc.scheme) : o.alpha_grid;
  sc.gamma = o.gamma;
  sc.vartheta = o.vartheta;
  sc.eps_abs = o.eps_abs;
  sc.eps_rel = o.eps_rel;
  sc.group_tolerance = o.group_tolerance;
  sc.pair_cutoff = o.pair_cutoff;
  sc.k0 = o.k0;
  sc.k0_max = o.k0_max;
  sc.seed = o.seed;
  sc.jobs = resolve_jobs(o.jobs, std::getenv("FUSIONCURVE_JOBS"));
  validate(sc);
  // Fail on missing side columns before any fitting.
  for (double a : sc.alpha_grid) {
    WeightConfig probe = wc;
    probe.alpha = a;
    (void)build_weights(probe, data);
  }

  std::optional<fs::path> truth_path;
  if (!o.no_truth) {
    if (!o.truth.empty()) {
      truth_path = o.truth;
    } else {
      const fs::path guess = fs::path(o.data).parent_path() / "truth.json";
      if (fs::exists(guess)) truth_path = guess;
    }
  }
  std::optional<TruthFile> truth;
  if (truth_path) truth = read_truth(*truth_path);

  const Selection sel = select(data, basis, wc, sc);
  const FitResult& best = sel.best;
  const int P = best.tuning.P;
  const auto n = data.size();

  Eigen::MatrixXd group_beta(best.k_hat, basis.dimension());
  for (std::size_t i = 0; i < n; ++i) group_beta.row(best.labels[i] - 1) = best.params.beta.row(static_cast<Eigen::Index>(i));

  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "result";
  doc["command"] = command;
  doc["created"] = utc_timestamp();
  Json input;
  input["data"] = o.data;
  input["truth"] = truth_path ? Json(truth_path->string()) : Json(nullptr);
  input["curves"] = n;
  input["observations"] = data.total_observations();
  doc["input"] = input;
  Json settings;
  settings["weights"] = to_string(wc.scheme);
  settings["adjacency"] = o.adjacency;
  settings["P_grid"] = sc.P_grid;
  settings["tau_grid"] = sc.tau_grid;
  settings["alpha_grid"] = sc.alpha_grid;
  settings["k0"] = sc.k0;
  settings["k0_max"] = sc.k0_max;
  settings["seed"] = sc.seed;
  settings["max_iter"] = sc.max_outer_iterations;
  settings["gamma"] = sc.gamma;
  settings["vartheta"] = sc.vartheta;
  settings["eps_abs"] = sc.eps_abs;
  settings["eps_rel"] = sc.eps_rel;
  settings["group_tol"] = sc.group_tolerance;
  settings["pair_cutoff"] = sc.pair_cutoff;
  doc["settings"] = settings;
  Json bj;
  bj["degree"] = basis.config().degree;
  bj["interior_knots"] = basis.config().num_interior_knots;
  bj["interval"] = {basis.config().interval.first, basis.config().interval.second};
  bj["knots"] = basis.knot_vector();
  bj["transform"] = matrix_rows(basis.transform());
  doc["basis"] = bj;
  Json selected;
  selected["P"] = P;
  selected["tau"] = best.tuning.tau;
  selected["alpha"] = best.tuning.alpha;
  selected["k0"] = best.k0;
  selected["K"] = best.k_hat;
  selected["bic"] = best.bic;
  doc["selected"] = selected;
  Json part = Json::object();
  for (std::size_t i = 0; i < n; ++i) part[data.curve(i).id] = best.labels[i];
  doc["partition"] = part;
  doc["group_beta"] = matrix_rows(group_beta);
  if (P > 0) {
    doc["theta"] = matrix_rows(best.params.theta);
    doc["lambda"] = std::vector<double>(best.params.lambda.data(), best.params.lambda.data() + P);
  }
  doc["sigma2"] = best.params.sigma2;
  doc["sigma2_conditional"] = best.sigma2_conditional;
  Json table = Json::array();
  for (const BicEntry& e : sel.table) {
    table.push_back({{"alpha", e.alpha}, {"P", e.P}, {"tau", e.tau}, {"bic", e.bic}, {"K", e.k_hat},
                     {"iterations", e.iterations}, {"converged", e.converged},
                     {"sigma2_conditional", e.sigma2_conditional}});
  }
  doc["bic_table"] = table;
  Json starts = Json::array();
  for (const StartEntry& s : sel.starts) starts.push_back({{"P", s.P}, {"k0", s.k0}, {"bic", s.bic}});
  doc["starts"] = starts;
  Json diag;
  diag["iterations"] = best.iterations;
  diag["converged"] = best.converged;
  if (!best.iterations_log.empty()) {
    const IterationRecord& last = best.iterations_log.back();
    diag["r_norm"] = last.r_norm;
    diag["s_norm"] = last.s_norm;
    diag["eps_pri"] = last.eps_pri;
    diag["eps_dual"] = last.eps_dual;
  }
  diag["objective_trace"] = best.objective_trace;
  doc["diagnostics"] = diag;

  std::vector<std::string> ids;
  for (const Curve& c : data.curves()) ids.push_back(c.id);
  if (truth) {
    const Evaluation ev = evaluate_fit(ids, best.labels, group_beta, basis, *truth);
    doc["evaluation"] = {{"ARI", ev.ari}, {"K", ev.k_hat}, {"K_true", ev.k_true}, {"RMSE", ev.rmse}};
  }

  const fs::path dir(o.out);
  write_json(dir / "result.json", doc);

  // Plot data: group means and eigenfunctions on a 200-point grid, assignments.
  std::vector<double> grid(200);
  for (int k = 0; k < 200; ++k) grid[k] = k / 199.0;
  const Eigen::MatrixXd Bg = basis.eval(grid);
  {
    std::ostringstream s;
    s << csv_header() << "group,time,value\n";
    const Eigen::MatrixXd curves = Bg * group_beta.transpose();
    for (Eigen::Index g = 0; g < curves.cols(); ++g) {
      for (int k = 0; k < 200; ++k) s << g + 1 << ',' << format_double(grid[k]) << ',' << format_double(curves(k, g)) << "\n";
    }
    write_text(dir / "group_means.csv", s.str());
  }
  if (P > 0) {
    std::ostringstream s;
    s << csv_header() << "component,time,value\n";
    const Eigen::MatrixXd psi = Bg * best.params.theta;
    for (int l = 0; l < P; ++l) {
      for (int k = 0; k < 200; ++k) s << l + 1 << ',' << format_double(grid[k]) << ',' << format_double(psi(k, l)) << "\n";
    }
    write_text(dir / "eigenfunctions.csv", s.str());
  }
  {
    std::ostringstream s;
    s << csv_header() << "id,group";
    if (data.sites()) s << ",row,col";
    if (data.index()) s << ",index";
    s << "\n";
    for (std::size_t i = 0; i < n; ++i) {
      s << ids[i] << ',' << best.labels[i];
      if (data.sites()) s << ',' << (*data.sites())[i].row << ',' << (*data.sites())[i].col;
      if (data.index()) s << ',' << format_double((*data.index())[i]);
      s << "\n";
    }
    write_text(dir / "assignments.csv", s.str());
  }

  out << command << ": K=" << best.k_hat << " P=" << P << " tau=" << format_double(best.tuning.tau)
      << " alpha=" << format_double(best.tuning.alpha) << " BIC=" << format_double(best.bic);
  if (doc.contains("evaluation")) {
    out << " ARI=" << format_double(doc["evaluation"]["ARI"].get<double>())
        << " RMSE=" << format_double(doc["evaluation"]["RMSE"].get<double>());
  }
  out << "\n";
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  if (o.results.size() != o.truths.size()) {
    throw ConfigError("give one --truth per --result (" + std::to_string(o.results.size()) + " vs " +
                      std::to_string(o.truths.size()) + ")");
  }
  struct Row {
    std::string method, weights;
    std::vector<ReplicateOutcome> outcomes;
  };
  std::vector<Row> rows;
  for (std::size_t r = 0; r < o.results.size(); ++r) {
    const Json doc = read_json(o.results[r]);
    const std::string src = o.results[r];
    const TruthFile truth = read_truth(o.truths[r]);
    try {
      check_schema_version(doc.at("schema_version").get<std::string>(), src);
      if (doc.at("kind").get<std::string>() != "result") throw DataError(src + ": not a result file");
      const Json& bj = doc.at("basis");
      const OrthoSplineBasis basis =
          build_basis({bj.at("degree").get<int>(), bj.at("interior_knots").get<int>(), {0.0, 1.0}});
      const Eigen::MatrixXd group_beta = rows_matrix(doc.at("group_beta"), src + " group_beta");
      if (group_beta.cols() != basis.dimension()) throw DataError(src + ": group_beta width differs from the basis");
      std::vector<std::string> ids;
      std::vector<int> labels;
      for (const auto& [id, label] : doc.at("partition").items()) {
        ids.push_back(id);
        labels.push_back(label.get<int>());
        if (labels.back() < 1 || labels.back() > group_beta.rows()) throw DataError(src + ": label of '" + id + "' out of range");
      }
      const Evaluation ev = evaluate_fit(ids, labels, group_beta, basis, truth);
      const auto& grid = doc.at("settings").at("P_grid");
      const bool ind = grid.size() == 1 && grid[0].get<int>() == 0;
      const std::string method = ind ? "IND" : "FDA";
      const std::string weights = doc.at("settings").at("weights").get<std::string>();
      auto it = std::find_if(rows.begin(), rows.end(), [&](const Row& x) { return x.method == method && x.weights == weights; });
      if (it == rows.end()) it = rows.insert(rows.end(), Row{method, weights, {}});
      it->outcomes.push_back({static_cast<double>(ev.k_hat), ev.ari, static_cast<double>(doc.at("selected").at("P").get<int>()), ev.rmse});
    } catch (const Json::exception& e) {
      throw DataError(src + ": not a result file (" + e.what() + ")");
    }
  }

  std::ostringstream s;
  s << csv_header() << "method,weights,replicates";
  for (const auto& c : summary_columns()) s << ',' << c;
  s << "\n";
  for (const Row& row : rows) {
    const ReplicateSummary sum = summarize_replicates(row.outcomes);
    s << row.method << ',' << row.weights << ',' << sum.replicates;
    for (double v : {sum.K_hat_mean, sum.K_hat_sd, sum.ARI_mean, sum.ARI_sd, sum.P_mean, sum.P_sd, sum.RMSE_mean}) {
      s << ',' << format_double(v);
    }
    s << "\n";
  }
  if (!o.out.empty()) write_text(o.out, s.str());
  out << s.str();
  return kExitOk;
}

void add_fit_options(CLI::App* sub, FitOptions& o, bool single_fit) {
  sub->add_option("--data", o.data, "long-format CSV: id,time,value[,row,col][,index]")->required();
  sub->add_option("--out", o.out, "output directory")->required();
  sub->add_option("--truth", o.truth, "truth JSON (default: truth.json next to the data, if present)");
  sub->add_flag("--no-truth", o.no_truth, "skip the evaluation block");
  sub->add_option("--config", o.config, "JSON file whose keys override the flags");
  sub->add_option("--weights", o.weights, "pair weights")->check(CLI::IsMember({"equal", "lattice", "index"}));
  sub->add_option("--adjacency", o.adjacency, "lattice adjacency")->check(CLI::IsMember({"rook", "queen"}));
  sub->add_option("--knots", o.knots, "interior knots (default from the data size)");
  sub->add_option("--degree", o.degree, "spline degree")->capture_default_str();
  sub->add_option("--k0", o.k0, "k-means groups for the start; 0 chooses by BIC")->capture_default_str();
  sub->add_option("--k0-max", o.k0_max, "largest k0 tried when --k0 is 0")->capture_default_str();
  sub->add_option("--seed", o.seed, "random seed")->capture_default_str();
  sub->add_option("--jobs", o.jobs, "worker threads (default: FUSIONCURVE_JOBS, then logical cores)");
  sub->add_option("--max-iter", o.max_iter, "outer iteration cap")->capture_default_str();
  sub->add_option("--gamma", o.gamma, "SCAD shape")->capture_default_str();
  sub->add_option("--vartheta", o.vartheta, "ADMM penalty parameter")->capture_default_str();
  sub->add_option("--eps-abs", o.eps_abs)->capture_default_str();
  sub->add_option("--eps-rel", o.eps_rel)->capture_default_str();
  sub->add_option("--group-tol", o.group_tolerance, "pairs with ||delta|| below this share a group")->capture_default_str();
  sub->add_option("--pair-cutoff", o.pair_cutoff, "leave pairs with smaller weight unpenalized")->capture_default_str();
  if (single_fit) {
    sub->add_option("--P", o.P, "number of principal components (0 = independent errors)")->capture_default_str();
    sub->add_option("--tau", o.tau, "fusion penalty level")->required();
    sub->add_option("--alpha", o.alpha, "weight decay")->capture_default_str();
  } else {
    sub->add_option("--P-grid", o.P_grid, "comma-separated P values")->delimiter(',');
    sub->add_option("--tau-grid", o.tau_grid, "comma-separated tau values (default: 30 log-spaced in [1e-3, 2])")
        ->delimiter(',');
    sub->add_option("--alpha-grid", o.alpha_grid, "comma-separated alpha values (default depends on --weights)")
        ->delimiter(',');
  }
}

}  // namespace

int resolve_jobs(std::optional<int> flag, const char* env) {
  if (flag) {
    if (*flag < 1) throw ConfigError("--jobs must be >= 1");
    return *flag;
  }
  if (env != nullptr && *env != '\0') {
    const std::string s(env);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) {
      throw ConfigError("FUSIONCURVE_JOBS must be a positive integer, got '" + s + "'");
    }
    return v;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

int default_interior_knots(std::size_t total_obs, int degree) {
  const auto q = static_cast<int>(std::lround(std::pow(static_cast<double>(total_obs), 0.2) + 4.0));
  return std::max(0, q - degree - 1);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clustering of longitudinal curves by penalized fusion of spline coefficients"};
  app.name("fusioncurve");
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "generate a simulation scenario");
  s->add_option("--scenario", sim.scenario, "1, 2, 3 or custom")->required()->check(CLI::IsMember({"1", "2", "3", "custom"}));
  s->add_option("--m", sim.m, "observations per curve")->capture_default_str();
  s->add_option("--sigma", sim.sigma, "measurement error sd")->capture_default_str();
  s->add_option("--lambda", sim.lambda, "score variances")->delimiter(',');
  s->add_option("--group-sizes", sim.group_sizes, "curves per group (scenario 1 and custom)")->delimiter(',');
  s->add_option("--mean-set", sim.mean_set, "custom scenario means")->check(CLI::IsMember({"distinct", "similar"}));
  s->add_option("--seed", sim.seed)->capture_default_str();
  s->add_option("--out", sim.out, "output directory")->required();

  FitOptions fit_opts;
  auto* f = app.add_subcommand("fit", "fit at one (P, tau, alpha)");
  add_fit_options(f, fit_opts, true);
  FitOptions sel_opts;
  auto* g = app.add_subcommand("select", "grid search over (alpha, P, tau) by modified BIC");
  add_fit_options(g, sel_opts, false);

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "summarize result/truth pairs");
  e->add_option("--result", ev.results, "result JSON (repeatable)")->required();
  e->add_option("--truth", ev.truths, "truth JSON, paired with --result in order (repeatable)")->required();
  e->add_option("--out", ev.out, "summary CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_simulate(sim, out);
    if (f->parsed()) return cmd_fit(fit_opts, true, "fit", out);
    if (g->parsed()) return cmd_fit(sel_opts, false, "select", out);
    return cmd_evaluate(ev, out);
  } catch (const ConfigError& x) {
    err << "error: " << x.what() << "\n";
    return kExitUsage;
  } catch (const DataError& x) {
    err << "data error: " << x.what() << "\n";
    return kExitData;
  } catch (const DomainError& x) {
    err << "data error: " << x.what() << "\n";
    return kExitData;
  } catch (const NumericError& x) {
    err << "numeric failure: " << x.what() << "\n";
    return kExitNumeric;
  } catch (const GroupingError& x) {
    err << "numeric failure: " << x.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& x) {
    err << "internal error: " << x.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace fusioncurve::cli
