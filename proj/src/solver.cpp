#include "fusioncurve/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "fusioncurve/em.hpp"
#include "fusioncurve/error.hpp"

namespace fusioncurve {

std::vector<double> default_tau_grid() {
  std::vector<double> grid(30);
  const double lo = std::log(1e-3);
  const double hi = std::log(2.0);
  for (int k = 0; k < 30; ++k) grid[k] = std::exp(lo + (hi - lo) * k / 29.0);
  return grid;
}

void validate(const SolverConfig& config) {
  if (config.tau_grid.empty() || config.P_grid.empty() || config.alpha_grid.empty()) {
    throw ConfigError("tuning grids must be nonempty");
  }
  if (config.k0 < 0 || config.k0_max < 1) throw ConfigError("k0 must be >= 0 and k0_max >= 1");
  if (config.max_outer_iterations < 1) throw ConfigError("max_outer_iterations must be >= 1");
  if (!(config.eps_abs > 0.0) || !(config.eps_rel > 0.0) || !(config.group_tolerance > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  for (int P : config.P_grid) {
    if (P < 0) throw ConfigError("P must be >= 0");
  }
  validate(PenaltyConfig{0.0, config.gamma, config.vartheta});
}

Partition extract_groups(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& delta, double tolerance) {
  const auto n = static_cast<std::size_t>(beta.rows());
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto root = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  Eigen::Index p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      if (delta.col(p).norm() <= tolerance) {
        const auto a = root(i);
        const auto b = root(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  Partition out;
  out.labels.assign(n, 0);
  std::map<std::size_t, int> label_of_root;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = root(i);
    auto [it, inserted] = label_of_root.emplace(r, static_cast<int>(label_of_root.size()) + 1);
    out.labels[i] = it->second;
  }
  const auto K = static_cast<Eigen::Index>(label_of_root.size());
  out.group_beta = Eigen::MatrixXd::Zero(K, beta.cols());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
  for (std::size_t i = 0; i < n; ++i) {
    out.group_beta.row(out.labels[i] - 1) += beta.row(static_cast<Eigen::Index>(i));
    counts(out.labels[i] - 1) += 1.0;
  }
  for (Eigen::Index k = 0; k < K; ++k) out.group_beta.row(k) /= counts(k);
  return out;
}

double conditional_sigma2(const ModelParams& params, const Design& design) {
  const int P = params.num_components();
  ConditionalMoments moments;
  if (P > 0) moments = conditional_moments(params, design);
  double rss = 0.0;
  for (std::size_t i = 0; i < design.n(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    Eigen::VectorXd r = design.Y[i] - design.B[i] * params.beta.row(ii).transpose();
    if (P > 0) r -= design.B[i] * (params.theta * moments.m.row(ii).transpose());
    rss += r.squaredNorm();
  }
  return std::max(rss / static_cast<double>(design.total_obs), kSigma2Floor);
}

double modified_bic(double sigma2_p, std::size_t n, std::size_t total_obs, int q, int k_hat, int P) {
  const double nd = static_cast<double>(n);
  const double N = static_cast<double>(total_obs);
  const double cn = std::log(std::log(nd * q));
  double bic = N * std::log(std::max(sigma2_p, kSigma2Floor)) + cn * std::log(N) * k_hat * q;
  if (P > 0) bic += 2.0 * nd * (P * q - P * (P + 1) / 2.0);
  return bic;
}

double modified_bic(const FitResult& fit, const Design& design) {
  return modified_bic(conditional_sigma2(fit.params, design), design.n(), design.total_obs, design.q(), fit.k_hat,
                      fit.params.num_components());
}

Initialization choose_initialization(const Design& design, int P, const SolverConfig& config,
                                     std::vector<StartEntry>* table) {
  const RidgeFit ridge = ridge_coefficients_gcv(design, default_ridge_grid());
  if (config.k0 > 0) return initialize(design, ridge, P, config.k0, config.seed);

  const int hi = std::min(config.k0_max, static_cast<int>(design.n()));
  std::optional<Initialization> best;
  double best_bic = 0.0;
  std::exception_ptr failure;
  for (int k0 = std::min(2, hi); k0 <= hi; ++k0) {
    Initialization init;
    try {
      init = initialize(design, ridge, P, k0, config.seed);
    } catch (const GroupingError&) {
      // k-means can leave a group too small to identify its coefficients
      if (!failure) failure = std::current_exception();
      continue;
    }
    const double bic =
        modified_bic(conditional_sigma2(init.params, design), design.n(), design.total_obs, design.q(), k0, P);
    if (table) table->push_back({P, k0, bic});
    if (!best || bic < best_bic) {
      best = std::move(init);
      best_bic = bic;
    }
  }
  if (!best) std::rethrow_exception(failure);
  return std::move(*best);
}

FitResult fit(const Design& design, const Eigen::MatrixXd& weights, int P, double tau, const SolverConfig& config,
              const ModelParams& start) {
  if (start.num_components() != P) throw ConfigError("starting parameters have the wrong number of components");
  if (weights.rows() != static_cast<Eigen::Index>(design.n())) throw ConfigError("weight matrix size differs from n");
  const PenaltyConfig penalty{tau, config.gamma, config.vartheta};
  const Tolerances tol{config.eps_abs, config.eps_rel};

  FitResult out;
  out.tuning.tau = tau;
  out.tuning.P = P;
  ModelParams params = start;
  FusionState state = make_fusion_state(params.beta, pair_weights(weights, config.pair_cutoff), penalty);
  const BetaSolver solver(design, config.vartheta);
  const auto log_step = [&](Step s) {
    if (config.record_steps) out.step_log.push_back(s);
  };

  Eigen::MatrixXd scores(static_cast<Eigen::Index>(design.n()), 0);
  for (int iter = 1; iter <= config.max_outer_iterations; ++iter) {
    if (P > 0) {
      const ConditionalMoments moments = conditional_moments(params, design);
      log_step(Step::Moments);
      params.sigma2 = update_sigma2(params, moments, design);
      log_step(Step::Sigma2);
      const Eigen::MatrixXd theta_tilde = update_theta(params, moments, design);
      log_step(Step::Theta);
      auto ortho = orthonormalize_theta_guarded(theta_tilde, params.theta, moments);
      params.theta = std::move(ortho.theta);
      params.lambda = std::move(ortho.lambda);
      log_step(Step::Orthonormalize);
      scores = moments.m;
    } else {
      params.sigma2 = update_sigma2(params, ConditionalMoments{}, design);
      log_step(Step::Sigma2);
    }

    params.beta = solver.solve(beta_rhs(design, params.theta, scores, state));
    log_step(Step::Beta);
    bool done = false;
    const ConvergenceState conv = pair_sweep(state, params.beta, tol, done);
    log_step(Step::Delta);
    log_step(Step::Duals);
    log_step(Step::Check);

    out.iterations = iter;
    out.iterations_log.push_back({conv.r_norm, conv.s_norm, conv.eps_pri, conv.eps_dual, params.sigma2});
    out.objective_trace.push_back(negative_loglikelihood_marginal(params, design));
    if (config.iteration_hook) config.iteration_hook(iter, params);
    if (!params.beta.allFinite()) throw NumericError("beta update diverged");
    if (done) {
      out.converged = true;
      break;
    }
  }

  Partition groups = extract_groups(params.beta, state.delta, config.group_tolerance);
  out.raw_beta = params.beta;
  for (std::size_t i = 0; i < design.n(); ++i) {
    params.beta.row(static_cast<Eigen::Index>(i)) = groups.group_beta.row(groups.labels[i] - 1);
  }
  out.labels = std::move(groups.labels);
  out.k_hat = groups.k();
  out.params = std::move(params);
  out.sigma2_conditional = conditional_sigma2(out.params, design);
  out.bic = modified_bic(out.sigma2_conditional, design.n(), design.total_obs, design.q(), out.k_hat, P);
  return out;
}

FitResult fit(const LongitudinalDataset& data, const OrthoSplineBasis& basis, const Eigen::MatrixXd& weights, int P,
              double tau, const SolverConfig& config) {
  validate(config);
  const Design design = make_design(data, basis);
  const Initialization init = choose_initialization(design, P, config);
  FitResult out = fit(design, weights, P, tau, config, init.params);
  out.k0 = init.k0;
  return out;
}

namespace {

bool better(const BicEntry& a, const BicEntry& b) {
  if (a.bic != b.bic) return a.bic < b.bic;
  if (a.P != b.P) return a.P < b.P;
  if (a.tau != b.tau) return a.tau < b.tau;
  return a.alpha < b.alpha;
}

template <typename Fn>
void run_parallel(std::size_t count, int jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || count <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          fn(k);
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Selection select(const LongitudinalDataset& data, const OrthoSplineBasis& basis, const WeightConfig& weights,
                 const SolverConfig& config) {
  validate(config);
  const Design design = make_design(data, basis);

  std::vector<Eigen::MatrixXd> weight_mats;
  for (double alpha : config.alpha_grid) {
    WeightConfig wc = weights;
    wc.alpha = alpha;
    weight_mats.push_back(build_weights(wc, data));
  }

  // Initialization depends on P only.
  std::vector<Initialization> inits(config.P_grid.size());
  std::vector<std::vector<StartEntry>> starts(config.P_grid.size());
  run_parallel(config.P_grid.size(), config.jobs, [&](std::size_t k) {
    inits[k] = choose_initialization(design, config.P_grid[k], config, &starts[k]);
  });

  struct Job {
    std::size_t alpha_idx, p_idx, tau_idx;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < config.alpha_grid.size(); ++a) {
    for (std::size_t p = 0; p < config.P_grid.size(); ++p) {
      for (std::size_t t = 0; t < config.tau_grid.size(); ++t) jobs.push_back({a, p, t});
    }
  }

  std::vector<FitResult> fits(jobs.size());
  run_parallel(jobs.size(), config.jobs, [&](std::size_t k) {
    const Job& j = jobs[k];
    fits[k] = fit(design, weight_mats[j.alpha_idx], config.P_grid[j.p_idx], config.tau_grid[j.tau_idx], config,
                  inits[j.p_idx].params);
    fits[k].tuning.alpha = config.alpha_grid[j.alpha_idx];
    fits[k].k0 = inits[j.p_idx].k0;
  });

  Selection out;
  for (auto& s : starts) out.starts.insert(out.starts.end(), s.begin(), s.end());
  out.table.reserve(fits.size());
  std::size_t best = 0;
  for (std::size_t k = 0; k < fits.size(); ++k) {
    const FitResult& f = fits[k];
    out.table.push_back({f.tuning.alpha, f.tuning.P, f.tuning.tau, f.bic, f.k_hat, f.iterations, f.converged,
                         f.sigma2_conditional});
    if (k > 0 && better(out.table[k], out.table[best])) best = k;
  }
  out.best = std::move(fits[best]);
  return out;
}

}  // namespace fusioncurve
