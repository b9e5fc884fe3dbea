#pragma once

// Experiment runner: resolves "auto" hyperparameters (analytic spectrum for
// quadratics, otherwise a short gradient-descent pilot followed by the
// Hessian spectrum at the located minimizer), executes the configured
// method, fits the asymptotic rate of the distance-to-final series, and
// compares it against the closed-form rate at the limit point. The f-gap
// series is fitted as well and reported as a cross-check (its exponent is
// twice the distance one).

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hblab/config.hpp"
#include "hblab/csv.hpp"
#include "hblab/dynamics.hpp"
#include "hblab/estimator.hpp"
#include "hblab/geometry.hpp"
#include "hblab/objectives.hpp"
#include "hblab/rates.hpp"

namespace hblab {

struct RunReport {
  std::string objective;
  std::size_t dim = 0;
  Method method = Method::hb_discrete;
  std::optional<double> gamma, beta, alpha;  // resolved; unused ones stay empty
  double mu_eff = std::numeric_limits<double>::quiet_NaN();
  double L_eff = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  double f_tol = 0.0;
  std::size_t max_iters = 0;
  std::size_t n_recorded = 0;
  StopReason stop = StopReason::max_iters;
  double final_f_gap = std::numeric_limits<double>::quiet_NaN();
  double final_grad_norm = std::numeric_limits<double>::quiet_NaN();
  double theory_rate = std::numeric_limits<double>::quiet_NaN();
  std::optional<RateEstimate> dist_fit, fgap_fit;
  std::string verdict = "no_fit";  // pass | fail | divergent | no_fit | error:...
  int exit_code = 1;               // 0 pass, 1 fail/no_fit, 2 divergent
};

struct ExperimentResult {
  RunReport report;
  std::optional<Trajectory> traj;
  std::optional<FlowTrajectory> flow;
};

namespace detail {

/// Effective (mu, L) for the run: quadratic spectra are analytic; otherwise a
/// 500-step gradient-descent pilot locates an approximate minimizer and the
/// Hessian spectrum there supplies the extreme nonzero eigenvalues.
inline NormalSpectrum resolve_spectrum(const Objective& obj, const Vec& x0) {
  if (obj.spec().kind == ObjectiveKind::quadratic)
    return {obj.spec().eigenvalues, 0};
  double radius = norm(sub(x0, obj.project_to_min_set(x0))) + 1.0;
  double gamma_pilot = 1.0 / obj.smoothness_bound(radius);
  Vec x = x0;
  for (int i = 0; i < 500; ++i) x = hb_step(obj, x, x, {gamma_pilot, 0.0});
  return hessian_normal_spectrum(obj, x);  // throws if the pilot stalled
}

inline double theory_for(Method method, double gamma, double beta, double alpha, double mu,
                         double L) {
  try {
    switch (method) {
      case Method::hb_discrete: return m_discrete(gamma, beta, mu, L);
      case Method::gd: return m_discrete(gamma, 0.0, mu, L);
      case Method::hb_ode: return m_continuous(alpha, mu);
    }
  } catch (const std::invalid_argument&) {
    // outside the stability range: no finite theory rate
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  Objective obj = make_objective(cfg.objective);
  if (cfg.x0.size() != obj.dim()) throw ConfigError(0, "x0 dimension does not match objective");

  ExperimentResult res;
  RunReport& rep = res.report;
  rep.objective = to_string(cfg.objective.kind);
  rep.dim = obj.dim();
  rep.method = cfg.method;
  rep.seed = cfg.seed;
  rep.f_tol = cfg.stopping.f_tol;
  rep.max_iters = cfg.stopping.max_iters;

  // resolve hyperparameters
  std::optional<NormalSpectrum> spectrum;
  try {
    spectrum = detail::resolve_spectrum(obj, cfg.x0);
    rep.mu_eff = spectrum->nonzero_eigs.front();
    rep.L_eff = spectrum->nonzero_eigs.back();
  } catch (const std::exception& e) {
    if (cfg.auto_params)
      throw ConfigError(0, std::string("auto hyperparameters: ") + e.what());
  }

  double gamma = 0.0, beta = 0.0, alpha = 0.0;
  if (cfg.method == Method::hb_ode) {
    alpha = cfg.auto_params ? optimal_alpha(rep.mu_eff) : *cfg.alpha;
    rep.alpha = alpha;
  } else if (cfg.method == Method::gd) {
    gamma = cfg.auto_params ? 2.0 / (rep.L_eff + rep.mu_eff) : *cfg.gamma;
    rep.gamma = gamma;
    rep.beta = 0.0;
  } else {
    if (cfg.auto_params) {
      HyperParams p = optimal_hyperparams(rep.mu_eff, rep.L_eff);
      gamma = p.gamma;
      beta = p.beta;
    } else {
      gamma = *cfg.gamma;
      beta = *cfg.beta;
    }
    rep.gamma = gamma;
    rep.beta = beta;
  }

  // execute
  Vec dist, fgaps;
  double grid_step = 1.0;
  GridKind grid = GridKind::per_iteration;
  const Vec* final_x = nullptr;
  if (cfg.method == Method::hb_ode) {
    double T;
    if (cfg.ode_T)
      T = *cfg.ode_T;
    else if (std::isfinite(rep.mu_eff))
      T = 40.0 / m_continuous(alpha, rep.mu_eff);
    else
      throw ConfigError(0, "hb_ode requires T when no (mu, L) is resolvable");
    Vec v0 = cfg.v0 ? *cfg.v0 : Vec(obj.dim(), 0.0);
    res.flow = integrate_ode(obj, cfg.x0, v0, alpha, cfg.ode_h, T);
    rep.stop = res.flow->diverged ? StopReason::divergence : StopReason::max_iters;
    rep.n_recorded = res.flow->times.size();
    if (!res.flow->xs.empty()) {
      dist = res.flow->dist_to_final();
      fgaps = res.flow->f_gaps;
      rep.final_f_gap = fgaps.back();
      rep.final_grad_norm = res.flow->grad_norms.back();
      final_x = &res.flow->xs.back();
    }
    grid = GridKind::per_unit_time;
    grid_step = cfg.ode_h;
  } else {
    Vec x1 = cfg.x1 ? *cfg.x1 : cfg.x0;
    res.traj = run_discrete(obj, cfg.x0, x1, {gamma, beta}, cfg.stopping);
    rep.stop = res.traj->stop_reason;
    rep.n_recorded = res.traj->iterates.size();
    if (!res.traj->iterates.empty()) {
      dist = res.traj->dist_to_final();
      fgaps = res.traj->f_gaps;
      rep.final_f_gap = fgaps.back();
      rep.final_grad_norm = res.traj->grad_norms.back();
      final_x = &res.traj->iterates.back();
    }
  }

  if (rep.stop == StopReason::divergence) {
    rep.verdict = "divergent";
    rep.exit_code = 2;
    return res;
  }

  // theory rate from the limit point's spectrum (falls back to the resolved
  // spectrum when the final iterate is not close enough to the minimizer set)
  double mu_loc = rep.mu_eff, L_loc = rep.L_eff;
  if (final_x) {
    try {
      NormalSpectrum ns = hessian_normal_spectrum(obj, *final_x);
      if (!ns.nonzero_eigs.empty()) {
        mu_loc = ns.nonzero_eigs.front();
        L_loc = ns.nonzero_eigs.back();
      }
    } catch (const std::invalid_argument&) {
    }
  }
  rep.theory_rate = detail::theory_for(cfg.method, gamma, beta, alpha, mu_loc, L_loc);

  const EstimatorOptions& eo = cfg.estimator;
  try {
    rep.dist_fit = estimate_rate(dist, grid, grid_step, eo.allow_prefactor, {}, eo.window_lo,
                                 eo.window_hi);
  } catch (const std::exception&) {
  }
  try {
    rep.fgap_fit = estimate_rate(fgaps, grid, grid_step, eo.allow_prefactor, {}, eo.window_lo,
                                 eo.window_hi);
  } catch (const std::exception&) {
  }

  if (rep.dist_fit && std::isfinite(rep.theory_rate)) {
    Verdict v = compare_to_theory(*rep.dist_fit, rep.theory_rate, eo.eps);
    rep.verdict = v.pass ? "pass" : "fail";
    rep.exit_code = v.pass ? 0 : 1;
  } else {
    rep.verdict = "no_fit";
    rep.exit_code = 1;
  }
  return res;
}

/// One run per grid point, executed by up to `parallelism` workers; row order
/// and all values are independent of the worker count.
inline std::vector<ExperimentResult> run_sweep(const SweepSpec& sweep) {
  struct Point {
    std::optional<double> gamma, beta, alpha;
  };
  std::vector<Point> points;
  if (sweep.base.method == Method::hb_ode) {
    for (double a : sweep.alphas) points.push_back({{}, {}, a});
  } else {
    Vec gammas = sweep.gammas, betas = sweep.betas;
    if (gammas.empty() && sweep.base.gamma) gammas = {*sweep.base.gamma};
    if (betas.empty()) betas = sweep.base.beta ? Vec{*sweep.base.beta} : Vec{0.0};
    if (gammas.empty()) throw ConfigError(0, "sweep: no gamma grid and no base gamma");
    for (double g : gammas)
      for (double b : betas) points.push_back({g, b, {}});
  }
  if (points.empty()) throw ConfigError(0, "sweep: empty grid");

  std::vector<ExperimentResult> results(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      ExperimentConfig cfg = sweep.base;
      cfg.auto_params = false;
      cfg.gamma = points[i].gamma;
      cfg.beta = points[i].beta;
      cfg.alpha = points[i].alpha;
      try {
        results[i] = run_experiment(cfg);
      } catch (const std::exception& e) {
        results[i].report.objective = to_string(cfg.objective.kind);
        results[i].report.method = cfg.method;
        results[i].report.gamma = cfg.gamma;
        results[i].report.beta = cfg.beta;
        results[i].report.alpha = cfg.alpha;
        results[i].report.verdict = std::string("error: ") + e.what();
        results[i].report.exit_code = 1;
      }
    }
  };
  std::size_t workers = std::min<std::size_t>(std::max<std::size_t>(sweep.parallelism, 1), points.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

// ---------------------------------------------------------------------------
// report emission

inline std::string opt17(const std::optional<double>& v) { return v ? fmt17(*v) : ""; }
inline std::string nan17(double v) { return std::isfinite(v) ? fmt17(v) : ""; }

inline const std::vector<std::string>& report_header() {
  static const std::vector<std::string> h = {
      "objective",      "dim",        "method",          "gamma",
      "beta",           "alpha",      "mu_eff",          "L_eff",
      "seed",           "f_tol",      "max_iters",       "n_recorded",
      "stop_reason",    "final_f_gap", "final_grad_norm", "theory_rate",
      "fitted_rate",    "prefactor_degree", "r_squared", "window_lo",
      "window_hi",      "fgap_fitted_rate", "fgap_prefactor_degree", "fgap_r_squared",
      "verdict"};
  return h;
}

inline std::vector<std::string> report_row(const RunReport& r) {
  std::vector<std::string> row;
  row.push_back(r.objective);
  row.push_back(std::to_string(r.dim));
  row.push_back(to_string(r.method));
  row.push_back(opt17(r.gamma));
  row.push_back(opt17(r.beta));
  row.push_back(opt17(r.alpha));
  row.push_back(nan17(r.mu_eff));
  row.push_back(nan17(r.L_eff));
  row.push_back(std::to_string(r.seed));
  row.push_back(fmt17(r.f_tol));
  row.push_back(std::to_string(r.max_iters));
  row.push_back(std::to_string(r.n_recorded));
  row.push_back(to_string(r.stop));
  row.push_back(nan17(r.final_f_gap));
  row.push_back(nan17(r.final_grad_norm));
  row.push_back(nan17(r.theory_rate));
  if (r.dist_fit) {
    row.push_back(fmt17(r.dist_fit->rate));
    row.push_back(std::to_string(r.dist_fit->prefactor_degree));
    row.push_back(fmt17(r.dist_fit->r_squared));
    row.push_back(std::to_string(r.dist_fit->window.lo));
    row.push_back(std::to_string(r.dist_fit->window.hi));
  } else {
    row.insert(row.end(), 5, "");
  }
  if (r.fgap_fit) {
    row.push_back(fmt17(r.fgap_fit->rate));
    row.push_back(std::to_string(r.fgap_fit->prefactor_degree));
    row.push_back(fmt17(r.fgap_fit->r_squared));
  } else {
    row.insert(row.end(), 3, "");
  }
  row.push_back(r.verdict);
  return row;
}

inline void write_report_csv(const std::string& path, const std::vector<RunReport>& reports) {
  CsvWriter w(path);
  w.row(report_header());
  for (const auto& r : reports) w.row(report_row(r));
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  CsvWriter w(path);
  w.row({"n", "f_gap", "grad_norm", "dist_to_final"});
  Vec dist = traj.dist_to_final();
  for (std::size_t n = 0; n < traj.f_gaps.size(); ++n)
    w.row({std::to_string(n), fmt17(traj.f_gaps[n]), fmt17(traj.grad_norms[n]), fmt17(dist[n])});
}

inline void write_flow_csv(const std::string& path, const FlowTrajectory& flow) {
  CsvWriter w(path);
  w.row({"t", "f_gap", "grad_norm", "energy", "dist_to_final"});
  Vec dist = flow.dist_to_final();
  for (std::size_t k = 0; k < flow.times.size(); ++k)
    w.row({fmt17(flow.times[k]), fmt17(flow.f_gaps[k]), fmt17(flow.grad_norms[k]),
           fmt17(flow.energy[k]), fmt17(dist[k])});
}

inline std::string summary_text(const RunReport& r) {
  std::ostringstream os;
  os << "objective:        " << r.objective << " (dim " << r.dim << ")\n";
  os << "method:           " << to_string(r.method) << "\n";
  if (r.gamma) os << "gamma:            " << fmt17(*r.gamma) << "\n";
  if (r.beta) os << "beta:             " << fmt17(*r.beta) << "\n";
  if (r.alpha) os << "alpha:            " << fmt17(*r.alpha) << "\n";
  os << "mu_eff / L_eff:   " << nan17(r.mu_eff) << " / " << nan17(r.L_eff) << "\n";
  os << "seed:             " << r.seed << "\n";
  os << "recorded points:  " << r.n_recorded << " (stop: " << to_string(r.stop) << ")\n";
  os << "final f-gap:      " << nan17(r.final_f_gap) << "\n";
  os << "final |grad|:     " << nan17(r.final_grad_norm) << "\n";
  os << "theory rate:      " << nan17(r.theory_rate) << "\n";
  if (r.dist_fit)
    os << "fitted rate:      " << fmt17(r.dist_fit->rate) << "  (prefactor degree "
       << r.dist_fit->prefactor_degree << ", r^2 " << fmt17(r.dist_fit->r_squared) << ", window ["
       << r.dist_fit->window.lo << ", " << r.dist_fit->window.hi << "])\n";
  else
    os << "fitted rate:      (no fit)\n";
  if (r.fgap_fit)
    os << "f-gap rate:       " << fmt17(r.fgap_fit->rate) << "  (prefactor degree "
       << r.fgap_fit->prefactor_degree << ", r^2 " << fmt17(r.fgap_fit->r_squared) << ")\n";
  os << "verdict:          " << r.verdict << "\n";
  return os.str();
}

/// Write trajectory + report + summary for a single run.
inline void write_run_outputs(const ExperimentResult& res, const std::string& dir) {
  std::filesystem::create_directories(dir);
  if (res.traj) write_trajectory_csv(dir + "/trajectory.csv", *res.traj);
  if (res.flow) write_flow_csv(dir + "/trajectory.csv", *res.flow);
  write_report_csv(dir + "/report.csv", {res.report});
  std::ofstream sum(dir + "/summary.txt", std::ios::binary);
  sum << summary_text(res.report);
}

inline void write_sweep_outputs(const std::vector<ExperimentResult>& results,
                                const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<RunReport> reports;
  reports.reserve(results.size());
  for (const auto& r : results) reports.push_back(r.report);
  write_report_csv(dir + "/sweep_report.csv", reports);
}

// ---------------------------------------------------------------------------
// rates table

/// Closed-form rate table for (mu, L) pairs: optimally tuned continuous and
/// discrete heavy ball next to the gradient-descent comparison rate.
inline std::string rates_table(const Vec& mus, const Vec& Ls, bool csv) {
  if (mus.size() != Ls.size() || mus.empty())
    throw std::invalid_argument("rates_table: need matching non-empty mu and L lists");
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"mu", "L", "kappa", "alpha_star", "m_cont", "gamma_star", "beta_star", "m_disc",
                  "gd_rate"});
  for (std::size_t i = 0; i < mus.size(); ++i) {
    double mu = mus[i], L = Ls[i];
    double kappa = L / mu;
    double astar = optimal_alpha(mu);
    HyperParams p = optimal_hyperparams(mu, L);
    rows.push_back({fmt17(mu), fmt17(L), fmt17(kappa), fmt17(astar),
                    fmt17(m_continuous(astar, mu)), fmt17(p.gamma), fmt17(p.beta),
                    fmt17(m_discrete(p.gamma, p.beta, mu, L)), fmt17(gd_rate(kappa))});
  }
  std::ostringstream os;
  if (csv) {
    for (const auto& row : rows) os << csv_join(row) << "\n";
    return os.str();
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& row : rows)
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) os << "  ";
      os << row[j] << std::string(width[j] - row[j].size(), ' ');
    }
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// geometry probe driver

inline Vec default_probe_center(const ObjectiveSpec& spec) {
  switch (spec.kind) {
    case ObjectiveKind::quadratic: return Vec(spec.dim, 0.0);
    case ObjectiveKind::circle: {
      Vec c(spec.dim, 0.0);
      c[0] = 1.0;
      return c;
    }
    case ObjectiveKind::sine_valley: return {1.0, 0.0, 1.5707963267948966};
  }
  return {};
}

inline std::vector<GeometryReport> run_probe(const ProbeSpec& probe) {
  Objective obj = make_objective(probe.base.objective);
  Vec anchor = probe.center ? *probe.center : default_probe_center(probe.base.objective);
  std::vector<GeometryReport> reports;
  for (double r : probe.radii) {
    Region region = probe.kind == Region::Kind::ball
                        ? Region::ball(anchor, r)
                        : Region::annulus(Vec(obj.dim(), 0.0), probe.base_radius - r,
                                          probe.base_radius + r);
    reports.push_back(probe_region(obj, region, probe.samples, probe.base.seed, anchor));
  }
  return reports;
}

inline void write_probe_csv(const std::string& path, const std::string& objective,
                            std::uint64_t seed, const std::vector<GeometryReport>& reports) {
  CsvWriter w(path);
  w.row({"objective", "region", "n_samples", "seed", "pl", "qg", "eb", "qsc", "min_nonzero_eig",
         "max_nonzero_eig", "kernel_dim"});
  for (const auto& r : reports) {
    w.row({objective, r.region.to_string(), std::to_string(r.samples), std::to_string(seed),
           fmt17(r.pl), fmt17(r.qg), fmt17(r.eb), fmt17(r.qsc),
           r.hess_nonzero_eigs.empty() ? "" : fmt17(r.hess_nonzero_eigs.front()),
           r.hess_nonzero_eigs.empty() ? "" : fmt17(r.hess_nonzero_eigs.back()),
           std::to_string(r.kernel_dim)});
  }
}

}  // namespace hblab
