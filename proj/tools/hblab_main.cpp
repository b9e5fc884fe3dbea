// hblab command line: closed-form rate tables, single runs and sweeps of the
// heavy ball dynamics, spectral cross-validation, and geometry probes.
// Exit codes: 0 pass, 1 verdict fail, 2 divergent, 3 config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hblab/config.hpp"
#include "hblab/experiment.hpp"
#include "hblab/rates.hpp"
#include "hblab/rng.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hblab::ConfigError(0, "cannot open config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string output_dir(const std::string& flag_dir, const std::string& cfg_dir) {
  if (!flag_dir.empty()) return flag_dir;
  if (!cfg_dir.empty()) return cfg_dir;
  if (const char* env = std::getenv("HBLAB_OUT")) return env;
  return "out";
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string format;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t parallelism = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* c = cmd->add_option("--config", flags.config_path, "experiment config file");
  if (config_required) c->required();
  cmd->add_option("--out", flags.out_dir, "output directory (default: config, $HBLAB_OUT, ./out)");
  cmd->add_option("--format", flags.format, "csv or txt")->check(CLI::IsMember({"csv", "txt"}));
  cmd->add_option("--seed", flags.seed, "override the config seed")->each([&](const std::string&) {
    flags.seed_set = true;
  });
  cmd->add_option("--parallelism", flags.parallelism, "worker count for sweeps");
}

void apply_overrides(hblab::ExperimentConfig& cfg, const CommonFlags& flags) {
  if (flags.seed_set) cfg.seed = flags.seed;
  if (!flags.format.empty()) cfg.format = flags.format;
  cfg.out_dir = output_dir(flags.out_dir, cfg.out_dir);
}

int run_single(const CommonFlags& flags, bool force_ode) {
  hblab::ExperimentConfig cfg = hblab::parse_config(read_file(flags.config_path));
  if (force_ode) cfg.method = hblab::Method::hb_ode;
  apply_overrides(cfg, flags);
  hblab::ExperimentResult res = hblab::run_experiment(cfg);
  hblab::write_run_outputs(res, cfg.out_dir);
  std::cout << hblab::summary_text(res.report);
  return res.report.exit_code;
}

int run_sweep_cmd(const CommonFlags& flags) {
  hblab::SweepSpec sweep = hblab::parse_sweep(read_file(flags.config_path));
  apply_overrides(sweep.base, flags);
  if (flags.parallelism > 0) sweep.parallelism = flags.parallelism;
  auto results = hblab::run_sweep(sweep);
  hblab::write_sweep_outputs(results, sweep.base.out_dir);
  int exit_code = 0;
  for (const auto& r : results) {
    std::cout << hblab::to_string(r.report.method) << " gamma=" << hblab::opt17(r.report.gamma)
              << " beta=" << hblab::opt17(r.report.beta) << " alpha=" << hblab::opt17(r.report.alpha)
              << " fitted=" << (r.report.dist_fit ? hblab::fmt17(r.report.dist_fit->rate) : "-")
              << " theory=" << hblab::nan17(r.report.theory_rate) << " verdict=" << r.report.verdict
              << "\n";
    exit_code = std::max(exit_code, r.report.exit_code == 2 ? 0 : r.report.exit_code);
  }
  std::cout << "report: " << sweep.base.out_dir << "/sweep_report.csv\n";
  return exit_code;
}

int run_probe_cmd(const CommonFlags& flags) {
  hblab::ProbeSpec probe = hblab::parse_probe(read_file(flags.config_path));
  apply_overrides(probe.base, flags);
  auto reports = hblab::run_probe(probe);
  std::filesystem::create_directories(probe.base.out_dir);
  std::string path = probe.base.out_dir + "/probe.csv";
  hblab::write_probe_csv(path, hblab::to_string(probe.base.objective.kind), probe.base.seed,
                         reports);
  for (const auto& r : reports)
    std::cout << r.region.to_string() << ": pl=" << hblab::fmt17(r.pl) << " qg=" << hblab::fmt17(r.qg)
              << " eb=" << hblab::fmt17(r.eb) << " qsc=" << hblab::fmt17(r.qsc)
              << " kernel_dim=" << r.kernel_dim << "\n";
  std::cout << "report: " << path << "\n";
  return 0;
}

int run_compare_cmd(const CommonFlags& flags, double margin) {
  hblab::ExperimentConfig cfg = hblab::parse_config(read_file(flags.config_path));
  apply_overrides(cfg, flags);

  hblab::ExperimentConfig hb = cfg;
  hb.method = hblab::Method::hb_discrete;
  hb.auto_params = true;
  hblab::ExperimentResult hb_res = hblab::run_experiment(hb);

  hblab::ExperimentConfig gd = cfg;
  gd.method = hblab::Method::gd;
  gd.auto_params = true;
  hblab::ExperimentResult gd_res = hblab::run_experiment(gd);

  std::filesystem::create_directories(cfg.out_dir);
  hblab::write_report_csv(cfg.out_dir + "/compare_report.csv", {hb_res.report, gd_res.report});

  std::cout << "heavy ball: " << (hb_res.report.dist_fit ? hblab::fmt17(hb_res.report.dist_fit->rate)
                                                         : std::string("(no fit)"))
            << " (theory " << hblab::nan17(hb_res.report.theory_rate) << ")\n";
  std::cout << "gd:         " << (gd_res.report.dist_fit ? hblab::fmt17(gd_res.report.dist_fit->rate)
                                                         : std::string("(no fit)"))
            << " (theory " << hblab::nan17(gd_res.report.theory_rate) << ")\n";
  if (!hb_res.report.dist_fit || !gd_res.report.dist_fit) {
    std::cout << "accelerates: undetermined\n";
    return 1;
  }
  bool accel = hb_res.report.dist_fit->rate < gd_res.report.dist_fit->rate - margin;
  std::cout << "accelerates by margin " << margin << ": " << (accel ? "yes" : "no") << "\n";
  return accel ? 0 : 1;
}

int run_spectral_cmd(const std::string& kind, const std::vector<double>& eigs, std::size_t d_t,
                     double gamma, double beta, double alpha, std::uint64_t rotation_seed,
                     bool rotate, const std::string& out_dir_flag) {
  hblab::Mat h;
  if (rotate) {
    hblab::Mat q = hblab::orthogonal_from_seed(eigs.size(), rotation_seed);
    h = hblab::symmetric_sandwich(q, eigs);
  } else {
    h = hblab::Mat(eigs.size(), eigs.size());
    for (std::size_t i = 0; i < eigs.size(); ++i) h(i, i) = eigs[i];
  }
  hblab::SpectralReport rep = kind == "discrete"
                                  ? hblab::spectral_report_discrete(h, d_t, gamma, beta)
                                  : hblab::spectral_report_continuous(h, d_t, alpha);
  const char* label = kind == "discrete" ? "rho" : "abscissa";
  std::cout << label << "=" << hblab::fmt17(rep.rho)
            << " theory=" << hblab::fmt17(rep.theory_rate)
            << " discrepancy=" << hblab::fmt17(rep.max_abs_discrepancy) << "\neigenvalues:";
  for (const auto& l : rep.eigenvalues)
    std::cout << " " << hblab::fmt17(l.real()) << (std::signbit(l.imag()) ? "-" : "+")
              << hblab::fmt17(std::abs(l.imag())) << "i";
  std::cout << "\n";
  std::string dir = output_dir(out_dir_flag, "");
  std::filesystem::create_directories(dir);
  hblab::CsvWriter w(dir + "/spectral.csv");
  w.row({"kind", "size", "d_t", "gamma", "beta", "alpha", label, "theory", "max_abs_discrepancy"});
  w.row({kind, std::to_string(h.rows()), std::to_string(d_t),
         kind == "discrete" ? hblab::fmt17(gamma) : "", kind == "discrete" ? hblab::fmt17(beta) : "",
         kind == "continuous" ? hblab::fmt17(alpha) : "", hblab::fmt17(rep.rho),
         hblab::fmt17(rep.theory_rate), hblab::fmt17(rep.max_abs_discrepancy)});
  return rep.max_abs_discrepancy < 1e-9 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heavy ball convergence laboratory"};
  app.require_subcommand(1);

  // rates
  auto* rates = app.add_subcommand("rates", "closed-form rate table for (mu, L) pairs");
  std::vector<double> mus, Ls;
  std::string rates_format = "txt";
  std::string rates_out;
  rates->add_option("--mu", mus, "PL constants (comma separated)")->required()->delimiter(',');
  rates->add_option("--L", Ls, "smoothness constants (comma separated)")->required()->delimiter(',');
  rates->add_option("--format", rates_format, "csv or txt")->check(CLI::IsMember({"csv", "txt"}));
  rates->add_option("--out", rates_out, "also write rates.csv to this directory");

  CommonFlags run_flags, ode_flags, sweep_flags, probe_flags, compare_flags;
  auto* run = app.add_subcommand("run", "execute one experiment from a config");
  add_common(run, run_flags, true);
  auto* ode = app.add_subcommand("ode", "execute a config with the heavy ball ODE");
  add_common(ode, ode_flags, true);
  auto* sweep = app.add_subcommand("sweep", "run the [sweep] grid of a config");
  add_common(sweep, sweep_flags, true);
  auto* probe = app.add_subcommand("probe", "geometry probes from the [probe] section");
  add_common(probe, probe_flags, true);
  auto* compare = app.add_subcommand("compare", "heavy ball vs gradient descent on one config");
  add_common(compare, compare_flags, true);
  double margin = 0.2;
  compare->add_option("--margin", margin, "required rate gap for the acceleration verdict");

  auto* spectral = app.add_subcommand("spectral", "system-matrix spectrum vs closed form");
  std::string sp_kind = "discrete";
  std::vector<double> sp_eigs{1.0, 9.0};
  std::size_t sp_dt = 0;
  double sp_gamma = 0.25, sp_beta = 0.25, sp_alpha = 2.0;
  std::uint64_t sp_seed = 0;
  bool sp_rotate = false;
  std::string sp_out;
  spectral->add_option("--kind", sp_kind, "discrete or continuous")
      ->check(CLI::IsMember({"discrete", "continuous"}));
  spectral->add_option("--eigs", sp_eigs, "spectrum of H")->delimiter(',');
  spectral->add_option("--d-t", sp_dt, "tangential dimension");
  spectral->add_option("--gamma", sp_gamma, "step size (discrete)");
  spectral->add_option("--beta", sp_beta, "momentum (discrete)");
  spectral->add_option("--alpha", sp_alpha, "friction (continuous)");
  spectral->add_flag("--rotate", sp_rotate, "conjugate H by a random rotation");
  spectral->add_option("--rotation-seed", sp_seed, "seed for --rotate");
  spectral->add_option("--out", sp_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (rates->parsed()) {
      if (mus.size() != Ls.size()) {
        std::cerr << "error: --mu and --L must have the same length\n";
        return 3;
      }
      std::string table = hblab::rates_table(mus, Ls, rates_format == "csv");
      std::cout << table;
      if (!rates_out.empty()) {
        std::filesystem::create_directories(rates_out);
        std::ofstream f(rates_out + "/rates.csv", std::ios::binary);
        f << hblab::rates_table(mus, Ls, true);
      }
      return 0;
    }
    if (run->parsed()) return run_single(run_flags, false);
    if (ode->parsed()) return run_single(ode_flags, true);
    if (sweep->parsed()) return run_sweep_cmd(sweep_flags);
    if (probe->parsed()) return run_probe_cmd(probe_flags);
    if (compare->parsed()) return run_compare_cmd(compare_flags, margin);
    if (spectral->parsed())
      return run_spectral_cmd(sp_kind, sp_eigs, sp_dt, sp_gamma, sp_beta, sp_alpha, sp_seed,
                              sp_rotate, sp_out);
  } catch (const hblab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 3;
}
