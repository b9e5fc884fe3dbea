#pragma once

// Experiment configuration: flat [section] headers with key = value lines,
// '#' comments, decimal or scientific numbers, comma-separated lists. Parse
// errors carry the offending line number.

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hblab/dynamics.hpp"
#include "hblab/estimator.hpp"
#include "hblab/geometry.hpp"
#include "hblab/objectives.hpp"

namespace hblab {

struct ConfigError : std::runtime_error {
  int line;
  ConfigError(int line_, const std::string& msg)
      : std::runtime_error("config line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

enum class Method { hb_discrete, gd, hb_ode };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::hb_discrete: return "hb_discrete";
    case Method::gd: return "gd";
    case Method::hb_ode: return "hb_ode";
  }
  return "?";
}

struct EstimatorOptions {
  double window_lo = 1e-11;
  double window_hi = 1e-4;
  bool allow_prefactor = true;
  double eps = 0.02;  // tolerance used by the pass/fail verdict
};

struct ExperimentConfig {
  ObjectiveSpec objective;
  Method method = Method::hb_discrete;
  bool auto_params = true;
  std::optional<double> gamma, beta, alpha;
  Vec x0;
  std::optional<Vec> x1;  // defaults to x0
  std::optional<Vec> v0;  // defaults to 0
  Stopping stopping;
  double ode_h = 1e-3;
  std::optional<double> ode_T;  // default 40 / m(alpha, mu)
  EstimatorOptions estimator;
  std::string out_dir;
  std::string format = "csv";
  std::uint64_t seed = 0;
};

struct SweepSpec {
  ExperimentConfig base;
  Vec gammas, betas, alphas;
  std::size_t parallelism = 1;
};

struct ProbeSpec {
  ExperimentConfig base;
  Region::Kind kind = Region::Kind::ball;
  std::optional<Vec> center;  // defaults to a known minimizer of the objective
  Vec radii;                  // ball radii, or annulus half-widths about base_radius
  double base_radius = 1.0;
  std::size_t samples = 100000;
};

namespace detail {

struct Entry {
  std::string value;
  int line;
};
using Sections = std::map<std::string, std::map<std::string, Entry>>;

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline Sections tokenize(const std::string& text) {
  Sections out;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    std::size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError(line, "empty section name");
      out[section];
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
    if (section.empty()) throw ConfigError(line, "key outside of any [section]");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "empty key");
    if (out[section].count(key)) throw ConfigError(line, "duplicate key '" + key + "'");
    out[section][key] = {value, line};
  }
  return out;
}

inline double parse_number(const Entry& e) {
  const char* begin = e.value.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ConfigError(e.line, "invalid number '" + e.value + "'");
  return v;
}

inline std::uint64_t parse_u64(const Entry& e) {
  try {
    std::size_t pos = 0;
    unsigned long long v = std::stoull(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError(e.line, "invalid unsigned integer '" + e.value + "'");
  }
}

inline bool parse_bool(const Entry& e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ConfigError(e.line, "invalid boolean '" + e.value + "' (use true/false)");
}

inline Vec parse_list(const Entry& e) {
  Vec out;
  std::istringstream in(e.value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(e.line, "empty list element");
    out.push_back(parse_number({item, e.line}));
  }
  if (out.empty()) throw ConfigError(e.line, "empty list");
  return out;
}

/// Pull a key out of a section, enforcing the allowed-key set on exit.
class SectionReader {
 public:
  SectionReader(const Sections& all, const std::string& name) : name_(name) {
    auto it = all.find(name);
    if (it != all.end()) entries_ = &it->second;
  }
  bool present() const { return entries_ != nullptr; }
  const Entry* find(const std::string& key) {
    seen_.push_back(key);
    if (!entries_) return nullptr;
    auto it = entries_->find(key);
    return it == entries_->end() ? nullptr : &it->second;
  }
  void finish() const {
    if (!entries_) return;
    for (const auto& [key, entry] : *entries_) {
      bool known = false;
      for (const auto& s : seen_)
        if (s == key) known = true;
      if (!known) throw ConfigError(entry.line, "unknown key '" + key + "' in [" + name_ + "]");
    }
  }

 private:
  std::string name_;
  const std::map<std::string, Entry>* entries_ = nullptr;
  std::vector<std::string> seen_;
};

inline ObjectiveSpec read_objective(const Sections& sections) {
  SectionReader sec(sections, "objective");
  if (!sec.present()) throw ConfigError(0, "missing [objective] section");
  const Entry* kind = sec.find("kind");
  if (!kind) throw ConfigError(0, "missing objective.kind");
  ObjectiveSpec spec;
  if (kind->value == "quadratic") {
    spec.kind = ObjectiveKind::quadratic;
    const Entry* eigs = sec.find("eigenvalues");
    if (!eigs) throw ConfigError(kind->line, "quadratic objective requires 'eigenvalues'");
    spec.eigenvalues = parse_list(*eigs);
    spec.dim = spec.eigenvalues.size();
    if (const Entry* seed = sec.find("rotation_seed")) spec.rotation_seed = parse_u64(*seed);
    if (const Entry* dim = sec.find("dim")) {  // redundant for quadratic, but must agree
      if (parse_number(*dim) != static_cast<double>(spec.dim))
        throw ConfigError(dim->line, "quadratic dim must match the eigenvalue count");
    }
  } else if (kind->value == "circle") {
    spec.kind = ObjectiveKind::circle;
    spec.dim = 2;
    if (const Entry* dim = sec.find("dim")) {
      double d = parse_number(*dim);
      if (d < 2 || d != static_cast<std::size_t>(d))
        throw ConfigError(dim->line, "circle dim must be an integer >= 2");
      spec.dim = static_cast<std::size_t>(d);
    }
  } else if (kind->value == "sine_valley") {
    spec.kind = ObjectiveKind::sine_valley;
    spec.dim = 3;
    const Entry* mu = sec.find("mu_t");
    const Entry* L = sec.find("L_t");
    if (!mu || !L) throw ConfigError(kind->line, "sine_valley objective requires 'mu_t' and 'L_t'");
    spec.mu_t = parse_number(*mu);
    spec.L_t = parse_number(*L);
    if (!(spec.mu_t > 0.0) || !(spec.L_t >= spec.mu_t))
      throw ConfigError(mu->line, "sine_valley requires 0 < mu_t <= L_t");
  } else {
    throw ConfigError(kind->line, "unknown objective kind '" + kind->value +
                                      "' (quadratic | circle | sine_valley)");
  }
  sec.finish();
  return spec;
}

}  // namespace detail

/// Parse and validate an experiment config; defaults are filled in.
inline ExperimentConfig parse_config(const std::string& text) {
  using namespace detail;
  Sections sections = tokenize(text);
  ExperimentConfig cfg;
  cfg.objective = read_objective(sections);

  {
    SectionReader sec(sections, "method");
    if (const Entry* type = sec.find("type")) {
      if (type->value == "hb_discrete")
        cfg.method = Method::hb_discrete;
      else if (type->value == "gd")
        cfg.method = Method::gd;
      else if (type->value == "hb_ode")
        cfg.method = Method::hb_ode;
      else
        throw ConfigError(type->line, "unknown method '" + type->value +
                                          "' (hb_discrete | gd | hb_ode)");
    }
    const Entry* hp = sec.find("hyperparams");
    if (hp) {
      if (hp->value == "auto")
        cfg.auto_params = true;
      else if (hp->value == "explicit")
        cfg.auto_params = false;
      else
        throw ConfigError(hp->line, "hyperparams must be 'auto' or 'explicit'");
    }
    if (const Entry* g = sec.find("gamma")) {
      double v = parse_number(*g);
      if (!(v > 0.0)) throw ConfigError(g->line, "gamma must be > 0");
      cfg.gamma = v;
    }
    if (const Entry* b = sec.find("beta")) {
      double v = parse_number(*b);
      if (!(v >= 0.0 && v < 1.0)) throw ConfigError(b->line, "beta must lie in [0, 1)");
      cfg.beta = v;
    }
    if (const Entry* a = sec.find("alpha")) {
      double v = parse_number(*a);
      if (!(v > 0.0)) throw ConfigError(a->line, "alpha must be > 0");
      cfg.alpha = v;
    }
    if (hp)
      cfg.auto_params = hp->value == "auto";
    else
      cfg.auto_params = !(cfg.gamma || cfg.beta || cfg.alpha);
    sec.finish();
  }

  {
    SectionReader sec(sections, "init");
    const Entry* x0 = sec.find("x0");
    if (!x0) throw ConfigError(0, "missing init.x0");
    cfg.x0 = parse_list(*x0);
    if (cfg.x0.size() != cfg.objective.dim)
      throw ConfigError(x0->line, "x0 dimension " + std::to_string(cfg.x0.size()) +
                                      " does not match objective dimension " +
                                      std::to_string(cfg.objective.dim));
    if (const Entry* x1 = sec.find("x1")) {
      cfg.x1 = parse_list(*x1);
      if (cfg.x1->size() != cfg.objective.dim)
        throw ConfigError(x1->line, "x1 dimension does not match objective dimension");
    }
    if (const Entry* v0 = sec.find("v0")) {
      cfg.v0 = parse_list(*v0);
      if (cfg.v0->size() != cfg.objective.dim)
        throw ConfigError(v0->line, "v0 dimension does not match objective dimension");
    }
    sec.finish();
  }

  {
    SectionReader sec(sections, "stopping");
    if (const Entry* e = sec.find("f_tol")) {
      cfg.stopping.f_tol = parse_number(*e);
      if (!(cfg.stopping.f_tol > 0.0)) throw ConfigError(e->line, "f_tol must be > 0");
    }
    if (const Entry* e = sec.find("max_iters")) {
      cfg.stopping.max_iters = static_cast<std::size_t>(parse_u64(*e));
      if (cfg.stopping.max_iters == 0) throw ConfigError(e->line, "max_iters must be > 0");
    }
    if (const Entry* e = sec.find("blow_up_bound")) {
      cfg.stopping.blow_up_bound = parse_number(*e);
      if (!(cfg.stopping.blow_up_bound > 0.0)) throw ConfigError(e->line, "blow_up_bound must be > 0");
    }
    sec.finish();
  }

  {
    SectionReader sec(sections, "ode");
    if (const Entry* e = sec.find("h")) {
      cfg.ode_h = parse_number(*e);
      if (!(cfg.ode_h > 0.0)) throw ConfigError(e->line, "h must be > 0");
    }
    if (const Entry* e = sec.find("T")) {
      cfg.ode_T = parse_number(*e);
      if (!(*cfg.ode_T > 0.0)) throw ConfigError(e->line, "T must be > 0");
    }
    sec.finish();
  }

  {
    SectionReader sec(sections, "estimator");
    if (const Entry* e = sec.find("window_lo")) cfg.estimator.window_lo = parse_number(*e);
    if (const Entry* e = sec.find("window_hi")) cfg.estimator.window_hi = parse_number(*e);
    if (!(cfg.estimator.window_lo < cfg.estimator.window_hi))
      throw ConfigError(0, "estimator window_lo must be below window_hi");
    if (const Entry* e = sec.find("allow_prefactor")) cfg.estimator.allow_prefactor = parse_bool(*e);
    if (const Entry* e = sec.find("eps")) {
      cfg.estimator.eps = parse_number(*e);
      if (!(cfg.estimator.eps > 0.0)) throw ConfigError(e->line, "eps must be > 0");
    }
    sec.finish();
  }

  {
    SectionReader sec(sections, "output");
    if (const Entry* e = sec.find("dir")) cfg.out_dir = e->value;
    if (const Entry* e = sec.find("format")) {
      if (e->value != "csv" && e->value != "txt")
        throw ConfigError(e->line, "format must be csv or txt");
      cfg.format = e->value;
    }
    sec.finish();
  }

  {
    SectionReader sec(sections, "run");
    if (const Entry* e = sec.find("seed")) cfg.seed = parse_u64(*e);
    sec.finish();
  }

  // cross-field checks for explicit hyperparameters
  if (!cfg.auto_params) {
    if (cfg.method == Method::hb_discrete && (!cfg.gamma || !cfg.beta))
      throw ConfigError(0, "explicit hb_discrete requires gamma and beta");
    if (cfg.method == Method::gd && !cfg.gamma)
      throw ConfigError(0, "explicit gd requires gamma");
    if (cfg.method == Method::hb_ode && !cfg.alpha)
      throw ConfigError(0, "explicit hb_ode requires alpha");
  }

  for (const auto& [name, entries] : sections) {
    static const char* known[] = {"objective", "method", "init",  "stopping", "ode",
                                  "estimator", "output", "sweep", "probe",    "run"};
    bool ok = false;
    for (const char* k : known) ok = ok || name == k;
    if (!ok) {
      int line = entries.empty() ? 0 : entries.begin()->second.line;
      throw ConfigError(line, "unknown section [" + name + "]");
    }
  }
  return cfg;
}

/// Experiment config plus the [sweep] grid.
inline SweepSpec parse_sweep(const std::string& text) {
  using namespace detail;
  SweepSpec sweep;
  sweep.base = parse_config(text);
  Sections sections = tokenize(text);
  SectionReader sec(sections, "sweep");
  if (!sec.present()) throw ConfigError(0, "missing [sweep] section");
  if (const Entry* e = sec.find("gamma")) sweep.gammas = parse_list(*e);
  if (const Entry* e = sec.find("beta")) sweep.betas = parse_list(*e);
  if (const Entry* e = sec.find("alpha")) sweep.alphas = parse_list(*e);
  if (const Entry* e = sec.find("parallelism")) {
    sweep.parallelism = static_cast<std::size_t>(parse_u64(*e));
    if (sweep.parallelism == 0) throw ConfigError(e->line, "parallelism must be > 0");
  }
  sec.finish();
  bool ode = sweep.base.method == Method::hb_ode;
  if (ode && sweep.alphas.empty()) throw ConfigError(0, "hb_ode sweep requires an alpha grid");
  if (!ode && sweep.gammas.empty() && sweep.betas.empty())
    throw ConfigError(0, "discrete sweep requires a gamma or beta grid");
  return sweep;
}

/// Experiment config plus the [probe] section.
inline ProbeSpec parse_probe(const std::string& text) {
  using namespace detail;
  ProbeSpec probe;
  probe.base = parse_config(text);
  Sections sections = tokenize(text);
  SectionReader sec(sections, "probe");
  if (!sec.present()) throw ConfigError(0, "missing [probe] section");
  if (const Entry* e = sec.find("kind")) {
    if (e->value == "ball")
      probe.kind = Region::Kind::ball;
    else if (e->value == "annulus")
      probe.kind = Region::Kind::annulus;
    else
      throw ConfigError(e->line, "probe kind must be ball or annulus");
  }
  if (const Entry* e = sec.find("center")) {
    probe.center = parse_list(*e);
    if (probe.center->size() != probe.base.objective.dim)
      throw ConfigError(e->line, "probe center dimension does not match objective");
  }
  const Entry* radii = sec.find("radii");
  if (!radii) throw ConfigError(0, "probe requires 'radii'");
  probe.radii = parse_list(*radii);
  for (double r : probe.radii)
    if (!(r > 0.0)) throw ConfigError(radii->line, "probe radii must be > 0");
  if (const Entry* e = sec.find("base_radius")) probe.base_radius = parse_number(*e);
  if (const Entry* e = sec.find("samples")) {
    probe.samples = static_cast<std::size_t>(parse_u64(*e));
    if (probe.samples < 1000) throw ConfigError(e->line, "probe samples must be >= 1000");
  }
  sec.finish();
  return probe;
}

}  // namespace hblab
