#pragma once

// Run configuration: a flat INI-style text format with sections for the rod
// structure, the per-component map constants, the seed, and the solver.
//
//   [rods]
//   gap = -2.0 -0.5        # one line per rod, bottom to top
//   gap = 0.5 1.5
//
//   [map]
//   k = 1
//   normalize_gauge = true
//
//   [component 0]          # bottommost axis component; need N+1 sections
//   v = 0.5
//   psi = -0.8             # k values
//   chi = 0.0              # optional, defaults to zeros
//
//   [seed]
//   transition_radius = 0  # 0 = auto
//   bump_width = 0
//   profile = harmonic     # or smoothstep
//
//   [solver]
//   h = 0.25
//   tol = 1e-8
//   R_schedule = 8 16 32   # absolute radii; empty = {8,16,32} x diameter
//
// Unknown sections or keys are errors; every diagnostic carries the line
// number.

#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rodmap/rods.hpp"
#include "rodmap/seed.hpp"
#include "rodmap/solver.hpp"

namespace rodmap {

struct RunConfig {
  RodConfig rods;
  SingularMapSpec spec;
  SeedConfig seed;          // zeros resolved against the rods on finalize
  SolveParams solver;
  bool normalize_gauge = true;
  double cross_sign = -1.0;
  std::string output_dir = "out";
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<double> parse_numbers(const std::string& s, int line) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double x;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ConfigError(line, "expected a number, got '" + tok + "'");
    }
    if (used != tok.size()) throw ConfigError(line, "trailing characters in number '" + tok + "'");
    out.push_back(x);
  }
  if (out.empty()) throw ConfigError(line, "expected at least one number");
  return out;
}

inline double parse_number(const std::string& s, int line) {
  auto v = parse_numbers(s, line);
  if (v.size() != 1) throw ConfigError(line, "expected exactly one number");
  return v[0];
}

inline int parse_int(const std::string& s, int line) {
  const double x = parse_number(s, line);
  if (x != std::floor(x)) throw ConfigError(line, "expected an integer");
  return static_cast<int>(x);
}

inline bool parse_bool(const std::string& s, int line) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(line, "expected a boolean, got '" + s + "'");
}

struct ComponentConstants {
  std::vector<double> v, chi, psi;
  int line = 0;  // of the section header, for diagnostics
};

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  cfg.solver.R_schedule.clear();

  std::string section;
  int section_line = 0;
  std::map<int, detail::ComponentConstants> components;
  bool seen_k = false;
  std::vector<std::pair<double, double>> gaps;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find_first_of("#;"); pos != std::string::npos) line.erase(pos);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      section_line = lineno;
      if (section.rfind("component", 0) == 0) {
        const std::string idx = detail::trim(section.substr(9));
        if (idx.empty()) throw ConfigError(lineno, "component section needs an index");
        const int j = detail::parse_int(idx, lineno);
        if (j < 0) throw ConfigError(lineno, "component index must be >= 0");
        if (components.count(j)) throw ConfigError(lineno, "duplicate section [component " + idx + "]");
        components[j].line = lineno;
        section = "component:" + std::to_string(j);
      } else if (section != "rods" && section != "map" && section != "seed" &&
                 section != "solver" && section != "output") {
        throw ConfigError(lineno, "unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(lineno, "empty key");
    if (val.empty()) throw ConfigError(lineno, "empty value for '" + key + "'");
    if (section.empty()) throw ConfigError(lineno, "key '" + key + "' outside any section");

    if (section == "rods") {
      if (key == "gap") {
        const auto ab = detail::parse_numbers(val, lineno);
        if (ab.size() != 2) throw ConfigError(lineno, "gap needs two endpoints");
        if (!(ab[0] < ab[1])) throw ConfigError(lineno, "gap endpoints must satisfy a < b");
        gaps.push_back({ab[0], ab[1]});
      } else {
        throw ConfigError(lineno, "unknown key '" + key + "' in [rods]");
      }
    } else if (section == "map") {
      if (key == "k") {
        cfg.spec.k = detail::parse_int(val, lineno);
        if (cfg.spec.k < 0) throw ConfigError(lineno, "k must be >= 0");
        seen_k = true;
      } else if (key == "normalize_gauge") {
        cfg.normalize_gauge = detail::parse_bool(val, lineno);
      } else if (key == "cross_sign") {
        cfg.cross_sign = detail::parse_number(val, lineno);
        if (cfg.cross_sign != 1.0 && cfg.cross_sign != -1.0)
          throw ConfigError(lineno, "cross_sign must be -1 or 1");
      } else {
        throw ConfigError(lineno, "unknown key '" + key + "' in [map]");
      }
    } else if (section.rfind("component:", 0) == 0) {
      auto& c = components[std::stoi(section.substr(10))];
      if (key == "v")
        c.v = detail::parse_numbers(val, lineno);
      else if (key == "chi")
        c.chi = detail::parse_numbers(val, lineno);
      else if (key == "psi")
        c.psi = detail::parse_numbers(val, lineno);
      else
        throw ConfigError(lineno, "unknown key '" + key + "' in [" + section + "]");
      if (key == "v" && c.v.size() != 1) throw ConfigError(lineno, "v takes one value");
    } else if (section == "seed") {
      if (key == "transition_radius")
        cfg.seed.transition_radius = detail::parse_number(val, lineno);
      else if (key == "bump_width")
        cfg.seed.bump_width = detail::parse_number(val, lineno);
      else if (key == "theta_margin")
        cfg.seed.theta_margin = detail::parse_number(val, lineno);
      else if (key == "profile") {
        if (val == "harmonic")
          cfg.seed.profile = AngularProfile::harmonic;
        else if (val == "smoothstep")
          cfg.seed.profile = AngularProfile::smoothstep;
        else
          throw ConfigError(lineno, "unknown profile '" + val + "'");
      } else {
        throw ConfigError(lineno, "unknown key '" + key + "' in [seed]");
      }
    } else if (section == "solver") {
      if (key == "h")
        cfg.solver.h = detail::parse_number(val, lineno);
      else if (key == "tol")
        cfg.solver.tol = detail::parse_number(val, lineno);
      else if (key == "max_iters")
        cfg.solver.max_iters = detail::parse_int(val, lineno);
      else if (key == "gs_sweeps")
        cfg.solver.gs_sweeps = detail::parse_int(val, lineno);
      else if (key == "R_schedule") {
        cfg.solver.R_schedule = detail::parse_numbers(val, lineno);
        for (std::size_t i = 1; i < cfg.solver.R_schedule.size(); ++i)
          if (!(cfg.solver.R_schedule[i] > cfg.solver.R_schedule[i - 1]))
            throw ConfigError(lineno, "R_schedule must be strictly increasing");
      } else if (key == "probe_radius")
        cfg.solver.probe_radius = detail::parse_number(val, lineno);
      else
        throw ConfigError(lineno, "unknown key '" + key + "' in [solver]");
    } else if (section == "output") {
      if (key == "directory")
        cfg.output_dir = val;
      else
        throw ConfigError(lineno, "unknown key '" + key + "' in [output]");
    }
  }

  if (gaps.empty()) throw ConfigError(section_line ? section_line : lineno, "no rods: need at least one 'gap' in [rods]");
  for (std::size_t i = 1; i < gaps.size(); ++i)
    if (!(gaps[i].first > gaps[i - 1].second))
      throw ConfigError(lineno, "gaps must be disjoint and ordered bottom to top");
  cfg.rods.gaps.clear();
  for (auto [a, b] : gaps) cfg.rods.gaps.push_back({a, b});
  if (!seen_k) throw ConfigError(lineno, "missing 'k' in [map]");

  const int ncomp = cfg.rods.component_count();
  cfg.spec.v.assign(ncomp, 0.0);
  cfg.spec.chi.assign(ncomp, std::vector<double>(cfg.spec.k, 0.0));
  cfg.spec.psi.assign(ncomp, std::vector<double>(cfg.spec.k, 0.0));
  for (const auto& [j, c] : components) {
    if (j >= ncomp)
      throw ConfigError(c.line, "component index " + std::to_string(j) + " out of range: " +
                                    std::to_string(ncomp) + " axis components");
    if (!c.v.empty()) cfg.spec.v[j] = c.v[0];
    auto assign_vec = [&](const std::vector<double>& src, std::vector<double>& dst,
                          const char* name) {
      if (src.empty()) return;
      if (src.size() != static_cast<std::size_t>(cfg.spec.k))
        throw ConfigError(c.line, std::string(name) + " needs k = " + std::to_string(cfg.spec.k) +
                                      " values, got " + std::to_string(src.size()));
      dst = src;
    };
    assign_vec(c.chi, cfg.spec.chi[j], "chi");
    assign_vec(c.psi, cfg.spec.psi[j], "psi");
  }
  cfg.spec.validate(cfg.rods);

  // resolve seed defaults against the rods
  SeedConfig def = SeedConfig::defaults(cfg.rods);
  if (cfg.seed.transition_radius == 0.0) cfg.seed.transition_radius = def.transition_radius;
  if (cfg.seed.bump_width == 0.0) cfg.seed.bump_width = def.bump_width;
  cfg.seed.validate(cfg.rods);

  // default R schedule: {8, 16, 32} x configuration diameter
  if (cfg.solver.R_schedule.empty()) {
    const double L = 2.0 * cfg.rods.outer_extent();
    cfg.solver.R_schedule = {8.0 * L, 16.0 * L, 32.0 * L};
  }
  if (cfg.solver.probe_radius == 0.0)
    cfg.solver.probe_radius = 0.5 * cfg.solver.R_schedule.front();
  if (!(cfg.solver.h > 0.0) || !(cfg.solver.tol > 0.0))
    throw ConfigError(lineno, "solver h and tol must be positive");
  return cfg;
}

// the gauge shift moving component 0 to (v, psi) = (0, 0); identity when
// normalization is disabled or already normalized
inline GaugeIsometry config_gauge_shift(const RunConfig& cfg) {
  if (!cfg.normalize_gauge) return GaugeIsometry{std::vector<double>(cfg.spec.k, 0.0), 0.0};
  std::vector<TargetPoint> constants;
  for (int j = 0; j < cfg.rods.component_count(); ++j) constants.push_back(cfg.spec.constant(j));
  return gauge_normalize(constants).first;
}

// applies the gauge shift to the map constants, in place
inline void apply_gauge(RunConfig& cfg, const GaugeIsometry& iso) {
  for (int j = 0; j < cfg.rods.component_count(); ++j) {
    TargetPoint p = iso.apply(cfg.spec.constant(j));
    cfg.spec.v[j] = p.v;
    cfg.spec.chi[j] = p.chi;
    cfg.spec.psi[j] = p.psi;
  }
}

// resolved-config echo, deterministic key order
inline std::string echo_config(const RunConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "[rods]\n";
  for (const auto& g : cfg.rods.gaps) out << "gap = " << g.a << " " << g.b << "\n";
  out << "\n[map]\nk = " << cfg.spec.k << "\nnormalize_gauge = "
      << (cfg.normalize_gauge ? "true" : "false") << "\ncross_sign = " << cfg.cross_sign << "\n";
  for (int j = 0; j < cfg.rods.component_count(); ++j) {
    out << "\n[component " << j << "]\nv = " << cfg.spec.v[j] << "\n";
    if (cfg.spec.k > 0) {
      out << "chi =";
      for (double x : cfg.spec.chi[j]) out << " " << x;
      out << "\npsi =";
      for (double x : cfg.spec.psi[j]) out << " " << x;
      out << "\n";
    }
  }
  out << "\n[seed]\ntransition_radius = " << cfg.seed.transition_radius
      << "\nbump_width = " << cfg.seed.bump_width << "\ntheta_margin = " << cfg.seed.theta_margin
      << "\nprofile = "
      << (cfg.seed.profile == AngularProfile::harmonic ? "harmonic" : "smoothstep") << "\n";
  out << "\n[solver]\nh = " << cfg.solver.h << "\ntol = " << cfg.solver.tol
      << "\nmax_iters = " << cfg.solver.max_iters << "\nR_schedule =";
  for (double r : cfg.solver.R_schedule) out << " " << r;
  out << "\nprobe_radius = " << cfg.solver.probe_radius << "\n";
  out << "\n[output]\ndirectory = " << cfg.output_dir << "\n";
  return out.str();
}

}  // namespace rodmap
