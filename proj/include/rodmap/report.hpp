#pragma once

// Run-report serialization: a structured JSON report, CSV tables for plotting,
// and self-describing text checkpoints for solved field states.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rodmap/config.hpp"
#include "rodmap/diagnostics.hpp"
#include "rodmap/seed.hpp"
#include "rodmap/solver.hpp"
#include "rodmap/spacetime.hpp"

namespace rodmap {

using json = nlohmann::ordered_json;

inline json to_json(const SolveReport& r) {
  return json{{"converged", r.converged},
              {"iterations", r.iterations},
              {"final_residual", r.final_residual},
              {"residual_history", r.residual_history},
              {"energy_history", r.energy_history},
              {"message", r.message}};
}

inline json to_json(const BoundReport& r) {
  return json{{"R", r.R},
              {"sigma_max", r.sigma_max},
              {"c_measured", r.c_measured},
              {"bound", r.bound},
              {"nu_at_R", r.nu_at_R},
              {"frac_maxprinc", r.frac_maxprinc},
              {"pass_maxprinc", r.pass_maxprinc},
              {"pass_bound", r.pass_bound}};
}

inline json to_json(const Step3Report& r) {
  return json{{"cells", r.cells},
              {"violation_2q", r.violation_2q},
              {"violation_q", r.violation_q},
              {"min_lap_ureg", r.min_lap_ureg},
              {"pass_2q", r.pass_2q},
              {"pass_q", r.pass_q},
              {"pass_subharmonic", r.pass_subharmonic}};
}

inline json to_json(const ConicalReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back(json{{"component", e.component},
                           {"bounded", e.bounded},
                           {"deficit", e.deficit},
                           {"regular", e.regular}});
  return json{{"tolerance", r.tolerance}, {"entries", entries}};
}

inline json to_json(const GaugeIsometry& iso) {
  return json{{"psi_shift", iso.psi_shift}, {"v_shift", iso.v_shift}};
}

// ---- CSV ----

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  char buf[32];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << "\n";
  }
}

// sigma = sqrt(1 + dist^2) - 1 along polar rays of the final state, for plots
inline std::vector<std::vector<double>> sigma_ray_table(const FieldState& st, const SeedMap& seed,
                                                        const std::vector<double>& angles,
                                                        int nradii = 48) {
  DistanceField f = distance_field(st, seed);
  const Grid& g = st.grid;
  std::vector<std::vector<double>> rows;
  for (double th : angles)
    for (int s = 1; s <= nradii; ++s) {
      const double r = g.R * s / (nradii + 1.0);
      const AxisPoint x{r * std::sin(th), r * std::cos(th)};
      if (x.rho < g.hrho()) continue;  // stay off the axis column
      // nearest node lookup keeps the table consistent with the field
      int ib = static_cast<int>(std::round(x.rho / g.hrho()));
      int jb = 0;
      for (int j = 1; j < g.nz(); ++j)
        if (std::abs(g.z[j] - x.z) < std::abs(g.z[jb] - x.z)) jb = j;
      if (ib >= g.nrho()) continue;
      if (g.type(ib, jb) == NodeType::dirichlet) continue;
      rows.push_back({th, r, f.sigma[g.idx(ib, jb)]});
    }
  return rows;
}

inline std::vector<std::vector<double>> metric_table(const FieldState& st, const RodConfig& rods,
                                                     const SpacetimeFields& f, int stride = 4) {
  const Grid& g = st.grid;
  std::vector<std::pair<int, int>> nodes;
  for (int i = 1; i < g.nrho(); i += stride)
    for (int j = 0; j < g.nz(); j += stride)
      if (g.type(i, j) != NodeType::dirichlet) nodes.push_back({i, j});
  auto samples = assemble_metric(st, rods, f, nodes);
  std::vector<std::vector<double>> rows;
  for (const auto& s : samples) {
    std::vector<double> row{s.x.rho,  s.x.z,      s.g_tt,     s.g_tphi,
                            s.g_phiphi, s.g_rhorho, s.det_tphi, s.signature_ok ? 1.0 : 0.0};
    for (double a : s.A_phi) row.push_back(a);
    for (double a : s.A_t) row.push_back(a);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<std::string> metric_table_header(int k) {
  std::vector<std::string> h{"rho", "z", "g_tt", "g_tphi", "g_phiphi", "g_rhorho", "det_tphi",
                             "signature_ok"};
  for (int q = 0; q < k; ++q) h.push_back("A_phi_" + std::to_string(q));
  for (int q = 0; q < k; ++q) h.push_back("A_t_" + std::to_string(q));
  return h;
}

// ---- checkpoints ----

inline void save_state(const std::string& path, const FieldState& st, const RodConfig& rods,
                       const SolveReport& rep) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  const Grid& g = st.grid;
  out << "rodmap-checkpoint 1\n";
  out << "R " << g.R << " h " << g.hrho() << " k " << st.k << " nrho " << g.nrho() << " nz "
      << g.nz() << "\n";
  out << "gaps " << rods.gap_count();
  for (const auto& gap : rods.gaps) out << " " << gap.a << " " << gap.b;
  out << "\n";
  out << "converged " << (rep.converged ? 1 : 0) << " iterations " << rep.iterations
      << " residual " << rep.final_residual << "\n";
  for (int c = 0; c < st.channels(); ++c) {
    out << "channel " << c;
    for (double v : st.f[c]) out << " " << v;
    out << "\n";
  }
}

struct Checkpoint {
  FieldState state;
  RodConfig rods;
  SolveReport report;
};

inline Checkpoint load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "rodmap-checkpoint" || version != 1)
    throw std::runtime_error(path + ": not a rodmap checkpoint");
  std::string kw;
  double R, h;
  int k, nrho, nz, ngaps;
  in >> kw >> R >> kw >> h >> kw >> k >> kw >> nrho >> kw >> nz;
  in >> kw >> ngaps;
  Checkpoint cp;
  for (int i = 0; i < ngaps; ++i) {
    double a, b;
    in >> a >> b;
    cp.rods.gaps.push_back({a, b});
  }
  int conv;
  in >> kw >> conv >> kw >> cp.report.iterations >> kw >> cp.report.final_residual;
  cp.report.converged = conv != 0;
  Grid g = Grid::build(cp.rods, R, h);
  if (g.nrho() != nrho || g.nz() != nz)
    throw std::runtime_error(path + ": grid geometry does not match the stored header");
  cp.state = FieldState::zeros(g, k);
  for (int c = 0; c < cp.state.channels(); ++c) {
    int ci;
    in >> kw >> ci;
    if (kw != "channel" || ci != c) throw std::runtime_error(path + ": malformed channel block");
    for (double& v : cp.state.f[c]) in >> v;
  }
  if (!in) throw std::runtime_error(path + ": truncated checkpoint");
  return cp;
}

}  // namespace rodmap
