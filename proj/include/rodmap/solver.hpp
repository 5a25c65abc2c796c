#pragma once

// Discrete harmonic-map solver on B_R: damped Newton on the pointwise
// discrete tension with the substitution u = u0 + u_reg (exact grad u0,
// Lap u0 = 0 fed into the jets), Dirichlet data on the outer arc, component
// constants clamped on Sigma rows, even reflection on gap rows.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <Eigen/IterativeLinearSolvers>

#include "rodmap/grid.hpp"
#include "rodmap/rods.hpp"
#include "rodmap/seed.hpp"
#include "rodmap/target.hpp"

namespace rodmap {

// channel order: 0 = u_reg, 1 = v, 2..k+1 = chi, k+2..2k+1 = psi
struct FieldState {
  Grid grid;
  int k = 0;
  double R = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::vector<double>> f;

  int channels() const { return 2 * k + 2; }

  static FieldState zeros(const Grid& g, int k) {
    FieldState s;
    s.grid = g;
    s.k = k;
    s.R = g.R;
    s.f.assign(2 * k + 2, std::vector<double>(g.size(), 0.0));
    return s;
  }

  // bilinear sample of one channel; x must lie inside the grid rectangle
  double sample(int channel, const AxisPoint& x) const {
    const auto& rr = grid.rho;
    const auto& zz = grid.z;
    auto bracket = [](const std::vector<double>& v, double t) {
      int j = static_cast<int>(std::upper_bound(v.begin(), v.end(), t) - v.begin()) - 1;
      return std::clamp(j, 0, static_cast<int>(v.size()) - 2);
    };
    const int i = bracket(rr, x.rho), j = bracket(zz, x.z);
    const double tx = std::clamp((x.rho - rr[i]) / (rr[i + 1] - rr[i]), 0.0, 1.0);
    const double tz = std::clamp((x.z - zz[j]) / (zz[j + 1] - zz[j]), 0.0, 1.0);
    const auto& F = f[channel];
    return (1 - tx) * ((1 - tz) * F[grid.idx(i, j)] + tz * F[grid.idx(i, j + 1)]) +
           tx * ((1 - tz) * F[grid.idx(i + 1, j)] + tz * F[grid.idx(i + 1, j + 1)]);
  }

  bool inside(const AxisPoint& x) const {
    return x.rho >= 0.0 && x.rho <= grid.rho.back() && x.z >= grid.z.front() && x.z <= grid.z.back();
  }
};

struct SolveParams {
  double tol = 1e-8;            // sup tension-norm residual
  int max_iters = 60;
  int max_backtracks = 10;
  int gs_sweeps = 40;
  int patience = 5;             // consecutive non-improving iterations before failure
  double h = 0.25;              // target grid spacing
  std::vector<double> R_schedule;
  double probe_radius = 0.0;    // exhaustion probe ball; 0 = half of the first R
  double linear_tol = 1e-10;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<double> residual_history;  // accepted iterates
  std::vector<double> energy_history;    // accepted iterates (F_R)
  std::string message;
};

// Dirichlet data provider: u_reg and the angular channels as functions of the
// boundary point.  The default is the seed (u_reg = 0 there by construction).
struct BoundaryData {
  std::function<double(const AxisPoint&)> u_reg;
  std::function<std::vector<double>(const AxisPoint&)> angular;

  static BoundaryData from_seed(const SeedMap& seed) {
    BoundaryData b;
    b.u_reg = [](const AxisPoint&) { return 0.0; };
    b.angular = [&seed](const AxisPoint& x) { return seed.angular(x); };
    return b;
  }
};

namespace detail {

// precomputed rod-potential data and z spacings for one grid
struct SolveContext {
  const Grid& g;
  const RodConfig& rods;
  const SingularMapSpec& spec;
  std::vector<double> u0val, gu0r, gu0z;
  std::vector<double> hzm, hzp;  // z spacing below/above each z index

  SolveContext(const Grid& g_, const RodConfig& rods_, const SingularMapSpec& spec_)
      : g(g_), rods(rods_), spec(spec_) {
    u0val.assign(g.size(), 0.0);
    gu0r.assign(g.size(), 0.0);
    gu0z.assign(g.size(), 0.0);
    for (int i = 0; i < g.nrho(); ++i)
      for (int j = 0; j < g.nz(); ++j) {
        const AxisPoint x = g.point(i, j);
        if (rods.on_sigma(x)) continue;  // sigma rows never evaluate u0
        const int id = g.idx(i, j);
        u0val[id] = axis_potential_u0(rods, x);
        auto [gr, gz] = grad_u0(rods, x);
        gu0r[id] = gr;
        gu0z[id] = gz;
      }
    hzm.assign(g.nz(), 0.0);
    hzp.assign(g.nz(), 0.0);
    for (int j = 0; j < g.nz(); ++j) {
      if (j > 0) hzm[j] = g.z[j] - g.z[j - 1];
      if (j + 1 < g.nz()) hzp[j] = g.z[j + 1] - g.z[j];
    }
  }
};

// residual at a node: fills res[0..m-1] (zero for non-unknown channels) and
// returns the pointwise tension norm (|Lap u_reg| on sigma rows)
inline double residual_at(const SolveContext& c, const FieldState& st, int i, int j, double* res) {
  const Grid& g = c.g;
  const int k = st.k;
  const int m = 2 * k + 2;
  std::fill(res, res + m, 0.0);
  const NodeType t = g.type(i, j);
  if (t == NodeType::dirichlet) return 0.0;

  const int id = g.idx(i, j);
  const int idE = g.idx(i + 1, j);
  const int idN = g.idx(i, j + 1);
  const int idS = g.idx(i, j - 1);
  const double hr = g.hrho();
  const double hm = c.hzm[j], hp = c.hzp[j];
  const double wzp = hm / (hp * (hm + hp));
  const double wz0 = (hp - hm) / (hp * hm);
  const double wzm = -hp / (hm * (hm + hp));
  const double lzp = 2.0 / (hp * (hm + hp));
  const double lz0 = -2.0 / (hp * hm);
  const double lzm = 2.0 / (hm * (hm + hp));

  auto dz = [&](const std::vector<double>& F) {
    return wzp * F[idN] + wz0 * F[id] + wzm * F[idS];
  };
  auto dzz = [&](const std::vector<double>& F) {
    return lzp * F[idN] + lz0 * F[id] + lzm * F[idS];
  };

  if (t == NodeType::axis_sigma) {
    // u_reg only: Lap with even reflection, nonlinear terms vanish on Sigma
    const auto& U = st.f[0];
    res[0] = 4.0 * (U[idE] - U[id]) / (hr * hr) + dzz(U);
    return std::abs(res[0]);
  }

  const bool axis = (t == NodeType::axis_gap);
  const int idW = axis ? id : g.idx(i - 1, j);

  MapJet jet(k);
  for (int ch = 0; ch < m; ++ch) {
    const auto& F = st.f[ch];
    double fr, lap;
    if (axis) {
      fr = 0.0;
      lap = 4.0 * (F[idE] - F[id]) / (hr * hr) + dzz(F);
    } else {
      fr = (F[idE] - F[idW]) / (2.0 * hr);
      lap = (F[idE] - 2.0 * F[id] + F[idW]) / (hr * hr) + fr / g.rho[i] + dzz(F);
    }
    const double fz = dz(F);
    if (ch == 0) {
      jet.p.u = c.u0val[id] + F[id];
      jet.grad[0].du = c.gu0r[id] + fr;
      jet.grad[1].du = c.gu0z[id] + fz;
      jet.lap.du = lap;  // Lap u0 = 0 exactly
    } else if (ch == 1) {
      jet.p.v = F[id];
      jet.grad[0].dv = fr;
      jet.grad[1].dv = fz;
      jet.lap.dv = lap;
    } else if (ch < 2 + k) {
      const int q = ch - 2;
      jet.p.chi[q] = F[id];
      jet.grad[0].dchi[q] = fr;
      jet.grad[1].dchi[q] = fz;
      jet.lap.dchi[q] = lap;
    } else {
      const int q = ch - 2 - k;
      jet.p.psi[q] = F[id];
      jet.grad[0].dpsi[q] = fr;
      jet.grad[1].dpsi[q] = fz;
      jet.lap.dpsi[q] = lap;
    }
  }

  TargetTangent tau = tension(jet);
  res[0] = tau.du;
  res[1] = tau.dv;
  for (int q = 0; q < k; ++q) {
    res[2 + q] = tau.dchi[q];
    res[2 + k + q] = tau.dpsi[q];
  }
  return tension_norm(jet.p, tau);
}

struct UnknownMap {
  std::vector<int> base;      // per node, -1 if none
  std::vector<int> count;     // unknown channels at node (prefix of channel order)
  int total = 0;

  UnknownMap(const Grid& g, int m) {
    base.assign(g.size(), -1);
    count.assign(g.size(), 0);
    for (int i = 0; i < g.nrho(); ++i)
      for (int j = 0; j < g.nz(); ++j) {
        const NodeType t = g.type(i, j);
        int n = 0;
        if (t == NodeType::interior || t == NodeType::axis_gap) n = m;
        if (t == NodeType::axis_sigma) n = 1;
        if (n > 0) {
          base[g.idx(i, j)] = total;
          count[g.idx(i, j)] = n;
          total += n;
        }
      }
  }
};

}  // namespace detail

struct ResidualGrids {
  std::vector<std::vector<double>> res;  // per channel, per node
  double sup_norm = 0.0;
};

inline ResidualGrids discrete_euler_lagrange(const FieldState& st, const RodConfig& rods,
                                             const SingularMapSpec& spec) {
  detail::SolveContext ctx(st.grid, rods, spec);
  const int m = st.channels();
  ResidualGrids out;
  out.res.assign(m, std::vector<double>(st.grid.size(), 0.0));
  std::vector<double> r(m);
  for (int i = 0; i < st.grid.nrho(); ++i)
    for (int j = 0; j < st.grid.nz(); ++j) {
      double n = detail::residual_at(ctx, st, i, j, r.data());
      out.sup_norm = std::max(out.sup_norm, n);
      for (int ch = 0; ch < m; ++ch) out.res[ch][st.grid.idx(i, j)] = r[ch];
    }
  return out;
}

inline ResidualGrids discrete_euler_lagrange(const FieldState& st, const SeedMap& seed) {
  return discrete_euler_lagrange(st, seed.rods(), seed.spec());
}

// Renormalized energy F_R: midpoint quadrature over cells of
// 2 pi rho { |grad u_reg|^2 + Q_phi(grad v, grad chi, grad psi) }.
inline double discrete_energy(const FieldState& st, const RodConfig& rods) {
  const Grid& g = st.grid;
  const int k = st.k;
  const int m = st.channels();
  double total = 0.0;
  for (int i = 0; i + 1 < g.nrho(); ++i)
    for (int j = 0; j + 1 < g.nz(); ++j) {
      const double rc = 0.5 * (g.rho[i] + g.rho[i + 1]);
      const double zc = 0.5 * (g.z[j] + g.z[j + 1]);
      if (rc * rc + zc * zc > g.R * g.R) continue;
      const double hr = g.rho[i + 1] - g.rho[i];
      const double hz = g.z[j + 1] - g.z[j];
      const int a = g.idx(i, j), b = g.idx(i + 1, j), cc = g.idx(i, j + 1), d = g.idx(i + 1, j + 1);

      TargetPoint p = TargetPoint::zero(k);
      TargetTangent gr(k), gz(k);
      double e_u = 0.0;
      for (int ch = 0; ch < m; ++ch) {
        const auto& F = st.f[ch];
        const double val = 0.25 * (F[a] + F[b] + F[cc] + F[d]);
        const double fr = 0.5 * (F[b] + F[d] - F[a] - F[cc]) / hr;
        const double fz = 0.5 * (F[cc] + F[d] - F[a] - F[b]) / hz;
        if (ch == 0) {
          e_u = fr * fr + fz * fz;  // |grad(u - u0)|^2
          p.u = axis_potential_u0(rods, {rc, zc}) + val;
        } else if (ch == 1) {
          p.v = val;
          gr.dv = fr;
          gz.dv = fz;
        } else if (ch < 2 + k) {
          p.chi[ch - 2] = val;
          gr.dchi[ch - 2] = fr;
          gz.dchi[ch - 2] = fz;
        } else {
          p.psi[ch - 2 - k] = val;
          gr.dpsi[ch - 2 - k] = fr;
          gz.dpsi[ch - 2 - k] = fz;
        }
      }
      // Q_p over both directions (the du-part is carried separately)
      gr.du = 0.0;
      gz.du = 0.0;
      const double q = metric_inner(p, gr, gr) + metric_inner(p, gz, gz);
      total += 2.0 * std::numbers::pi * rc * (e_u + q) * hr * hz;
    }
  return total;
}

inline double discrete_energy(const FieldState& st, const SeedMap& seed) {
  return discrete_energy(st, seed.rods());
}

// trapezoid-rule variant used as an independent quadrature cross-check
inline double discrete_energy_trapezoid(const FieldState& st, const RodConfig& rods) {
  const Grid& g = st.grid;
  const int k = st.k;
  const int m = st.channels();
  double total = 0.0;
  for (int i = 1; i + 1 < g.nrho(); ++i)
    for (int j = 1; j + 1 < g.nz(); ++j) {
      const AxisPoint x = g.point(i, j);
      if (x.rho * x.rho + x.z * x.z > g.R * g.R) continue;
      const double hr = g.hrho();
      const double wz = 0.5 * (g.z[j + 1] - g.z[j - 1]);
      TargetPoint p = TargetPoint::zero(k);
      TargetTangent gr(k), gz(k);
      double e_u = 0.0;
      const int id = g.idx(i, j), e = g.idx(i + 1, j), w = g.idx(i - 1, j);
      const int n = g.idx(i, j + 1), s = g.idx(i, j - 1);
      for (int ch = 0; ch < m; ++ch) {
        const auto& F = st.f[ch];
        const double fr = (F[e] - F[w]) / (2.0 * hr);
        const double fz = (F[n] - F[s]) / (g.z[j + 1] - g.z[j - 1]);
        if (ch == 0) {
          e_u = fr * fr + fz * fz;
          p.u = axis_potential_u0(rods, x) + F[id];
        } else if (ch == 1) {
          p.v = F[id];
          gr.dv = fr;
          gz.dv = fz;
        } else if (ch < 2 + k) {
          p.chi[ch - 2] = F[id];
          gr.dchi[ch - 2] = fr;
          gz.dchi[ch - 2] = fz;
        } else {
          p.psi[ch - 2 - k] = F[id];
          gr.dpsi[ch - 2 - k] = fr;
          gz.dpsi[ch - 2 - k] = fz;
        }
      }
      const double q = metric_inner(p, gr, gr) + metric_inner(p, gz, gz);
      total += 2.0 * std::numbers::pi * x.rho * (e_u + q) * hr * wz;
    }
  return total;
}

// fill a state with boundary/seed data everywhere and exact clamps on Sigma rows
inline FieldState state_from_boundary(const Grid& g, const SingularMapSpec& spec,
                                      const BoundaryData& bc) {
  FieldState st = FieldState::zeros(g, spec.k);
  const int k = spec.k;
  for (int i = 0; i < g.nrho(); ++i)
    for (int j = 0; j < g.nz(); ++j) {
      AxisPoint x = g.point(i, j);
      if (i == 0) x.rho = 1e-9 * std::max(1.0, g.R);  // nudge off profile centers
      const int id = g.idx(i, j);
      st.f[0][id] = bc.u_reg(x);
      std::vector<double> ang = bc.angular(x);
      st.f[1][id] = ang[0];
      for (int q = 0; q < k; ++q) {
        st.f[2 + q][id] = ang[1 + q];
        st.f[2 + k + q][id] = ang[1 + k + q];
      }
    }
  // exact component constants on Sigma rows
  for (int j = 0; j < g.nz(); ++j) {
    const int comp = g.axis_component[j];
    if (comp < 0 || g.type(0, j) != NodeType::axis_sigma) continue;
    const int id = g.idx(0, j);
    st.f[1][id] = spec.v[comp];
    for (int q = 0; q < k; ++q) {
      st.f[2 + q][id] = spec.chi[comp][q];
      st.f[2 + k + q][id] = spec.psi[comp][q];
    }
  }
  return st;
}

// resample a previous state onto a new grid (warm start), boundary data outside
inline FieldState interpolate_state(const FieldState& prev, const Grid& g,
                                    const SingularMapSpec& spec, const BoundaryData& bc) {
  FieldState st = state_from_boundary(g, spec, bc);
  const double Rp = prev.grid.R;
  for (int i = 0; i < g.nrho(); ++i)
    for (int j = 0; j < g.nz(); ++j) {
      const AxisPoint x = g.point(i, j);
      if (g.type(i, j) == NodeType::dirichlet) continue;
      if (!prev.inside(x) || x.rho * x.rho + x.z * x.z >= Rp * Rp) continue;
      const int id = g.idx(i, j);
      for (int ch = 0; ch < st.channels(); ++ch) st.f[ch][id] = prev.sample(ch, x);
    }
  // restore exact clamps
  for (int j = 0; j < g.nz(); ++j) {
    const int comp = g.axis_component[j];
    if (comp < 0 || g.type(0, j) != NodeType::axis_sigma) continue;
    const int id = g.idx(0, j);
    st.f[1][id] = spec.v[comp];
    for (int q = 0; q < spec.k; ++q) {
      st.f[2 + q][id] = spec.chi[comp][q];
      st.f[2 + spec.k + q][id] = spec.psi[comp][q];
    }
  }
  return st;
}

inline std::pair<FieldState, SolveReport> solve_on_ball(const SeedMap& seed, const RodConfig& rods,
                                                        const Grid& grid, const SolveParams& params,
                                                        const FieldState* init = nullptr,
                                                        const BoundaryData* boundary = nullptr) {
  const SingularMapSpec& spec = seed.spec();
  if (grid.min_gap_cells(rods) < 4)
    throw std::invalid_argument("solve_on_ball: grid must resolve every gap with >= 4 cells");
  BoundaryData bc = boundary ? *boundary : BoundaryData::from_seed(seed);

  FieldState st = init ? interpolate_state(*init, grid, spec, bc)
                       : state_from_boundary(grid, spec, bc);
  SolveReport rep;
  detail::SolveContext ctx(grid, rods, spec);
  const int m = st.channels();
  detail::UnknownMap um(grid, m);

  auto sup_residual = [&](const FieldState& s) {
    double worst = 0.0;
    std::vector<double> r(m);
    for (int i = 0; i < grid.nrho(); ++i)
      for (int j = 0; j < grid.nz(); ++j)
        worst = std::max(worst, detail::residual_at(ctx, s, i, j, r.data()));
    return worst;
  };
  auto gather_residual = [&](const FieldState& s, Eigen::VectorXd& F) {
    std::vector<double> r(m);
    for (int i = 0; i < grid.nrho(); ++i)
      for (int j = 0; j < grid.nz(); ++j) {
        const int id = grid.idx(i, j);
        if (um.base[id] < 0) continue;
        detail::residual_at(ctx, s, i, j, r.data());
        for (int c = 0; c < um.count[id]; ++c) F(um.base[id] + c) = r[c];
      }
  };

  double resnorm = sup_residual(st);
  rep.residual_history.push_back(resnorm);
  rep.energy_history.push_back(discrete_energy(st, rods));

  int stall = 0;
  for (int iter = 0; iter < params.max_iters; ++iter) {
    if (!std::isfinite(resnorm)) {
      rep.message = "non-finite residual";
      break;
    }
    if (resnorm <= params.tol) {
      rep.converged = true;
      break;
    }

    // FD Jacobian over the 5-point stencil
    Eigen::VectorXd F(um.total);
    gather_residual(st, F);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(um.total) * (5 * m));
    std::vector<double> rp(m), rm2(m);
    for (int i = 0; i < grid.nrho(); ++i)
      for (int j = 0; j < grid.nz(); ++j) {
        const int id = grid.idx(i, j);
        if (um.base[id] < 0) continue;
        const int rows[5][2] = {{i, j}, {i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
        for (int c = 0; c < um.count[id]; ++c) {
          const int col = um.base[id] + c;
          double& val = st.f[c][id];
          const double save = val;
          const double delta = 1e-6 * (1.0 + std::abs(save));
          for (const auto& rc : rows) {
            const int ri = rc[0], rj = rc[1];
            if (ri < 0 || ri >= grid.nrho() || rj < 0 || rj >= grid.nz()) continue;
            const int rid = grid.idx(ri, rj);
            if (um.base[rid] < 0) continue;
            val = save + delta;
            detail::residual_at(ctx, st, ri, rj, rp.data());
            val = save - delta;
            detail::residual_at(ctx, st, ri, rj, rm2.data());
            val = save;
            for (int rc2 = 0; rc2 < um.count[rid]; ++rc2) {
              const double d = (rp[rc2] - rm2[rc2]) / (2.0 * delta);
              if (d != 0.0) trips.emplace_back(um.base[rid] + rc2, col, d);
            }
          }
        }
      }
    Eigen::SparseMatrix<double> J(um.total, um.total);
    J.setFromTriplets(trips.begin(), trips.end());

    Eigen::VectorXd d;
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> lin;
    lin.setTolerance(params.linear_tol);
    lin.preconditioner().setFillfactor(12);
    lin.compute(J);
    bool linear_ok = (lin.info() == Eigen::Success);
    if (linear_ok) {
      d = lin.solve(-F);
      linear_ok = (lin.info() == Eigen::Success) && d.allFinite();
    }
    if (!linear_ok) {
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
      lu.analyzePattern(J);
      lu.factorize(J);
      if (lu.info() != Eigen::Success) {
        rep.message = "linear solver failure";
        break;
      }
      d = lu.solve(-F);
    }

    // backtracking on the sup tension residual
    FieldState trial = st;
    bool accepted = false;
    double t = 1.0;
    for (int bt = 0; bt < params.max_backtracks; ++bt, t *= 0.5) {
      for (int id = 0; id < grid.size(); ++id) {
        if (um.base[id] < 0) continue;
        for (int c = 0; c < um.count[id]; ++c)
          trial.f[c][id] = st.f[c][id] + t * d(um.base[id] + c);
      }
      const double rn = sup_residual(trial);
      if (std::isfinite(rn) && rn < resnorm) {
        st = trial;
        resnorm = rn;
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      // nonlinear Gauss-Seidel fallback: local 1-node Newton on each unknown
      FieldState gs = st;
      std::vector<double> r0(m), r1(m);
      for (int sweep = 0; sweep < params.gs_sweeps; ++sweep) {
        for (int i = 0; i < grid.nrho(); ++i)
          for (int j = 0; j < grid.nz(); ++j) {
            const int id = grid.idx(i, j);
            if (um.base[id] < 0) continue;
            for (int c = 0; c < um.count[id]; ++c) {
              detail::residual_at(ctx, gs, i, j, r0.data());
              double& val = gs.f[c][id];
              const double save = val;
              const double delta = 1e-6 * (1.0 + std::abs(save));
              val = save + delta;
              detail::residual_at(ctx, gs, i, j, r1.data());
              val = save;
              const double slope = (r1[c] - r0[c]) / delta;
              if (std::abs(slope) > 1e-14) val = save - 0.7 * r0[c] / slope;
            }
          }
      }
      const double rn = sup_residual(gs);
      if (std::isfinite(rn) && rn < resnorm) {
        st = gs;
        resnorm = rn;
        accepted = true;
      }
    }

    ++rep.iterations;
    if (accepted) {
      stall = 0;
      rep.residual_history.push_back(resnorm);
      rep.energy_history.push_back(discrete_energy(st, rods));
    } else if (++stall >= params.patience) {
      rep.message = "stalled: no residual decrease";
      break;
    }
  }
  if (!rep.converged && rep.message.empty() && resnorm > params.tol)
    rep.message = "iteration budget exhausted";
  if (resnorm <= params.tol) rep.converged = true;

  rep.final_residual = resnorm;
  st.iterations = rep.iterations;
  st.converged = rep.converged;
  return {std::move(st), std::move(rep)};
}

struct ExhaustStage {
  double R = 0.0;
  FieldState state;
  SolveReport report;
  double cauchy_from_prev = -1.0;  // sup distance to the previous state on the probe ball
};

inline std::vector<ExhaustStage> exhaust(const SeedMap& seed, const RodConfig& rods,
                                         const SolveParams& params,
                                         const BoundaryData* boundary = nullptr) {
  if (params.R_schedule.empty()) throw std::invalid_argument("exhaust: empty R schedule");
  for (std::size_t i = 1; i < params.R_schedule.size(); ++i)
    if (!(params.R_schedule[i] > params.R_schedule[i - 1]))
      throw std::invalid_argument("exhaust: R schedule must be strictly increasing");

  const double R0 = params.probe_radius > 0.0 ? params.probe_radius : 0.5 * params.R_schedule.front();
  std::vector<ExhaustStage> out;
  const FieldState* prev = nullptr;
  for (double R : params.R_schedule) {
    Grid g = Grid::build(rods, R, params.h);
    auto [st, rep] = solve_on_ball(seed, rods, g, params, prev, boundary);
    ExhaustStage stage;
    stage.R = R;
    stage.report = std::move(rep);
    stage.state = std::move(st);
    if (prev) {
      // sup over probe-ball samples of dist(phi_prev, phi_new)
      double worst = 0.0;
      const Grid& pg = prev->grid;
      for (int i = 1; i < pg.nrho(); ++i)
        for (int j = 1; j + 1 < pg.nz(); ++j) {
          const AxisPoint x = pg.point(i, j);
          if (x.rho * x.rho + x.z * x.z > R0 * R0) continue;
          if (rods.on_sigma(x)) continue;
          const double u0 = axis_potential_u0(rods, x);
          const int k = seed.spec().k;
          TargetPoint a = TargetPoint::zero(k), b = TargetPoint::zero(k);
          a.u = u0 + prev->sample(0, x);
          b.u = u0 + stage.state.sample(0, x);
          a.v = prev->sample(1, x);
          b.v = stage.state.sample(1, x);
          for (int q = 0; q < k; ++q) {
            a.chi[q] = prev->sample(2 + q, x);
            b.chi[q] = stage.state.sample(2 + q, x);
            a.psi[q] = prev->sample(2 + k + q, x);
            b.psi[q] = stage.state.sample(2 + k + q, x);
          }
          worst = std::max(worst, distance(a, b));
        }
      stage.cauchy_from_prev = worst;
    }
    out.push_back(std::move(stage));
    prev = &out.back().state;
  }
  return out;
}

struct Step3Report {
  double violation_2q = 0.0;   // fraction of interior cells with 2Q > Lap(u-u0) + slack
  double violation_q = 0.0;    // same for the Q form
  double min_lap_ureg = 0.0;   // subharmonicity check
  int cells = 0;
  bool pass_2q = false;
  bool pass_q = false;
  bool pass_subharmonic = false;
};

inline Step3Report step3_inequality_check(const FieldState& st, const RodConfig& rods,
                                          const SingularMapSpec& spec) {
  detail::SolveContext ctx(st.grid, rods, spec);
  const Grid& g = st.grid;
  const int k = st.k;
  const int m = st.channels();
  Step3Report rep;
  rep.min_lap_ureg = 1e300;
  int bad2 = 0, bad1 = 0;
  const double h2 = g.hrho() * g.hrho();
  for (int i = 1; i + 1 < g.nrho(); ++i)
    for (int j = 1; j + 1 < g.nz(); ++j) {
      if (g.type(i, j) != NodeType::interior) continue;
      const int id = g.idx(i, j), e = g.idx(i + 1, j), w = g.idx(i - 1, j);
      const int n = g.idx(i, j + 1), s = g.idx(i, j - 1);
      const double hr = g.hrho();
      const double hm = ctx.hzm[j], hp = ctx.hzp[j];
      auto dzz = [&](const std::vector<double>& F) {
        return 2.0 * ((F[n] - F[id]) / hp - (F[id] - F[s]) / hm) / (hm + hp);
      };
      auto dz = [&](const std::vector<double>& F) {
        return (hm / (hp * (hm + hp))) * F[n] + ((hp - hm) / (hp * hm)) * F[id] -
               (hp / (hm * (hm + hp))) * F[s];
      };
      const auto& U = st.f[0];
      const double lap_ureg = (U[e] - 2.0 * U[id] + U[w]) / (hr * hr) +
                              (U[e] - U[w]) / (2.0 * hr) / g.rho[i] + dzz(U);
      rep.min_lap_ureg = std::min(rep.min_lap_ureg, lap_ureg);

      TargetPoint p = TargetPoint::zero(k);
      p.u = ctx.u0val[id] + U[id];
      TargetTangent gr(k), gz(k);
      for (int ch = 1; ch < m; ++ch) {
        const auto& F = st.f[ch];
        const double fr = (F[e] - F[w]) / (2.0 * hr);
        const double fz = dz(F);
        if (ch == 1) {
          p.v = F[id];
          gr.dv = fr;
          gz.dv = fz;
        } else if (ch < 2 + k) {
          p.chi[ch - 2] = F[id];
          gr.dchi[ch - 2] = fr;
          gz.dchi[ch - 2] = fz;
        } else {
          p.psi[ch - 2 - k] = F[id];
          gr.dpsi[ch - 2 - k] = fr;
          gz.dpsi[ch - 2 - k] = fz;
        }
      }
      const double Q = metric_inner(p, gr, gr) + metric_inner(p, gz, gz);
      const double slack = 50.0 * h2 * (1.0 + std::abs(lap_ureg) + 2.0 * Q);
      if (2.0 * Q > lap_ureg + slack) ++bad2;
      if (Q > lap_ureg + slack) ++bad1;
      ++rep.cells;
    }
  if (rep.cells > 0) {
    rep.violation_2q = static_cast<double>(bad2) / rep.cells;
    rep.violation_q = static_cast<double>(bad1) / rep.cells;
  }
  rep.pass_2q = rep.violation_2q < 0.01;
  rep.pass_q = rep.violation_q < 0.01;
  rep.pass_subharmonic = rep.min_lap_ureg > -50.0 * h2 * 10.0;
  return rep;
}

inline Step3Report step3_inequality_check(const FieldState& st, const SeedMap& seed) {
  return step3_inequality_check(st, seed.rods(), seed.spec());
}

}  // namespace rodmap
