#pragma once

// Reconstruction of the stationary axisymmetric spacetime from a solved map:
// twist form, frame-dragging potential w, conformal exponent lambda, electric
// potentials theta, metric assembly, and conical-singularity diagnostics.
//
//   ds^2 = -rho^2 e^{2u} dt^2 + e^{-2u} (dphi - w dt)^2 + e^{2 lambda}(drho^2 + dz^2)
//   A = -(chi dphi + theta dt)
//
// One-form components (certified against the Kerr and Reissner-Nordstrom
// closed forms and by plaquette closedness):
//   dw      = rho e^{4u} ( omega_z drho - omega_rho dz )
//   dtheta  = rho e^{2u} ( -psi_z drho + psi_rho dz ) + w dchi     (per index)
//   dlambda = [u_r + rho(u_r^2 - u_z^2 + e^{4u} (om_r^2 - om_z^2)/4
//                      + e^{2u} (|chi_r|^2 - |chi_z|^2 + |psi_r|^2 - |psi_z|^2))] drho
//           + [u_z + 2 rho(u_r u_z + e^{4u} om_r om_z / 4
//                      + e^{2u} (chi_r.chi_z + psi_r.psi_z))] dz

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rodmap/grid.hpp"
#include "rodmap/rods.hpp"
#include "rodmap/solver.hpp"

namespace rodmap {

struct TwistForm {
  std::vector<double> om_rho, om_z;  // per node; zero by symmetry at rho = 0
};

namespace detail {

// nodewise (d/drho, d/dz) of one channel: central differences, even reflection
// at the axis, second-order one-sided stencils on the rectangle edges
struct ChannelGrad {
  std::vector<double> drho, dz;
};

inline ChannelGrad channel_gradient(const Grid& g, const std::vector<double>& F) {
  ChannelGrad out;
  out.drho.assign(g.size(), 0.0);
  out.dz.assign(g.size(), 0.0);
  const double hr = g.hrho();
  const int nr = g.nrho(), nz = g.nz();
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nz; ++j) {
      const int id = g.idx(i, j);
      if (i == 0)
        out.drho[id] = 0.0;  // all channels even in rho
      else if (i + 1 < nr)
        out.drho[id] = (F[g.idx(i + 1, j)] - F[g.idx(i - 1, j)]) / (2.0 * hr);
      else
        out.drho[id] =
            (3.0 * F[id] - 4.0 * F[g.idx(i - 1, j)] + F[g.idx(i - 2, j)]) / (2.0 * hr);
      if (j == 0) {
        const double h = g.z[1] - g.z[0];
        out.dz[id] = (-3.0 * F[id] + 4.0 * F[g.idx(i, 1)] - F[g.idx(i, 2)]) / (2.0 * h);
      } else if (j + 1 == nz) {
        const double h = g.z[nz - 1] - g.z[nz - 2];
        out.dz[id] =
            (3.0 * F[id] - 4.0 * F[g.idx(i, j - 1)] + F[g.idx(i, j - 2)]) / (2.0 * h);
      } else {
        const double hm = g.z[j] - g.z[j - 1], hp = g.z[j + 1] - g.z[j];
        out.dz[id] = (hm / (hp * (hm + hp))) * F[g.idx(i, j + 1)] +
                     ((hp - hm) / (hp * hm)) * F[id] -
                     (hp / (hm * (hm + hp))) * F[g.idx(i, j - 1)];
      }
    }
  return out;
}

// all channel gradients plus the full u gradient (exact grad u0 + D_h u_reg)
// and e^{2u}; u-dependent entries are only meaningful off the axis column
struct StateDerivs {
  std::vector<ChannelGrad> ch;      // per state channel
  std::vector<double> u_rho, u_z;   // full u gradient (i >= 1)
  std::vector<double> e2u;          // exp(2 u) (i >= 1)
};

inline StateDerivs state_derivs(const FieldState& st, const RodConfig& rods) {
  const Grid& g = st.grid;
  StateDerivs d;
  d.ch.reserve(st.channels());
  for (int c = 0; c < st.channels(); ++c) d.ch.push_back(channel_gradient(g, st.f[c]));
  d.u_rho.assign(g.size(), 0.0);
  d.u_z.assign(g.size(), 0.0);
  d.e2u.assign(g.size(), 0.0);
  for (int i = 1; i < g.nrho(); ++i)
    for (int j = 0; j < g.nz(); ++j) {
      const int id = g.idx(i, j);
      const AxisPoint x = g.point(i, j);
      auto [gr, gz] = grad_u0(rods, x);
      d.u_rho[id] = gr + d.ch[0].drho[id];
      d.u_z[id] = gz + d.ch[0].dz[id];
      d.e2u[id] = std::exp(2.0 * (axis_potential_u0(rods, x) + st.f[0][id]));
    }
  return d;
}

// a plaquette is admissible when none of its nodes carries Dirichlet data:
// the shell holds the (non-harmonic) boundary map, where no closedness is owed
inline bool plaquette_interior(const Grid& g, int i, int j) {
  return g.type(i, j) != NodeType::dirichlet && g.type(i + 1, j) != NodeType::dirichlet &&
         g.type(i, j + 1) != NodeType::dirichlet && g.type(i + 1, j + 1) != NodeType::dirichlet;
}

// max over interior plaquettes (i >= 1) of |loop integral| / area
inline double closedness_residual(const Grid& g, const std::vector<double>& frho,
                                  const std::vector<double>& fz) {
  double worst = 0.0;
  const double hr = g.hrho();
  for (int i = 1; i + 1 < g.nrho(); ++i)
    for (int j = 0; j + 1 < g.nz(); ++j) {
      if (!plaquette_interior(g, i, j)) continue;
      const double hz = g.z[j + 1] - g.z[j];
      const int a = g.idx(i, j), b = g.idx(i + 1, j), c = g.idx(i + 1, j + 1), d = g.idx(i, j + 1);
      const double loop = 0.5 * (frho[a] + frho[b]) * hr + 0.5 * (fz[b] + fz[c]) * hz -
                          0.5 * (frho[d] + frho[c]) * hr - 0.5 * (fz[a] + fz[d]) * hz;
      worst = std::max(worst, std::abs(loop) / (hr * hz));
    }
  return worst;
}

// integrate a one-form over the grid from a base node: first along the base
// column, then along every row
inline std::vector<double> integrate_tree(const Grid& g, const std::vector<double>& frho,
                                          const std::vector<double>& fz, int base_i, int base_j) {
  std::vector<double> val(g.size(), 0.0);
  const double hr = g.hrho();
  for (int j = base_j + 1; j < g.nz(); ++j)
    val[g.idx(base_i, j)] = val[g.idx(base_i, j - 1)] +
                            0.5 * (fz[g.idx(base_i, j - 1)] + fz[g.idx(base_i, j)]) *
                                (g.z[j] - g.z[j - 1]);
  for (int j = base_j - 1; j >= 0; --j)
    val[g.idx(base_i, j)] = val[g.idx(base_i, j + 1)] -
                            0.5 * (fz[g.idx(base_i, j)] + fz[g.idx(base_i, j + 1)]) *
                                (g.z[j + 1] - g.z[j]);
  for (int j = 0; j < g.nz(); ++j) {
    for (int i = base_i + 1; i < g.nrho(); ++i)
      val[g.idx(i, j)] =
          val[g.idx(i - 1, j)] + 0.5 * (frho[g.idx(i - 1, j)] + frho[g.idx(i, j)]) * hr;
    for (int i = base_i - 1; i >= 0; --i)
      val[g.idx(i, j)] =
          val[g.idx(i + 1, j)] - 0.5 * (frho[g.idx(i, j)] + frho[g.idx(i + 1, j)]) * hr;
  }
  return val;
}

// z index nearest the equator
inline int equator_index(const Grid& g) {
  int best = 0;
  for (int j = 1; j < g.nz(); ++j)
    if (std::abs(g.z[j]) < std::abs(g.z[best])) best = j;
  return best;
}

}  // namespace detail

// omega = 2 (dv + chi . dpsi + cross_sign * psi . dchi).  cross_sign = -1
// (matching the metric twist one-form W) is the convention under which
// d(e^{4u} i_xi * omega) = 0 follows from the harmonic map equations; +1 is
// retained as a sensitivity flag and fails the closedness test for k >= 1.
inline TwistForm twist_form(const FieldState& st, const RodConfig& rods, double cross_sign = -1.0) {
  const Grid& g = st.grid;
  detail::StateDerivs d = detail::state_derivs(st, rods);
  TwistForm out;
  out.om_rho.assign(g.size(), 0.0);
  out.om_z.assign(g.size(), 0.0);
  const int k = st.k;
  for (int id = 0; id < g.size(); ++id) {
    double wr = d.ch[1].drho[id], wz = d.ch[1].dz[id];
    for (int q = 0; q < k; ++q) {
      const double chi = st.f[2 + q][id], psi = st.f[2 + k + q][id];
      wr += chi * d.ch[2 + k + q].drho[id] + cross_sign * psi * d.ch[2 + q].drho[id];
      wz += chi * d.ch[2 + k + q].dz[id] + cross_sign * psi * d.ch[2 + q].dz[id];
    }
    out.om_rho[id] = 2.0 * wr;
    out.om_z[id] = 2.0 * wz;
  }
  return out;
}

struct PotentialGrid {
  std::vector<double> val;
  std::vector<double> frho, fz;  // the integrated one-form, per node (i >= 1)
  double closedness = 0.0;       // max plaquette loop integral / area
};

// closedness over plaquettes at least mindist away from Sigma and shell_margin
// inside the Dirichlet shell; the e^{2u}, e^{4u} weights amplify truncation
// error near Sigma and the staircase ball boundary is only first-order
// accurate, so grid convergence of the loop residual is measured at a standoff
inline double closedness_masked(const Grid& g, const PotentialGrid& p, const RodConfig& rods,
                                double mindist, double shell_margin = 0.0) {
  double worst = 0.0;
  const double hr = g.hrho();
  for (int i = 1; i + 1 < g.nrho(); ++i)
    for (int j = 0; j + 1 < g.nz(); ++j) {
      if (!detail::plaquette_interior(g, i, j)) continue;
      if (dist_to_sigma(rods, g.point(i, j)) < mindist ||
          dist_to_sigma(rods, g.point(i + 1, j + 1)) < mindist)
        continue;
      if (g.point(i + 1, j).r() > g.R - shell_margin ||
          g.point(i + 1, j + 1).r() > g.R - shell_margin ||
          g.point(i, j).r() > g.R - shell_margin || g.point(i, j + 1).r() > g.R - shell_margin)
        continue;
      const double hz = g.z[j + 1] - g.z[j];
      const int a = g.idx(i, j), b = g.idx(i + 1, j), c = g.idx(i + 1, j + 1),
                d = g.idx(i, j + 1);
      const double loop = 0.5 * (p.frho[a] + p.frho[b]) * hr + 0.5 * (p.fz[b] + p.fz[c]) * hz -
                          0.5 * (p.frho[d] + p.frho[c]) * hr - 0.5 * (p.fz[a] + p.fz[d]) * hz;
      worst = std::max(worst, std::abs(loop) / (hr * hz));
    }
  return worst;
}

// dw = e^{4u} i_xi * omega, normalized to w = 0 at the far upper corner (the
// asymptotically non-rotating frame).  The drho component vanishes on the axis
// (odd) but the dz component has a finite limit there (rho e^{4u} ~ rho^{-3}
// against omega_rho ~ rho^3); that weight amplifies the discrete-derivative
// error of the angular channels near the axis, so the integration tree is
// rooted at the outer equator, keeping the amplified error local to the
// near-axis nodes instead of feeding it through a base column at rho = h.
inline PotentialGrid integrate_w(const FieldState& st, const RodConfig& rods,
                                 const TwistForm& om) {
  const Grid& g = st.grid;
  detail::StateDerivs d = detail::state_derivs(st, rods);
  std::vector<double> frho(g.size(), 0.0), fz(g.size(), 0.0);
  for (int i = 1; i < g.nrho(); ++i)
    for (int j = 0; j < g.nz(); ++j) {
      const int id = g.idx(i, j);
      const double a = g.rho[i] * d.e2u[id] * d.e2u[id];
      frho[id] = a * om.om_z[id];
      fz[id] = -a * om.om_rho[id];
    }
  PotentialGrid out;
  out.closedness = detail::closedness_residual(g, frho, fz);
  out.val = detail::integrate_tree(g, frho, fz, g.nrho() - 1, detail::equator_index(g));
  const double anchor = out.val[g.idx(g.nrho() - 1, g.nz() - 1)];
  for (double& v : out.val) v -= anchor;
  for (int j = 0; j < g.nz(); ++j)
    out.val[g.idx(0, j)] = out.val[g.idx(1, j)] - 0.5 * g.hrho() * frho[g.idx(1, j)];
  out.frho = std::move(frho);
  out.fz = std::move(fz);
  return out;
}

// dlambda integrated from the outer-equator base point where lambda = 0; the
// axis column (where the integrand degenerates) is filled from its neighbor,
// consistent with d lambda_rho -> finite and the Richardson usage at i >= 1
inline PotentialGrid integrate_lambda(const FieldState& st, const RodConfig& rods,
                                      const TwistForm& om) {
  const Grid& g = st.grid;
  detail::StateDerivs d = detail::state_derivs(st, rods);
  const int k = st.k;
  std::vector<double> frho(g.size(), 0.0), fz(g.size(), 0.0);
  for (int i = 1; i < g.nrho(); ++i)
    for (int j = 0; j < g.nz(); ++j) {
      const int id = g.idx(i, j);
      const double rho = g.rho[i];
      const double e2u = d.e2u[id], e4u = e2u * e2u;
      double a_rho = 0.0, a_mix = 0.0;  // e^{2u}(|X_r|^2 - |X_z|^2), e^{2u} X_r.X_z
      for (int q = 0; q < 2 * k; ++q) {
        const auto& cg = d.ch[2 + q];
        a_rho += cg.drho[id] * cg.drho[id] - cg.dz[id] * cg.dz[id];
        a_mix += cg.drho[id] * cg.dz[id];
      }
      const double ur = d.u_rho[id], uz = d.u_z[id];
      frho[id] = ur + rho * (ur * ur - uz * uz +
                             0.25 * e4u * (om.om_rho[id] * om.om_rho[id] -
                                           om.om_z[id] * om.om_z[id]) +
                             e2u * a_rho);
      fz[id] = uz + 2.0 * rho * (ur * uz + 0.25 * e4u * om.om_rho[id] * om.om_z[id] +
                                 e2u * a_mix);
    }
  PotentialGrid out;
  out.closedness = detail::closedness_residual(g, frho, fz);
  out.val = detail::integrate_tree(g, frho, fz, g.nrho() - 1, detail::equator_index(g));
  for (int j = 0; j < g.nz(); ++j) out.val[g.idx(0, j)] = out.val[g.idx(1, j)];
  out.frho = std::move(frho);
  out.fz = std::move(fz);
  return out;
}

// dtheta_q = e^{2u} i_xi * dpsi_q + w dchi_q, normalized to 0 at the outer
// equator base point; the +w dchi coupling is the sign under which d(dtheta)
// vanishes on the psi harmonic-map equation (the residual of the opposite sign
// is -2 rho e^{4u} omega . grad chi)
inline std::vector<PotentialGrid> integrate_theta(const FieldState& st, const RodConfig& rods,
                                                  const PotentialGrid& w) {
  const Grid& g = st.grid;
  detail::StateDerivs d = detail::state_derivs(st, rods);
  const int k = st.k;
  std::vector<PotentialGrid> out;
  out.reserve(k);
  for (int q = 0; q < k; ++q) {
    std::vector<double> frho(g.size(), 0.0), fz(g.size(), 0.0);
    const auto& gpsi = d.ch[2 + k + q];
    const auto& gchi = d.ch[2 + q];
    for (int i = 1; i < g.nrho(); ++i)
      for (int j = 0; j < g.nz(); ++j) {
        const int id = g.idx(i, j);
        const double a = g.rho[i] * d.e2u[id];
        frho[id] = -a * gpsi.dz[id] + w.val[id] * gchi.drho[id];
        fz[id] = a * gpsi.drho[id] + w.val[id] * gchi.dz[id];
      }
    PotentialGrid pot;
    pot.closedness = detail::closedness_residual(g, frho, fz);
    pot.val = detail::integrate_tree(g, frho, fz, g.nrho() - 1, detail::equator_index(g));
    for (int j = 0; j < g.nz(); ++j)
      pot.val[g.idx(0, j)] = pot.val[g.idx(1, j)] - 0.5 * g.hrho() * frho[g.idx(1, j)];
    pot.frho = std::move(frho);
    pot.fz = std::move(fz);
    out.push_back(std::move(pot));
  }
  return out;
}

struct SpacetimeFields {
  TwistForm omega;
  PotentialGrid w;
  PotentialGrid lambda;
  std::vector<PotentialGrid> theta;
};

inline SpacetimeFields reconstruct(const FieldState& st, const RodConfig& rods,
                                   double cross_sign = -1.0) {
  SpacetimeFields f;
  f.omega = twist_form(st, rods, cross_sign);
  f.w = integrate_w(st, rods, f.omega);
  f.lambda = integrate_lambda(st, rods, f.omega);
  f.theta = integrate_theta(st, rods, f.w);
  return f;
}

struct MetricSample {
  AxisPoint x;
  double g_tt = 0.0, g_tphi = 0.0, g_phiphi = 0.0, g_rhorho = 0.0;
  std::vector<double> A_phi, A_t;
  double det_tphi = 0.0;  // must equal -rho^2 identically
  bool signature_ok = false;
};

// metric and gauge potential at grid nodes (indices i >= 1)
inline std::vector<MetricSample> assemble_metric(const FieldState& st, const RodConfig& rods,
                                                 const SpacetimeFields& f,
                                                 const std::vector<std::pair<int, int>>& nodes) {
  const Grid& g = st.grid;
  std::vector<MetricSample> out;
  out.reserve(nodes.size());
  for (auto [i, j] : nodes) {
    if (i < 1) throw std::invalid_argument("assemble_metric: sample on the axis column");
    const int id = g.idx(i, j);
    const AxisPoint x = g.point(i, j);
    const double u = axis_potential_u0(rods, x) + st.f[0][id];
    const double e2u = std::exp(2.0 * u);
    MetricSample s;
    s.x = x;
    const double w = f.w.val[id];
    s.g_phiphi = 1.0 / e2u;
    s.g_tphi = -w / e2u;
    s.g_tt = -x.rho * x.rho * e2u + w * w / e2u;
    s.g_rhorho = std::exp(2.0 * f.lambda.val[id]);
    s.det_tphi = s.g_tt * s.g_phiphi - s.g_tphi * s.g_tphi;
    for (int q = 0; q < st.k; ++q) {
      s.A_phi.push_back(-st.f[2 + q][id]);
      s.A_t.push_back(-f.theta[q].val[id]);
    }
    s.signature_ok = s.g_phiphi > 0.0 && s.g_rhorho > 0.0 && s.det_tphi < 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

struct ConicalEntry {
  int component = 0;
  bool bounded = false;
  double deficit = 0.0;  // b = lim_{rho->0} (lambda + u + log rho)
  bool regular = false;  // |b| < tolerance
};

struct ConicalReport {
  std::vector<ConicalEntry> entries;  // bounded components; unbounded appended as checks
  double tolerance = 1e-3;
};

// Richardson extrapolation of b(rho) = lambda + u + log rho over the three
// nearest off-axis rows (even expansion b0 + b2 rho^2 + b4 rho^4).  Deficits
// are referenced to the upper unbounded ray: lambda is only defined up to an
// additive constant (here fixed at the outer equator, which differs from the
// asymptotic normalization by O(mass/R)), and regularity of the upper ray is
// the standard gauge; the lower-ray entry is then a genuine,
// normalization-independent consistency check.
inline ConicalReport conical_deficit(const FieldState& st, const RodConfig& rods,
                                     const SpacetimeFields& f, double tolerance = 1e-3) {
  const Grid& g = st.grid;
  ConicalReport rep;
  rep.tolerance = tolerance;
  const int N = rods.gap_count();
  for (int comp = 0; comp <= N; ++comp) {
    auto [lo, hi] = rods.component_span(comp);
    const bool bounded = std::isfinite(lo) && std::isfinite(hi);
    // probe z: midpoint for bounded components, a point at unit depth (capped
    // by the domain) into the rays for unbounded ones
    double zprobe;
    if (bounded)
      zprobe = 0.5 * (lo + hi);
    else if (std::isinf(lo))
      zprobe = std::min(hi - 1.0, 0.5 * (g.z.front() + hi));
    else
      zprobe = std::max(lo + 1.0, 0.5 * (lo + g.z.back()));
    int jbest = 0;
    for (int j = 1; j < g.nz(); ++j)
      if (std::abs(g.z[j] - zprobe) < std::abs(g.z[jbest] - zprobe)) jbest = j;
    double b[3], r2[3];
    for (int s = 0; s < 3; ++s) {
      const int i = 1 + s;
      const int id = g.idx(i, jbest);
      const AxisPoint x = g.point(i, jbest);
      const double u = axis_potential_u0(rods, x) + st.f[0][id];
      b[s] = f.lambda.val[id] + u + std::log(x.rho);
      r2[s] = x.rho * x.rho;
    }
    // quadratic-in-rho^2 extrapolation to rho = 0
    const double l0 = (r2[1] * r2[2]) / ((r2[0] - r2[1]) * (r2[0] - r2[2]));
    const double l1 = (r2[0] * r2[2]) / ((r2[1] - r2[0]) * (r2[1] - r2[2]));
    const double l2 = (r2[0] * r2[1]) / ((r2[2] - r2[0]) * (r2[2] - r2[1]));
    ConicalEntry e;
    e.component = comp;
    e.bounded = bounded;
    e.deficit = l0 * b[0] + l1 * b[1] + l2 * b[2];
    rep.entries.push_back(e);
  }
  const double ref = rep.entries.back().deficit;  // upper unbounded ray
  for (auto& e : rep.entries) {
    e.deficit -= ref;
    e.regular = std::abs(e.deficit) < tolerance;
  }
  return rep;
}

}  // namespace rodmap
