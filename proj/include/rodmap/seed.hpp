#pragma once

// The approximately harmonic seed map phi~ = (u0, v~, chi~, psi~): equal to
// the singular maps phi_j near each rod component, interpolating between the
// component constants away from the axis, nearly harmonic at infinity.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rodmap/rods.hpp"
#include "rodmap/target.hpp"

namespace rodmap {

enum class AngularProfile {
  // Steps built from the angular parts of exact solutions of the linearized
  // field equations at u = -log(rho):  (1-cos)/2 for chi/psi and
  // (2 - 3cos + cos^3)/4 for v.  These kill the leading 1/r^3 tension term
  // and give the full (1+r^2)^{-2} decay.
  harmonic,
  // Quintic smoothstep in the polar angle, constant on cones within
  // theta_margin of the axis.  Decays one power slower for k >= 1.
  smoothstep,
};

struct SeedConfig {
  double transition_radius = 0.0;  // R*; 0 = auto (4x outermost endpoint)
  double theta_margin = std::numbers::pi / 8.0;  // smoothstep profile only
  double bump_width = 0.0;         // tube half-width in the mu variable; 0 = auto
  AngularProfile profile = AngularProfile::harmonic;

  static SeedConfig defaults(const RodConfig& rods) {
    SeedConfig cfg;
    cfg.transition_radius = 4.0 * std::max(rods.outer_extent(), 1.0);
    cfg.bump_width = 0.25 * rods.min_feature_length();
    return cfg;
  }

  void validate(const RodConfig& rods) const {
    if (!(transition_radius > 0.0) || !(bump_width > 0.0))
      throw std::invalid_argument("SeedConfig: transition_radius and bump_width must be positive");
    if (!(theta_margin > 0.0 && theta_margin < std::numbers::pi / 2.0))
      throw std::invalid_argument("SeedConfig: theta_margin out of (0, pi/2)");
    if (transition_radius < rods.outer_extent() + 2.0 * bump_width)
      throw std::invalid_argument("SeedConfig: transition_radius too small for rod configuration");
    // adjacent tubes must not overlap: each tube reaches bump_width/2 along
    // the axis into the neighboring gap
    for (const auto& g : rods.gaps)
      if (!(bump_width < 0.98 * (g.b - g.a)))
        throw std::invalid_argument("SeedConfig: bump_width too large, tubes overlap across a gap");
  }
};

namespace detail {

// quintic smoothstep: 0 at 0, 1 at 1, first and second derivatives vanish at both ends
inline double smooth5(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
inline double smooth5_d(double t) { return 30.0 * t * t * (1.0 + t * (-2.0 + t)); }
inline double smooth5_dd(double t) { return 60.0 * t * (1.0 + t * (-3.0 + 2.0 * t)); }

// C^2 cutoff: 1 on [0, 1/2], 0 on [1, inf)
struct Cutoff {
  double value = 0.0, d = 0.0, dd = 0.0;  // derivatives w.r.t. the argument
};
inline Cutoff cutoff_half(double t) {
  if (t <= 0.5) return {1.0, 0.0, 0.0};
  if (t >= 1.0) return {0.0, 0.0, 0.0};
  const double s = 2.0 * (t - 0.5);
  return {1.0 - smooth5(s), -2.0 * smooth5_d(s), -4.0 * smooth5_dd(s)};
}

// scalar field value with gradient in (rho,z) and axisymmetric Laplacian
struct ScalarJet {
  double f = 0.0;
  double frho = 0.0, fz = 0.0;
  double lap = 0.0;

  ScalarJet& operator+=(const ScalarJet& o) {
    f += o.f; frho += o.frho; fz += o.fz; lap += o.lap;
    return *this;
  }
};

// jet of c = cos(theta_p) about the on-axis point (0, p)
inline ScalarJet cos_about(double p, const AxisPoint& x) {
  const double dz = x.z - p;
  const double r = std::hypot(x.rho, dz);
  ScalarJet j;
  if (r == 0.0) throw std::domain_error("seed: evaluation at a profile center");
  j.f = dz / r;
  const double r3 = r * r * r;
  j.frho = -dz * x.rho / r3;
  j.fz = x.rho * x.rho / r3;
  j.lap = -2.0 * j.f / (r * r);
  return j;
}

// chain rule S(c) for a profile S with derivatives
template <class S, class Sd, class Sdd>
inline ScalarJet compose(const ScalarJet& c, S s, Sd sd, Sdd sdd) {
  ScalarJet j;
  const double gc2 = c.frho * c.frho + c.fz * c.fz;
  j.f = s(c.f);
  const double d1 = sd(c.f);
  j.frho = d1 * c.frho;
  j.fz = d1 * c.fz;
  j.lap = sdd(c.f) * gc2 + d1 * c.lap;
  return j;
}

}  // namespace detail

class SeedMap {
 public:
  SeedMap(RodConfig rods, SingularMapSpec spec, SeedConfig cfg)
      : rods_(std::move(rods)), spec_(std::move(spec)), cfg_(cfg) {
    spec_.validate(rods_);
    cfg_.validate(rods_);
    const int N = rods_.gap_count();
    gap_mid_.resize(N);
    for (int g = 0; g < N; ++g) gap_mid_[g] = 0.5 * (rods_.gaps[g].a + rods_.gaps[g].b);
  }

  const RodConfig& rods() const { return rods_; }
  const SingularMapSpec& spec() const { return spec_; }
  const SeedConfig& config() const { return cfg_; }
  int k() const { return spec_.k; }

  // mu_j: smooth tube coordinate of component j, zero exactly on the rod and
  // comparable to twice the axial offset near it
  detail::ScalarJet tube_coordinate(int j, const AxisPoint& x) const {
    auto [lo, hi] = rods_.component_span(j);
    detail::ScalarJet m;
    auto add_focus = [&](double e, double ray_sign) {
      // contribution r_e (+ ray_sign * (z - e) for a ray end)
      const double dz = x.z - e;
      const double r = std::hypot(x.rho, dz);
      m.f += r + ray_sign * dz;
      if (r > 0.0) {
        m.frho += x.rho / r;
        m.fz += dz / r + ray_sign;
        m.lap += 2.0 / r;
      }
    };
    if (std::isinf(lo) && std::isinf(hi)) {  // full axis
      m.f = 2.0 * x.rho;
      m.frho = 2.0;
      m.lap = 2.0 / std::max(x.rho, 1e-300);
      return m;
    }
    if (std::isinf(lo)) {  // bottom ray (-inf, hi]
      add_focus(hi, +1.0);
    } else if (std::isinf(hi)) {  // top ray [lo, inf)
      add_focus(lo, -1.0);
    } else {
      add_focus(lo, 0.0);
      add_focus(hi, 0.0);
      m.f -= (hi - lo);
    }
    return m;
  }

  bool in_declared_tube(int j, const AxisPoint& x) const {
    auto [lo, hi] = rods_.component_span(j);
    const bool unbounded = std::isinf(lo) || std::isinf(hi);
    if (unbounded && x.r() > 0.55 * cfg_.transition_radius) return false;
    return tube_coordinate(j, x).f < 0.5 * cfg_.bump_width;
  }

  // angular channels (v, chi_1..k, psi_1..k) alone; well-defined on Sigma,
  // where they take the component constants
  std::vector<double> angular(const AxisPoint& x) const {
    const int nch = 1 + 2 * k();
    std::vector<double> out(nch);
    for (int f = 0; f < nch; ++f) out[f] = angular_channel(f, x).f;
    return out;
  }

  TargetPoint point(const AxisPoint& x) const {
    MapJet j = jet(x);
    return j.p;
  }

  MapJet jet(const AxisPoint& x) const {
    const int kk = k();
    const int nch = 1 + 2 * kk;  // v, chi_1..k, psi_1..k
    std::vector<detail::ScalarJet> ch(nch);
    for (int f = 0; f < nch; ++f) ch[f] = angular_channel(f, x);

    MapJet jet(kk);
    // u-part: u~ = u0 exactly, harmonic away from Sigma
    jet.p.u = axis_potential_u0(rods_, x);
    auto [du_rho, du_z] = grad_u0(rods_, x);
    jet.grad[0].du = du_rho;
    jet.grad[1].du = du_z;
    jet.lap.du = 0.0;

    jet.p.v = ch[0].f;
    jet.grad[0].dv = ch[0].frho;
    jet.grad[1].dv = ch[0].fz;
    jet.lap.dv = ch[0].lap;
    for (int i = 0; i < kk; ++i) {
      const auto& c = ch[1 + i];
      const auto& p = ch[1 + kk + i];
      jet.p.chi[i] = c.f;
      jet.grad[0].dchi[i] = c.frho;
      jet.grad[1].dchi[i] = c.fz;
      jet.lap.dchi[i] = c.lap;
      jet.p.psi[i] = p.f;
      jet.grad[0].dpsi[i] = p.frho;
      jet.grad[1].dpsi[i] = p.fz;
      jet.lap.dpsi[i] = p.lap;
    }
    return jet;
  }

 private:
  // constant of channel f on component j
  double channel_constant(int f, int j) const {
    if (f == 0) return spec_.v[j];
    if (f <= k()) return spec_.chi[j][f - 1];
    return spec_.psi[j][f - 1 - k()];
  }

  // background interpolation field for one channel
  detail::ScalarJet background(int f, const AxisPoint& x) const {
    using namespace detail;
    const int N = rods_.gap_count();
    ScalarJet b;
    if (cfg_.profile == AngularProfile::harmonic) {
      // c_top + sum over gaps of (c_below - c_above) * step(cos about gap mid)
      b.f = channel_constant(f, N);
      const bool vchan = (f == 0);
      for (int g = 0; g < N; ++g) {
        const double jump = channel_constant(f, g) - channel_constant(f, g + 1);
        if (jump == 0.0) continue;
        ScalarJet c = cos_about(gap_mid_[g], x);
        ScalarJet s =
            vchan ? compose(c, [](double t) { return 0.25 * (2.0 - 3.0 * t + t * t * t); },
                            [](double t) { return 0.75 * (t * t - 1.0); },
                            [](double t) { return 1.5 * t; })
                  : compose(c, [](double t) { return 0.5 * (1.0 - t); },
                            [](double) { return -0.5; }, [](double) { return 0.0; });
        b.f += jump * s.f;
        b.frho += jump * s.frho;
        b.fz += jump * s.fz;
        b.lap += jump * s.lap;
      }
      return b;
    }
    // smoothstep profile in the global polar angle, top constant inside the
    // theta < theta_margin cone and bottom constant beyond pi - theta_margin
    const double top = channel_constant(f, N), bot = channel_constant(f, 0);
    const double r = x.r();
    if (r == 0.0) throw std::domain_error("seed: evaluation at the origin");
    const double theta = std::atan2(x.rho, x.z);
    const double t0 = cfg_.theta_margin, span = std::numbers::pi - 2.0 * t0;
    const double t = (theta - t0) / span;
    ScalarJet b2;
    if (t <= 0.0 || t >= 1.0) {
      b2.f = (t <= 0.0) ? top : bot;
      return b2;
    }
    const double P = top + (bot - top) * smooth5(t);
    const double Pd = (bot - top) * smooth5_d(t) / span;
    const double Pdd = (bot - top) * smooth5_dd(t) / (span * span);
    // theta jets: grad = (z, -rho)/r^2, Lap theta = cot(theta)/r^2
    const double r2 = r * r;
    b2.f = P;
    b2.frho = Pd * x.z / r2;
    b2.fz = -Pd * x.rho / r2;
    b2.lap = Pdd / r2 + Pd * (x.z / x.rho) / r2;
    return b2;
  }

  detail::ScalarJet angular_channel(int f, const AxisPoint& x) const {
    using namespace detail;
    ScalarJet F = background(f, x);
    const int N = rods_.gap_count();
    const double w = cfg_.bump_width;
    for (int j = 0; j <= N; ++j) {
      auto [lo, hi] = rods_.component_span(j);
      const bool unbounded = std::isinf(lo) || std::isinf(hi);
      ScalarJet mu = tube_coordinate(j, x);
      if (mu.f >= w && !unbounded) continue;
      Cutoff q = cutoff_half(mu.f / w);
      // eta = q(mu/w) * xi(r/R*) with xi a radial truncation for rays
      double eta = q.value;
      double eta_rho = q.d * mu.frho / w;
      double eta_z = q.d * mu.fz / w;
      const double gmu2 = mu.frho * mu.frho + mu.fz * mu.fz;
      double eta_lap = q.dd * gmu2 / (w * w) + q.d * mu.lap / w;
      if (unbounded) {
        const double r = x.r();
        const double Rc = cfg_.transition_radius;
        // xi(t) with t = r/Rc: 1 below 0.55, 0 above 0.9
        double t = (r / Rc - 0.55) / 0.35;
        Cutoff xi;
        if (t <= 0.0) xi = {1.0, 0.0, 0.0};
        else if (t >= 1.0) xi = {0.0, 0.0, 0.0};
        else xi = {1.0 - smooth5(t), -smooth5_d(t), -smooth5_dd(t)};
        const double sc = 1.0 / (0.35 * Rc);
        double xr = xi.d * sc, xrr = xi.dd * sc * sc;
        if (r == 0.0) continue;
        double xi_rho = xr * x.rho / r, xi_z = xr * x.z / r;
        double xi_lap = xrr + xr * 2.0 / r;
        // product rule
        double e = eta * xi.value;
        double e_rho = eta_rho * xi.value + eta * xi_rho;
        double e_z = eta_z * xi.value + eta * xi_z;
        double e_lap = eta_lap * xi.value + 2.0 * (eta_rho * xi_rho + eta_z * xi_z) + eta * xi_lap;
        eta = e; eta_rho = e_rho; eta_z = e_z; eta_lap = e_lap;
      }
      if (eta == 0.0 && eta_rho == 0.0 && eta_z == 0.0 && eta_lap == 0.0) continue;
      const double cj = channel_constant(f, j);
      // F <- F + eta (cj - F)
      ScalarJet G;
      G.f = F.f + eta * (cj - F.f);
      G.frho = (1.0 - eta) * F.frho + (cj - F.f) * eta_rho;
      G.fz = (1.0 - eta) * F.fz + (cj - F.f) * eta_z;
      G.lap = (1.0 - eta) * F.lap - 2.0 * (eta_rho * F.frho + eta_z * F.fz) + (cj - F.f) * eta_lap;
      F = G;
    }
    return F;
  }

  RodConfig rods_;
  SingularMapSpec spec_;
  SeedConfig cfg_;
  std::vector<double> gap_mid_;
};

inline SeedMap build_seed(const RodConfig& rods, const SingularMapSpec& spec, const SeedConfig& cfg) {
  return SeedMap(rods, spec, cfg);
}

// Decay diagnostics for || tau(phi~) ||: least-squares slope of log||tau||
// against log r over an (r, theta) sample grid, the fitted constant, and the
// measured constant c = sup ||tau|| (1+r^2)^{3/2} feeding the maximum
// principle bounds.
struct DecayReport {
  double slope = 0.0;        // fitted power of r
  double c_fit = 0.0;        // exp(intercept) of the fit
  double c_measured = 0.0;   // sup ||tau|| (1+r^2)^{3/2} over all samples
  double sup_tau = 0.0;
  std::size_t samples = 0;
};

inline DecayReport seed_tension_report(const SeedMap& seed, const std::vector<double>& radii,
                                       const std::vector<double>& angles,
                                       const std::vector<AxisPoint>& interior_samples = {}) {
  DecayReport rep;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (double r : radii) {
    if (r < seed.config().transition_radius)
      throw std::invalid_argument("seed_tension_report: radii must lie beyond the transition radius");
    double worst = 0.0;
    for (double th : angles) {
      AxisPoint x{r * std::sin(th), r * std::cos(th)};
      if (x.rho == 0.0) throw std::invalid_argument("seed_tension_report: sample on the axis");
      MapJet j = seed.jet(x);
      double t = tension_norm(j.p, tension(j));
      worst = std::max(worst, t);
      rep.c_measured = std::max(rep.c_measured, t * std::pow(1.0 + r * r, 1.5));
      rep.sup_tau = std::max(rep.sup_tau, t);
      ++rep.samples;
    }
    if (worst > 0.0) {
      const double X = 0.5 * std::log(1.0 + r * r);
      const double Y = std::log(worst);
      sx += X; sy += Y; sxx += X * X; sxy += X * Y;
      ++n;
    }
  }
  for (const auto& x : interior_samples) {
    MapJet j = seed.jet(x);
    double t = tension_norm(j.p, tension(j));
    const double r = x.r();
    rep.c_measured = std::max(rep.c_measured, t * std::pow(1.0 + r * r, 1.5));
    rep.sup_tau = std::max(rep.sup_tau, t);
    ++rep.samples;
  }
  if (n >= 2) {
    const double denom = n * sxx - sx * sx;
    rep.slope = (n * sxy - sx * sy) / denom;
    rep.c_fit = std::exp((sy - rep.slope * sx) / n);
  }
  return rep;
}

}  // namespace rodmap
