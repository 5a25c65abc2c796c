#pragma once

// Rod structure on the z-axis: the singular set Sigma = axis minus N open
// gaps, its closed-form regularized potential u0, and the Sigma-singular maps
// phi_j = (u0, v_j, chi_j, psi_j) that prescribe singular behavior.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rodmap/target.hpp"

namespace rodmap {

struct AxisPoint {
  double rho = 0.0;
  double z = 0.0;
  double r() const { return std::hypot(rho, z); }
};

struct Interval {
  double a, b;  // open interval (a, b)
};

// The N gaps I_j = (a_j, b_j); components of Sigma are indexed 0..N with
// component 0 the bottom unbounded ray z <= a_1 and component N the top
// unbounded ray z >= b_N.
struct RodConfig {
  std::vector<Interval> gaps;

  int gap_count() const { return static_cast<int>(gaps.size()); }
  int component_count() const { return gap_count() + 1; }

  void validate() const {
    if (gaps.empty()) throw std::invalid_argument("RodConfig: need at least one gap (N >= 1)");
    for (const auto& g : gaps)
      if (!(g.a < g.b)) throw std::invalid_argument("RodConfig: gap with a >= b");
    for (std::size_t j = 1; j < gaps.size(); ++j)
      if (!(gaps[j - 1].b < gaps[j].a))
        throw std::invalid_argument("RodConfig: gaps overlap or are unordered");
  }

  // component j occupies [lo, hi] on the axis (infinite ends for j=0, N)
  std::pair<double, double> component_span(int j) const {
    const double inf = std::numeric_limits<double>::infinity();
    const int N = gap_count();
    if (j < 0 || j > N) throw std::out_of_range("RodConfig: component index");
    double lo = (j == 0) ? -inf : gaps[j - 1].b;
    double hi = (j == N) ? inf : gaps[j].a;
    return {lo, hi};
  }

  // largest |endpoint|, 0 if no gaps
  double outer_extent() const {
    double m = 0.0;
    for (const auto& g : gaps) m = std::max({m, std::abs(g.a), std::abs(g.b)});
    return m;
  }

  double min_feature_length() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& g : gaps) m = std::min(m, g.b - g.a);
    for (std::size_t j = 1; j < gaps.size(); ++j) m = std::min(m, gaps[j].a - gaps[j - 1].b);
    return m;
  }

  // true if (rho=0, z) lies on a rod (closed components include endpoints)
  bool on_sigma(const AxisPoint& x) const {
    if (x.rho != 0.0) return false;
    for (const auto& g : gaps)
      if (x.z > g.a && x.z < g.b) return false;
    return true;
  }
};

// Prescribed constants (v_j, chi_j, psi_j) per component; chi_j = 0 in the
// Reduced Problem but kept configurable.
struct SingularMapSpec {
  int k = 0;
  std::vector<double> v;                  // size N+1
  std::vector<std::vector<double>> chi;   // size N+1, each length k
  std::vector<std::vector<double>> psi;   // size N+1, each length k

  static SingularMapSpec zeros(int k, int components) {
    SingularMapSpec s;
    s.k = k;
    s.v.assign(components, 0.0);
    s.chi.assign(components, std::vector<double>(k, 0.0));
    s.psi.assign(components, std::vector<double>(k, 0.0));
    return s;
  }

  void validate(const RodConfig& rods) const {
    const std::size_t n = static_cast<std::size_t>(rods.component_count());
    if (v.size() != n || chi.size() != n || psi.size() != n)
      throw std::invalid_argument("SingularMapSpec: need one constant set per component");
    for (std::size_t j = 0; j < n; ++j)
      if (chi[j].size() != static_cast<std::size_t>(k) || psi[j].size() != static_cast<std::size_t>(k))
        throw std::invalid_argument("SingularMapSpec: chi/psi length != k");
  }

  TargetPoint constant(int j, double u = 0.0) const {
    return TargetPoint(u, v[j], chi[j], psi[j]);
  }
};

namespace detail {

// log(z - c + r_c) with the cancellation-free branch for z < c:
// z - c + r_c = rho^2 / (r_c + (c - z)).  Returns the coefficient of log(rho)
// separately so axis limits stay exact.
struct LogEndpoint {
  double regular;    // branch-stable part
  int log_rho_coeff; // multiples of log(rho)
};

inline LogEndpoint log_f(double c, const AxisPoint& x) {
  const double dz = x.z - c;
  const double rc = std::hypot(x.rho, dz);
  if (dz < 0.0) return {-std::log(rc - dz), 2};
  if (rc + dz <= 0.0) throw std::domain_error("u0: evaluation at a gap endpoint on the axis");
  return {std::log(dz + rc), 0};
}

}  // namespace detail

// Newtonian potential of the segment [a,b] on the axis with line density 1/2:
//   (1/2) log( (z-a+r_a) / (z-b+r_b) ).
inline double gap_potential(double a, double b, const AxisPoint& x) {
  if (!(a < b)) throw std::invalid_argument("gap_potential: a >= b");
  if (x.rho == 0.0 && x.z >= a && x.z <= b)
    throw std::domain_error("gap_potential: point on the charged segment");
  auto fa = detail::log_f(a, x);
  auto fb = detail::log_f(b, x);
  double val = 0.5 * (fa.regular - fb.regular);
  int lc = fa.log_rho_coeff - fb.log_rho_coeff;
  if (lc != 0) val += 0.5 * lc * std::log(x.rho);
  return val;
}

// Regularized potential of the density-1/2 charge on Sigma:
//   u0 = -log(rho) - sum_j gap_potential(a_j, b_j, x),
// harmonic off Sigma, u0 -> +inf on Sigma, u0 + log(rho) -> 0 at infinity,
// finite on the open gaps.
inline double axis_potential_u0(const RodConfig& rods, const AxisPoint& x) {
  if (rods.on_sigma(x)) throw std::domain_error("u0: point on Sigma");
  double val = 0.0;
  int lc = -1;
  for (const auto& g : rods.gaps) {
    auto fa = detail::log_f(g.a, x);
    auto fb = detail::log_f(g.b, x);
    val += 0.5 * (fb.regular - fa.regular);
    lc += (fb.log_rho_coeff - fa.log_rho_coeff) / 2;
  }
  if (lc != 0) {
    if (x.rho == 0.0) throw std::domain_error("u0: point on Sigma");
    val += lc * std::log(x.rho);
  }
  return val;
}

// Exact partial derivatives (d_rho u0, d_z u0).  Uses the identities
//   d_rho log f_c = (1 - (z-c)/r_c) / rho,   d_z log f_c = 1 / r_c.
inline std::pair<double, double> grad_u0(const RodConfig& rods, const AxisPoint& x) {
  if (rods.on_sigma(x)) throw std::domain_error("grad_u0: point on Sigma");
  double dz_sum = 0.0;
  double bracket = -1.0;  // coefficient of 1/rho
  for (const auto& g : rods.gaps) {
    const double dza = x.z - g.a, dzb = x.z - g.b;
    const double ra = std::hypot(x.rho, dza), rb = std::hypot(x.rho, dzb);
    bracket += 0.5 * (dza / ra - dzb / rb);
    dz_sum += 0.5 * (1.0 / rb - 1.0 / ra);
  }
  double drho;
  if (x.rho == 0.0) {
    drho = 0.0;  // gap row: u0 even in rho
  } else {
    drho = bracket / x.rho;
  }
  return {drho, dz_sum};
}

// phi_j(x) = (u0(x), v_j, chi_j, psi_j): Sigma-singular map into the geodesic
// t -> (t, v_j, chi_j, psi_j).
inline TargetPoint singular_map(const RodConfig& rods, const SingularMapSpec& spec, int j,
                                const AxisPoint& x) {
  if (j < 0 || j >= rods.component_count()) throw std::out_of_range("singular_map: index");
  return spec.constant(j, axis_potential_u0(rods, x));
}

// Euclidean distance from (rho, z) to the nearest point of Sigma.
inline double dist_to_sigma(const RodConfig& rods, const AxisPoint& x) {
  const int N = rods.gap_count();
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= N; ++j) {
    auto [lo, hi] = rods.component_span(j);
    double d;
    if (x.z < lo)
      d = std::hypot(x.rho, lo - x.z);
    else if (x.z > hi)
      d = std::hypot(x.rho, x.z - hi);
    else
      d = x.rho;
    best = std::min(best, d);
  }
  return best;
}

}  // namespace rodmap
