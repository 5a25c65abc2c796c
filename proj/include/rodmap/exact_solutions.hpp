#pragma once

// Closed-form stationary axisymmetric solutions used as oracles:
// Schwarzschild (k=0 static), Kerr (k=0 rotating) and magnetically-dual
// Reissner-Nordstrom (k=1 static charged), all in Weyl coordinates with the
// horizon rod on the gap (-sigma, sigma).

#include <cmath>
#include <stdexcept>

#include "rodmap/rods.hpp"
#include "rodmap/target.hpp"

namespace rodmap {

namespace detail {

// prolate inversion about rod endpoints +-sigma:
// r = M + (r_+ + r_-)/2, cos(theta) = (r_- - r_+)/(2 sigma)
struct ProlatePoint {
  double r, cth, sth2;
};

inline ProlatePoint prolate(double M, double sigma, const AxisPoint& x) {
  const double rp = std::hypot(x.rho, x.z - sigma);
  const double rm = std::hypot(x.rho, x.z + sigma);
  const double r = M + 0.5 * (rp + rm);
  // (rm - rp)/(2 sigma) = 2z/(rp + rm), cancellation-free
  const double c = std::clamp(2.0 * x.z / (rp + rm), -1.0, 1.0);
  // sin^2 th = ((rp+rm)^2 - 4z^2)/(rp+rm)^2 = 2(rho^2 + t)/(rp+rm)^2 with
  // t = rp rm - (z^2 - sigma^2), rationalized off the rod where it cancels
  const double zs = x.z * x.z - sigma * sigma;
  const double t = (zs > 0.0)
                       ? x.rho * x.rho * (x.rho * x.rho + 2.0 * x.z * x.z + 2.0 * sigma * sigma) /
                             (rp * rm + zs)
                       : rp * rm - zs;
  const double s2 = 2.0 * (x.rho * x.rho + t) / ((rp + rm) * (rp + rm));
  return {r, c, std::max(0.0, s2)};
}

// e^{2 lambda} = g_rho_rho of a Boyer-Lindquist-type metric with
// g_rr = Sgm / Dlt, g_thth = Sgm, through the Weyl coordinate change
// rho = sqrt(Dlt) sin th, z = (r - M) cos th.
inline double lambda_from_bl(double M, double Dlt, double Sgm, const ProlatePoint& p) {
  const double s = std::sqrt(p.sth2);
  const double sD = std::sqrt(Dlt);
  // d(rho,z)/d(r,th)
  const double a11 = (p.r - M) / sD * s, a12 = sD * p.cth;
  const double a21 = p.cth, a22 = -(p.r - M) * s;
  const double det = a11 * a22 - a12 * a21;
  // first column of the inverse: (dr/drho, dth/drho)
  const double dr_drho = a22 / det;
  const double dth_drho = -a21 / det;
  const double g_rho_rho = (Sgm / Dlt) * dr_drho * dr_drho + Sgm * dth_drho * dth_drho;
  return 0.5 * std::log(g_rho_rho);
}

}  // namespace detail

// Schwarzschild of mass M: horizon rod (-M, M); the harmonic map is exactly
// (u0, 0), so u_reg = 0 and v = 0 identically.
struct SchwarzschildWeyl {
  double M = 1.0;

  RodConfig rods() const {
    RodConfig r;
    r.gaps = {{-M, M}};
    return r;
  }

  double u(const AxisPoint& x) const {
    auto p = detail::prolate(M, M, x);
    const double X = p.r * p.r * p.sth2;  // g_phiphi
    if (X <= 0.0) throw std::domain_error("SchwarzschildWeyl: point on the axis");
    return -0.5 * std::log(X);
  }

  // lambda = K - U with e^{2K} = ((r_+ + r_-)^2 - 4M^2) / (4 r_+ r_-)
  double lambda(const AxisPoint& x) const {
    const double rp = std::hypot(x.rho, x.z - M);
    const double rm = std::hypot(x.rho, x.z + M);
    const double K = 0.5 * std::log(((rp + rm) * (rp + rm) - 4.0 * M * M) / (4.0 * rp * rm));
    const double Us = 0.5 * std::log((rp + rm - 2.0 * M) / (rp + rm + 2.0 * M));
    return K - Us;
  }
};

// Kerr of mass M, angular momentum J = M a (0 < a < M): k=0 Ernst map
//   u = -log(X)/2,  X = sin^2 th [(r^2+a^2)^2 - Dlt a^2 sin^2 th] / Sgm
//   v = M a cos th [ r^2 (cos^2 th - 3) - a^2 (1 + cos^2 th) ] / Sgm
// with axis values v -> -2Ma (top), +2Ma (bottom).
struct KerrWeyl {
  double M = 1.0;
  double a = 0.5;

  double sigma() const { return std::sqrt(M * M - a * a); }

  RodConfig rods() const {
    RodConfig r;
    r.gaps = {{-sigma(), sigma()}};
    return r;
  }

  double v_top() const { return -2.0 * M * a; }
  double v_bottom() const { return 2.0 * M * a; }

  struct Fields {
    double u, v, w, lambda;
  };

  Fields fields(const AxisPoint& x) const {
    auto p = detail::prolate(M, sigma(), x);
    const double r = p.r, s2 = p.sth2, c = p.cth;
    const double Dlt = r * r - 2.0 * M * r + a * a;
    const double Sgm = r * r + a * a * c * c;
    const double X = s2 * ((r * r + a * a) * (r * r + a * a) - Dlt * a * a * s2) / Sgm;
    if (X <= 0.0) throw std::domain_error("KerrWeyl: point on the axis");
    Fields f;
    f.u = -0.5 * std::log(X);
    f.v = M * a * c * (r * r * (c * c - 3.0) - a * a * (1.0 + c * c)) / Sgm;
    f.w = 2.0 * M * a * r * s2 / (Sgm * X);
    f.lambda = detail::lambda_from_bl(M, Dlt, Sgm, p);
    return f;
  }

  double u(const AxisPoint& x) const { return fields(x).u; }
  double v(const AxisPoint& x) const { return fields(x).v; }
  double w(const AxisPoint& x) const { return fields(x).w; }
  double lambda(const AxisPoint& x) const { return fields(x).lambda; }
};

// Magnetically parametrized Reissner-Nordstrom of mass M, charge Q (|Q| < M):
// static k=1 map with
//   u = -log(r sin th),  psi = Q cos th,  v = chi = 0,
// electric potential theta = Q / r, horizon rod (-sigma, sigma).
struct ReissnerNordstromWeyl {
  double M = 1.0;
  double Q = 0.5;

  double sigma() const { return std::sqrt(M * M - Q * Q); }

  RodConfig rods() const {
    RodConfig r;
    r.gaps = {{-sigma(), sigma()}};
    return r;
  }

  double psi_top() const { return Q; }
  double psi_bottom() const { return -Q; }

  struct Fields {
    double u, psi, theta, lambda;
  };

  Fields fields(const AxisPoint& x) const {
    auto p = detail::prolate(M, sigma(), x);
    const double X = p.r * p.r * p.sth2;
    if (X <= 0.0) throw std::domain_error("ReissnerNordstromWeyl: point on the axis");
    const double Dlt = p.r * p.r - 2.0 * M * p.r + Q * Q;
    Fields f;
    f.u = -0.5 * std::log(X);
    f.psi = Q * p.cth;
    f.theta = Q / p.r;
    f.lambda = detail::lambda_from_bl(M, Dlt, p.r * p.r, p);
    return f;
  }

  double u(const AxisPoint& x) const { return fields(x).u; }
  double psi(const AxisPoint& x) const { return fields(x).psi; }
  double lambda(const AxisPoint& x) const { return fields(x).lambda; }
};

}  // namespace rodmap
