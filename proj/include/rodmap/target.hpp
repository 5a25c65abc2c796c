#pragma once

// Pointwise geometry of the complex hyperbolic target H^{k+1}_C in Busemann
// (horospherical) coordinates p = (u, v, chi, psi), chi,psi in R^k.
// Metric: ds^2 = du^2 + e^{4u} (dv + chi.dpsi - psi.dchi)^2
//                     + e^{2u} (dchi.dchi + dpsi.dpsi).

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rodmap {

struct HyperbolicModel {
  int k = 0;  // number of gauge fields; k=0 is the vacuum (real hyperbolic plane)
  int dim() const { return 2 * k + 2; }
};

struct TargetPoint {
  double u = 0.0;
  double v = 0.0;
  std::vector<double> chi;
  std::vector<double> psi;

  TargetPoint() = default;
  TargetPoint(double u_, double v_, std::vector<double> chi_, std::vector<double> psi_)
      : u(u_), v(v_), chi(std::move(chi_)), psi(std::move(psi_)) {
    if (chi.size() != psi.size())
      throw std::invalid_argument("TargetPoint: chi/psi length mismatch");
  }
  static TargetPoint zero(int k) {
    return TargetPoint(0.0, 0.0, std::vector<double>(k, 0.0), std::vector<double>(k, 0.0));
  }
  int k() const { return static_cast<int>(chi.size()); }
};

struct TargetTangent {
  double du = 0.0;
  double dv = 0.0;
  std::vector<double> dchi;
  std::vector<double> dpsi;

  TargetTangent() = default;
  explicit TargetTangent(int k) : dchi(k, 0.0), dpsi(k, 0.0) {}
  TargetTangent(double du_, double dv_, std::vector<double> dchi_, std::vector<double> dpsi_)
      : du(du_), dv(dv_), dchi(std::move(dchi_)), dpsi(std::move(dpsi_)) {}
  int k() const { return static_cast<int>(dchi.size()); }
};

// First and second derivative data of a map R^3 \ Sigma -> H^{k+1}_C at one
// domain point, for axisymmetric maps: gradients along (rho, z) and the
// axisymmetric Laplacian  Lf = f_rr + f_r/rho + f_zz  of each coordinate.
struct MapJet {
  TargetPoint p;
  std::array<TargetTangent, 2> grad;  // [0] = d/d rho, [1] = d/d z
  TargetTangent lap;

  explicit MapJet(int k) : p(TargetPoint::zero(k)), grad{TargetTangent(k), TargetTangent(k)}, lap(k) {}
  MapJet() : MapJet(0) {}
  int k() const { return p.k(); }
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void check_same_k(const TargetPoint& p, const TargetTangent& t) {
  if (p.k() != t.k()) throw std::invalid_argument("target: point/tangent dimension mismatch");
}

// one-form coefficient of (dv + chi.dpsi - psi.dchi) applied to a tangent
inline double twist_component(const TargetPoint& p, const TargetTangent& t) {
  return t.dv + detail::dot(p.chi, t.dpsi) - detail::dot(p.psi, t.dchi);
}

}  // namespace detail

inline double metric_inner(const TargetPoint& p, const TargetTangent& X, const TargetTangent& Y) {
  detail::check_same_k(p, X);
  detail::check_same_k(p, Y);
  const double wX = detail::twist_component(p, X);
  const double wY = detail::twist_component(p, Y);
  const double e2u = std::exp(2.0 * p.u);
  const double e4u = e2u * e2u;
  return X.du * Y.du + e4u * wX * wY +
         e2u * (detail::dot(X.dchi, Y.dchi) + detail::dot(X.dpsi, Y.dpsi));
}

inline double tension_norm(const TargetPoint& p, const TargetTangent& tau) {
  return std::sqrt(std::max(0.0, metric_inner(p, tau, tau)));
}

// ||d phi||^2 = sum over ambient directions of <d_j phi, d_j phi>
inline double energy_density(const MapJet& jet) {
  return metric_inner(jet.p, jet.grad[0], jet.grad[0]) +
         metric_inner(jet.p, jet.grad[1], jet.grad[1]);
}

// Tension components from the closed-form harmonic map system.  With
// W_j = d_j v + chi.d_j psi - psi.d_j chi:
//   tau^u   = Lu - 2 e^{4u} |W|^2 - e^{2u} (|Dchi|^2 + |Dpsi|^2)
//   tau^v   = Lv + 2 (Dv + W).Du - 2 e^{2u} (chi.Dchi + psi.Dpsi).W
//   tau^chi = Lchi + 2 Dchi.Du - 2 e^{2u} Dpsi W
//   tau^psi = Lpsi + 2 Dpsi.Du + 2 e^{2u} Dchi W
// (certified against christoffel_tension; the published form of tau^v carries
// two misprints which the Christoffel route resolves)
inline TargetTangent tension(const MapJet& jet) {
  const int k = jet.k();
  const TargetPoint& p = jet.p;
  const double e2u = std::exp(2.0 * p.u);
  const double e4u = e2u * e2u;

  std::array<double, 2> W{};
  for (int j = 0; j < 2; ++j) W[j] = detail::twist_component(p, jet.grad[j]);

  double WW = W[0] * W[0] + W[1] * W[1];
  double gchi2 = 0.0, gpsi2 = 0.0;
  for (int j = 0; j < 2; ++j) {
    gchi2 += detail::dot(jet.grad[j].dchi, jet.grad[j].dchi);
    gpsi2 += detail::dot(jet.grad[j].dpsi, jet.grad[j].dpsi);
  }

  TargetTangent tau(k);
  tau.du = jet.lap.du - 2.0 * e4u * WW - e2u * (gchi2 + gpsi2);

  // (chi.Dchi + psi.Dpsi)_j and (Dv + W).Du
  double mixed = 0.0, vW_u = 0.0;
  for (int j = 0; j < 2; ++j) {
    double cc = detail::dot(p.chi, jet.grad[j].dchi) + detail::dot(p.psi, jet.grad[j].dpsi);
    mixed += cc * W[j];
    vW_u += (jet.grad[j].dv + W[j]) * jet.grad[j].du;
  }
  tau.dv = jet.lap.dv + 2.0 * vW_u - 2.0 * e2u * mixed;

  for (int i = 0; i < k; ++i) {
    double gc_gu = 0.0, gp_gu = 0.0, gp_W = 0.0, gc_W = 0.0;
    for (int j = 0; j < 2; ++j) {
      gc_gu += jet.grad[j].dchi[i] * jet.grad[j].du;
      gp_gu += jet.grad[j].dpsi[i] * jet.grad[j].du;
      gp_W += jet.grad[j].dpsi[i] * W[j];
      gc_W += jet.grad[j].dchi[i] * W[j];
    }
    tau.dchi[i] = jet.lap.dchi[i] + 2.0 * gc_gu - 2.0 * e2u * gp_W;
    tau.dpsi[i] = jet.lap.dpsi[i] + 2.0 * gp_gu + 2.0 * e2u * gc_W;
  }
  return tau;
}

namespace detail {

// Metric coefficient matrix in coordinate order (u, v, chi_1..k, psi_1..k),
// and its exact coordinate derivatives.  g = e_u e_u^T + e^{4u} c c^T + e^{2u} P
// with c = (0, 1, -psi, chi) and P the projector onto the chi/psi block.
inline Eigen::MatrixXd metric_matrix(const TargetPoint& p) {
  const int k = p.k();
  const int m = 2 * k + 2;
  const double e2u = std::exp(2.0 * p.u);
  const double e4u = e2u * e2u;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  c(1) = 1.0;
  for (int i = 0; i < k; ++i) {
    c(2 + i) = -p.psi[i];
    c(2 + k + i) = p.chi[i];
  }
  Eigen::MatrixXd g = e4u * (c * c.transpose());
  g(0, 0) += 1.0;
  for (int i = 0; i < 2 * k; ++i) g(2 + i, 2 + i) += e2u;
  return g;
}

// dg/dx^a for every coordinate a, as closed-form coefficient derivatives.
inline std::vector<Eigen::MatrixXd> metric_matrix_derivs(const TargetPoint& p) {
  const int k = p.k();
  const int m = 2 * k + 2;
  const double e2u = std::exp(2.0 * p.u);
  const double e4u = e2u * e2u;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
  c(1) = 1.0;
  for (int i = 0; i < k; ++i) {
    c(2 + i) = -p.psi[i];
    c(2 + k + i) = p.chi[i];
  }
  std::vector<Eigen::MatrixXd> dg(m, Eigen::MatrixXd::Zero(m, m));
  dg[0] = 4.0 * e4u * (c * c.transpose());
  for (int i = 0; i < 2 * k; ++i) dg[0](2 + i, 2 + i) += 2.0 * e2u;
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(m);
    dc(2 + k + i) = 1.0;  // d c / d chi_i
    dg[2 + i] = e4u * (dc * c.transpose() + c * dc.transpose());
    Eigen::VectorXd dc2 = Eigen::VectorXd::Zero(m);
    dc2(2 + i) = -1.0;  // d c / d psi_i
    dg[2 + k + i] = e4u * (dc2 * c.transpose() + c * dc2.transpose());
  }
  return dg;
}

inline Eigen::VectorXd to_coord_vector(const TargetTangent& t) {
  const int k = t.k();
  Eigen::VectorXd x(2 * k + 2);
  x(0) = t.du;
  x(1) = t.dv;
  for (int i = 0; i < k; ++i) {
    x(2 + i) = t.dchi[i];
    x(2 + k + i) = t.dpsi[i];
  }
  return x;
}

inline TargetTangent from_coord_vector(const Eigen::VectorXd& x) {
  const int m = static_cast<int>(x.size());
  const int k = (m - 2) / 2;
  TargetTangent t(k);
  t.du = x(0);
  t.dv = x(1);
  for (int i = 0; i < k; ++i) {
    t.dchi[i] = x(2 + i);
    t.dpsi[i] = x(2 + k + i);
  }
  return t;
}

// Gamma^a_{bc} from the metric matrix by exact differentiation
inline std::vector<Eigen::MatrixXd> christoffel(const TargetPoint& p) {
  const int m = 2 * p.k() + 2;
  Eigen::MatrixXd g = metric_matrix(p);
  std::vector<Eigen::MatrixXd> dg = metric_matrix_derivs(p);
  Eigen::MatrixXd gi = g.inverse();
  std::vector<Eigen::MatrixXd> Gam(m, Eigen::MatrixXd::Zero(m, m));
  for (int b = 0; b < m; ++b)
    for (int c = 0; c < m; ++c) {
      Eigen::VectorXd low(m);
      for (int d = 0; d < m; ++d) low(d) = 0.5 * (dg[c](d, b) + dg[b](d, c) - dg[d](b, c));
      Eigen::VectorXd up = gi * low;
      for (int a = 0; a < m; ++a) Gam[a](b, c) = up(a);
    }
  return Gam;
}

}  // namespace detail

// Independent tension oracle: tau^a = L phi^a + Gamma^a_{bc} d_j phi^b d_j phi^c
// with Christoffel symbols from exact derivatives of the metric matrix.
inline TargetTangent christoffel_tension(const MapJet& jet) {
  const int k = jet.k();
  const int m = 2 * k + 2;
  auto Gam = detail::christoffel(jet.p);
  Eigen::VectorXd tau = detail::to_coord_vector(jet.lap);
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd d = detail::to_coord_vector(jet.grad[j]);
    for (int a = 0; a < m; ++a) tau(a) += d.dot(Gam[a] * d);
  }
  return detail::from_coord_vector(tau);
}

// Geodesic distance via the embedding into homogeneous coordinates
// C^{k+2} with the Hermitian form <Z,W> = Z_0 conj(W_{k+1}) + Z_{k+1} conj(W_0)
// + sum Z_i conj(W_i).  The lift of (u,v,chi,psi) is
//   ( -(|zeta|^2 + e^{-2u})/2 + i v , zeta , 1 ),  zeta = chi + i psi,
// and cosh^2 d = <P,Q><Q,P> / (<P,P><Q,Q>).
inline double distance(const TargetPoint& p, const TargetPoint& q) {
  if (p.k() != q.k()) throw std::invalid_argument("distance: dimension mismatch");
  const int k = p.k();
  using C = std::complex<double>;
  auto lift = [k](const TargetPoint& pt, std::vector<C>& Z) {
    Z.resize(k + 2);
    double z2 = 0.0;
    for (int i = 0; i < k; ++i) {
      Z[1 + i] = C(pt.chi[i], pt.psi[i]);
      z2 += pt.chi[i] * pt.chi[i] + pt.psi[i] * pt.psi[i];
    }
    Z[0] = C(-0.5 * (z2 + std::exp(-2.0 * pt.u)), pt.v);
    Z[k + 1] = C(1.0, 0.0);
  };
  auto herm = [k](const std::vector<C>& Z, const std::vector<C>& W) {
    C s = Z[0] * std::conj(W[k + 1]) + Z[k + 1] * std::conj(W[0]);
    for (int i = 0; i < k; ++i) s += Z[1 + i] * std::conj(W[1 + i]);
    return s;
  };
  std::vector<C> P, Q;
  lift(p, P);
  lift(q, Q);
  const C pq = herm(P, Q);
  const double num = std::norm(pq);
  const double den = herm(P, P).real() * herm(Q, Q).real();
  double ratio = num / den;
  if (ratio < 1.0) ratio = 1.0;
  return std::acosh(std::sqrt(ratio));
}

// Isometry subgroup used for parameter normalization: translations in v and
// psi with the compensating cross term,
//   (u, v, chi, psi) -> (u, v + b.chi + c, chi, psi + b).
struct GaugeIsometry {
  std::vector<double> psi_shift;  // b
  double v_shift = 0.0;           // c

  TargetPoint apply(const TargetPoint& p) const {
    TargetPoint q = p;
    q.v = p.v + detail::dot(psi_shift, p.chi) + v_shift;
    for (std::size_t i = 0; i < psi_shift.size(); ++i) q.psi[i] = p.psi[i] + psi_shift[i];
    return q;
  }
  // pushforward of a tangent at p
  TargetTangent apply(const TargetTangent& t) const {
    TargetTangent s = t;
    s.dv = t.dv + detail::dot(psi_shift, t.dchi);
    return s;
  }
  GaugeIsometry inverse() const {
    GaugeIsometry inv;
    inv.psi_shift.resize(psi_shift.size());
    for (std::size_t i = 0; i < psi_shift.size(); ++i) inv.psi_shift[i] = -psi_shift[i];
    inv.v_shift = -v_shift;
    return inv;
  }
  bool identity(double tol = 0.0) const {
    if (std::abs(v_shift) > tol) return false;
    for (double b : psi_shift)
      if (std::abs(b) > tol) return false;
    return true;
  }
};

// Moves the first constant's (v, psi) to (0, 0); returns the isometry and the
// transformed list.
inline std::pair<GaugeIsometry, std::vector<TargetPoint>>
gauge_normalize(const std::vector<TargetPoint>& constants) {
  if (constants.empty()) throw std::invalid_argument("gauge_normalize: empty list");
  const TargetPoint& p0 = constants.front();
  GaugeIsometry iso;
  iso.psi_shift.resize(p0.k());
  for (int i = 0; i < p0.k(); ++i) iso.psi_shift[i] = -p0.psi[i];
  iso.v_shift = -(p0.v + detail::dot(iso.psi_shift, p0.chi));
  std::vector<TargetPoint> out;
  out.reserve(constants.size());
  for (const auto& p : constants) out.push_back(iso.apply(p));
  return {iso, out};
}

}  // namespace rodmap
