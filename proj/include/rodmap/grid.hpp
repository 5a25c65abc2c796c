#pragma once

// Discretization of B_R cap {rho >= 0} as a masked rectangle: uniform rho
// spacing, z spacing uniform per segment with every gap endpoint snapped onto
// a node, nodes outside the half-disk held at Dirichlet data.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rodmap/rods.hpp"

namespace rodmap {

enum class NodeType : std::uint8_t {
  dirichlet,   // outside the half-disk or on the rectangle edge: held at data
  interior,    // full nonlinear stencil
  axis_gap,    // rho = 0, z in an open gap: even-reflection closure
  axis_sigma,  // rho = 0 on a rod: (v,chi,psi) clamped, u_reg reflected
};

struct Grid {
  double R = 0.0;
  std::vector<double> rho;  // ascending, rho.front() == 0
  std::vector<double> z;    // ascending, every gap endpoint is a node
  std::vector<NodeType> node;
  std::vector<int> axis_component;  // per z index: Sigma component, or -1 on gaps

  int nrho() const { return static_cast<int>(rho.size()); }
  int nz() const { return static_cast<int>(z.size()); }
  int size() const { return nrho() * nz(); }
  int idx(int i, int j) const { return i * nz() + j; }
  NodeType type(int i, int j) const { return node[idx(i, j)]; }
  AxisPoint point(int i, int j) const { return {rho[i], z[j]}; }
  double hrho() const { return rho[1] - rho[0]; }

  // smallest number of cells across any gap
  int min_gap_cells(const RodConfig& rods) const {
    int m = 1 << 30;
    for (const auto& g : rods.gaps) {
      int c = 0;
      for (int j = 0; j < nz(); ++j)
        if (z[j] > g.a && z[j] < g.b) ++c;
      m = std::min(m, c + 1);
    }
    return m;
  }

  static Grid build(const RodConfig& rods, double R, double h) {
    if (!(R > 0.0) || !(h > 0.0)) throw std::invalid_argument("Grid: R and h must be positive");
    if (R <= rods.outer_extent()) throw std::invalid_argument("Grid: R must exceed the rod configuration");
    Grid g;
    g.R = R;

    const int nr = std::max(8, static_cast<int>(std::lround(R / h)));
    const double hr = R / nr;
    g.rho.resize(nr + 1);
    for (int i = 0; i <= nr; ++i) g.rho[i] = i * hr;

    // z breakpoints: -R, interior gap endpoints, R; near-uniform segments
    std::vector<double> brk = {-R};
    for (const auto& gp : rods.gaps) {
      if (gp.a > -R && gp.a < R) brk.push_back(gp.a);
      if (gp.b > -R && gp.b < R) brk.push_back(gp.b);
    }
    brk.push_back(R);
    for (std::size_t s = 0; s + 1 < brk.size(); ++s) {
      const double len = brk[s + 1] - brk[s];
      const int n = std::max(1, static_cast<int>(std::lround(len / h)));
      for (int j = 0; j < n; ++j) g.z.push_back(brk[s] + len * j / n);
    }
    g.z.push_back(R);

    g.node.assign(g.size(), NodeType::interior);
    g.axis_component.assign(g.nz(), -1);
    for (int j = 0; j < g.nz(); ++j) {
      const double zz = g.z[j];
      bool on_gap = false;
      int comp = 0;
      for (int q = 0; q < rods.gap_count(); ++q) {
        if (zz > rods.gaps[q].a && zz < rods.gaps[q].b) on_gap = true;
        if (zz >= rods.gaps[q].b) comp = q + 1;
      }
      g.axis_component[j] = on_gap ? -1 : comp;
    }
    const double R2 = R * R * (1.0 - 1e-14);
    for (int i = 0; i <= nr; ++i)
      for (int j = 0; j < g.nz(); ++j) {
        const double rr = g.rho[i] * g.rho[i] + g.z[j] * g.z[j];
        NodeType t;
        if (rr >= R2 || i == nr || j == 0 || j + 1 == g.nz())
          t = NodeType::dirichlet;
        else if (i == 0)
          t = (g.axis_component[j] < 0) ? NodeType::axis_gap : NodeType::axis_sigma;
        else
          t = NodeType::interior;
        g.node[g.idx(i, j)] = t;
      }
    return g;
  }
};

}  // namespace rodmap
