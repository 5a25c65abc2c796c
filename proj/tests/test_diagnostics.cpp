#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rodmap/diagnostics.hpp"
#include "rodmap/exact_solutions.hpp"
#include "rodmap/seed.hpp"
#include "rodmap/solver.hpp"

using namespace rodmap;

namespace {

struct Problem {
  RodConfig rods;
  SingularMapSpec spec;
};

Problem single_rod_k0() {
  Problem p;
  p.rods.gaps = {{-1.0, 1.0}};
  p.spec = SingularMapSpec::zeros(0, 2);
  p.spec.v = {0.4, -0.4};
  return p;
}

double measure_c(const SeedMap& seed, double R) {
  std::vector<double> radii;
  const double rstar = seed.config().transition_radius;
  for (int i = 0; i < 6; ++i) radii.push_back(rstar * (1.0 + 0.35 * i));
  std::vector<double> angles;
  for (int i = 1; i < 12; ++i) angles.push_back(std::numbers::pi * i / 12.0);
  std::vector<AxisPoint> interior;
  for (double r = 0.15; r < rstar; r += 0.12)
    for (double th : angles) interior.push_back({r * std::sin(th), r * std::cos(th)});
  return seed_tension_report(seed, radii, angles, interior).c_measured;
}

}  // namespace

TEST_CASE("comparison function nu") {
  REQUIRE(comparison_nu(0.0) == Catch::Approx(-1.0).margin(1e-8));
  REQUIRE(comparison_nu(2.0) > comparison_nu(1.0));
  REQUIRE(comparison_nu(10.0) < 0.0);
  // tail: nu(r) = -log(2r)/r (1 + o(1)), slope -1 up to the log factor
  REQUIRE(comparison_nu(100.0) * 100.0 / std::log(200.0) == Catch::Approx(-1.0).margin(1e-3));
  REQUIRE(comparison_nu(200.0) * 200.0 / std::log(400.0) == Catch::Approx(-1.0).margin(1e-3));
  REQUIRE_THROWS_AS(comparison_nu(-0.1), std::invalid_argument);

  // radial Laplacian residual nu'' + 2 nu'/r - (1+r^2)^{-3/2} is O(h^2)
  auto residual = [](double r, double h) {
    const double n0 = comparison_nu(r), np = comparison_nu(r + h), nm = comparison_nu(r - h);
    const double lap = (np - 2.0 * n0 + nm) / (h * h) + (np - nm) / (2.0 * h) * 2.0 / r;
    return std::abs(lap - std::pow(1.0 + r * r, -1.5));
  };
  double worst1 = 0.0, worst2 = 0.0;
  for (double r : {0.5, 1.0, 2.0, 3.0}) {
    worst1 = std::max(worst1, residual(r, 0.02));
    worst2 = std::max(worst2, residual(r, 0.01));
  }
  REQUIRE(worst2 < 0.35 * worst1);
}

TEST_CASE("distance field vanishes when the state is the seed") {
  Problem p = single_rod_k0();
  SeedMap seed(p.rods, p.spec, SeedConfig::defaults(p.rods));
  Grid g = Grid::build(p.rods, 6.0, 0.25);
  FieldState st = state_from_boundary(g, p.spec, BoundaryData::from_seed(seed));
  DistanceField f = distance_field(st, seed);
  REQUIRE(f.sigma_max == 0.0);
  for (double s : f.sigma) REQUIRE(s == 0.0);
}

TEST_CASE("Schwarzschild: sigma identically zero, all bounds trivially pass") {
  SchwarzschildWeyl schw{1.0};
  RodConfig rods = schw.rods();
  SingularMapSpec spec = SingularMapSpec::zeros(0, 2);
  SeedMap seed(rods, spec, SeedConfig::defaults(rods));
  Grid g = Grid::build(rods, 6.0, 0.25);
  SolveParams params;
  auto [st, rep] = solve_on_ball(seed, rods, g, params);
  REQUIRE(rep.converged);
  DistanceField f = distance_field(st, seed);
  REQUIRE(f.sigma_max <= 1e-12);
  BoundReport br = check_max_principle(f, st, 0.0);
  REQUIRE(br.pass_maxprinc);
  REQUIRE(br.pass_bound);
}

TEST_CASE("maximum principle and subharmonicity on a solved state") {
  Problem p = single_rod_k0();
  SeedMap seed(p.rods, p.spec, SeedConfig::defaults(p.rods));
  Grid g = Grid::build(p.rods, 6.0, 0.2);
  SolveParams params;
  params.h = 0.2;
  auto [st, rep] = solve_on_ball(seed, p.rods, g, params);
  REQUIRE(rep.converged);

  const double c = measure_c(seed, g.R);
  REQUIRE(c > 0.0);
  DistanceField f = distance_field(st, seed);
  REQUIRE(f.sigma_max > 0.0);  // the seed is not harmonic
  BoundReport br = check_max_principle(f, st, c);
  INFO("sigma_max " << f.sigma_max << " bound " << br.bound << " frac " << br.frac_maxprinc);
  REQUIRE(br.pass_maxprinc);
  REQUIRE(br.pass_bound);

  // subharmonicity of the distance to the seed, and the trivial self-case
  FieldState tilde = state_from_boundary(g, p.spec, BoundaryData::from_seed(seed));
  SubharmonicReport sr = check_dist_subharmonic(st, tilde, p.rods, p.spec);
  INFO("violations " << sr.violations << "/" << sr.cells << " worst " << sr.worst_defect);
  REQUIRE(sr.pass);
  SubharmonicReport self = check_dist_subharmonic(st, st, p.rods, p.spec);
  REQUIRE(self.violations == 0);
}

TEST_CASE("uniformity across R and decay at infinity") {
  Problem p = single_rod_k0();
  SeedMap seed(p.rods, p.spec, SeedConfig::defaults(p.rods));
  SolveParams params;
  params.h = 0.25;
  params.R_schedule = {6.0, 9.0, 13.5};
  params.probe_radius = 3.0;
  auto stages = exhaust(seed, p.rods, params);
  const double c = measure_c(seed, params.R_schedule.back());

  std::vector<BoundReport> brs;
  for (const auto& s : stages) {
    DistanceField f = distance_field(s.state, seed);
    brs.push_back(check_max_principle(f, s.state, c));
  }
  UniformityVerdict v = uniformity_across_R(brs);
  INFO("slope " << v.slope << " +- " << v.stderr_slope << " growth " << v.growth
                << " sig " << brs[0].sigma_max << " " << brs[1].sigma_max << " "
                << brs[2].sigma_max << " bound " << brs[0].bound);
  REQUIRE(v.bounded);
  REQUIRE(v.no_growth);
  REQUIRE(v.pass);

  DecayReportInfinity dr = decay_at_infinity(stages.back().state, seed, c);
  INFO("frac " << dr.frac_enveloped << " slope " << dr.tail_slope << " far " << dr.sigma_far);
  REQUIRE(dr.pass_envelope);
  REQUIRE(dr.tail_slope < -0.8);
  REQUIRE(dr.sigma_far < 0.05);

  REQUIRE_THROWS_AS(uniformity_across_R({brs[0], brs[1]}), std::invalid_argument);
}
