#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "rodmap/config.hpp"
#include "rodmap/report.hpp"
#include "rodmap/seed.hpp"
#include "rodmap/solver.hpp"

using namespace rodmap;

namespace {

const char* kMinimal = R"(
[rods]
gap = -1.0 1.0

[map]
k = 0

[component 0]
v = 0.4

[component 1]
v = -0.4
)";

std::string msg_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config parses with defaults resolved") {
  RunConfig cfg = parse_config(kMinimal);
  REQUIRE(cfg.rods.gap_count() == 1);
  REQUIRE(cfg.spec.k == 0);
  REQUIRE(cfg.spec.v == std::vector<double>{0.4, -0.4});
  REQUIRE(cfg.seed.transition_radius == 4.0);  // 4x outermost endpoint
  REQUIRE(cfg.seed.bump_width > 0.0);
  REQUIRE(cfg.solver.R_schedule == std::vector<double>{16.0, 32.0, 64.0});  // {8,16,32} x L
  REQUIRE(cfg.solver.probe_radius == 8.0);
  REQUIRE(cfg.normalize_gauge);
  // the echo is itself a valid config that resolves to the same state
  RunConfig again = parse_config(echo_config(cfg));
  REQUIRE(echo_config(again) == echo_config(cfg));
}

TEST_CASE("full N=2 k=2 config with all sections") {
  const char* text = R"(
[rods]
gap = -2.0 -0.5   ; lower rod
gap = 0.5 1.5     # upper rod

[map]
k = 2
normalize_gauge = false
cross_sign = -1

[component 0]
v = 0.5
psi = -0.8 0.2
chi = 0.1 0.0

[component 2]
v = -0.5
psi = 0.8 -0.2

[seed]
transition_radius = 10
bump_width = 0.3
profile = smoothstep

[solver]
h = 0.125
tol = 1e-9
max_iters = 80
R_schedule = 12 24 48
probe_radius = 5

[output]
directory = runs/demo
)";
  RunConfig cfg = parse_config(text);
  REQUIRE(cfg.rods.gap_count() == 2);
  REQUIRE(cfg.spec.k == 2);
  REQUIRE(cfg.spec.psi[0] == std::vector<double>{-0.8, 0.2});
  REQUIRE(cfg.spec.chi[0] == std::vector<double>{0.1, 0.0});
  // component 1 omitted: defaults to zeros
  REQUIRE(cfg.spec.v[1] == 0.0);
  REQUIRE(cfg.spec.psi[1] == std::vector<double>{0.0, 0.0});
  REQUIRE(cfg.seed.profile == AngularProfile::smoothstep);
  REQUIRE(cfg.solver.tol == 1e-9);
  REQUIRE(cfg.output_dir == "runs/demo");
  REQUIRE_FALSE(cfg.normalize_gauge);
}

TEST_CASE("config errors carry line numbers and name the offense") {
  REQUIRE(msg_of("[rods]\ngap = -1 1\n[map]\nk = 0\n[solver]\ntole = 1\n").find(
              "line 6: unknown key 'tole'") != std::string::npos);
  REQUIRE(msg_of("[rod]\n").find("line 1: unknown section") != std::string::npos);
  REQUIRE(msg_of("[rods]\ngap = 1 -1\n").find("line 2") != std::string::npos);
  REQUIRE(msg_of("[rods]\ngap = -1 1\ngap = 0 2\n[map]\nk = 0\n").find("disjoint") !=
          std::string::npos);
  REQUIRE(msg_of("[rods]\ngap = -1 1\n").find("missing 'k'") != std::string::npos);
  REQUIRE(msg_of("[rods]\ngap = -1 x\n").find("expected a number") != std::string::npos);
  // psi length must match k
  const std::string bad_psi =
      "[rods]\ngap = -1 1\n[map]\nk = 2\n[component 0]\npsi = 0.1\n";
  REQUIRE(msg_of(bad_psi).find("psi needs k = 2 values") != std::string::npos);
  // component index out of range
  const std::string bad_idx = "[rods]\ngap = -1 1\n[map]\nk = 0\n[component 5]\nv = 1\n";
  REQUIRE(msg_of(bad_idx).find("out of range") != std::string::npos);
  // key outside a section
  REQUIRE(msg_of("k = 0\n").find("outside any section") != std::string::npos);
}

TEST_CASE("gauge normalization moves component 0 to the origin") {
  const char* text = R"(
[rods]
gap = -1.0 1.0

[map]
k = 1

[component 0]
v = 0.7
psi = 0.3

[component 1]
v = -0.2
psi = -0.3
)";
  RunConfig cfg = parse_config(text);
  GaugeIsometry shift = config_gauge_shift(cfg);
  apply_gauge(cfg, shift);
  REQUIRE(cfg.spec.v[0] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(cfg.spec.psi[0][0] == Catch::Approx(0.0).margin(1e-15));
  // the other component moved by the same isometry: differences are preserved
  REQUIRE(cfg.spec.psi[1][0] == Catch::Approx(-0.6));
  // disabled -> identity
  cfg = parse_config(text);
  cfg.normalize_gauge = false;
  REQUIRE(config_gauge_shift(cfg).identity());
}

TEST_CASE("checkpoint round-trip preserves the state bit for bit") {
  RodConfig rods;
  rods.gaps = {{-1.0, 1.0}};
  SingularMapSpec spec = SingularMapSpec::zeros(1, 2);
  spec.v = {0.2, -0.2};
  spec.psi = {{-0.5}, {0.5}};
  SeedMap seed(rods, spec, SeedConfig::defaults(rods));
  Grid g = Grid::build(rods, 5.0, 0.25);
  FieldState st = state_from_boundary(g, spec, BoundaryData::from_seed(seed));
  SolveReport rep;
  rep.converged = true;
  rep.iterations = 3;
  rep.final_residual = 4.5e-9;

  const std::string path = "checkpoint_test.txt";
  save_state(path, st, rods, rep);
  Checkpoint cp = load_state(path);
  REQUIRE(cp.rods.gap_count() == 1);
  REQUIRE(cp.report.converged);
  REQUIRE(cp.report.iterations == 3);
  REQUIRE(cp.report.final_residual == 4.5e-9);
  REQUIRE(cp.state.k == 1);
  REQUIRE(cp.state.grid.nz() == g.nz());
  for (int c = 0; c < st.channels(); ++c)
    for (int id = 0; id < g.size(); ++id) REQUIRE(cp.state.f[c][id] == st.f[c][id]);

  std::ofstream("checkpoint_bad.txt") << "not a checkpoint\n";
  REQUIRE_THROWS_AS(load_state("checkpoint_bad.txt"), std::runtime_error);
  std::remove(path.c_str());
  std::remove("checkpoint_bad.txt");
}

TEST_CASE("report serialization is deterministic") {
  SolveReport rep;
  rep.converged = true;
  rep.iterations = 2;
  rep.final_residual = 1.23e-10;
  rep.residual_history = {0.5, 1e-4, 1.23e-10};
  rep.energy_history = {2.0, 1.9, 1.9};
  REQUIRE(to_json(rep).dump(2) == to_json(rep).dump(2));

  ConicalReport cr;
  cr.entries.push_back({0, false, 0.0, true});
  cr.entries.push_back({1, true, -0.37, false});
  json j = to_json(cr);
  REQUIRE(j["entries"][1]["deficit"] == -0.37);
  REQUIRE(j["entries"][1]["regular"] == false);

  const std::string path = "csv_test.csv";
  write_csv(path, {"a", "b"}, {{1.0, 0.1}, {2.0, 1.0 / 3.0}});
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  REQUIRE(buf.str() == "a,b\n1,0.10000000000000001\n2,0.33333333333333331\n");
  std::remove(path.c_str());
}
