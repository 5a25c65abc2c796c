// rodmap: batch pipeline for axisymmetric harmonic-map black-hole solves.
//
// Subcommands:
//   solve        seed -> exhaustion solve -> diagnostics -> reconstruction
//   validate     analytic-oracle self-checks (tension, rods, Schwarzschild, Kerr)
//   reconstruct  spacetime fields and conical report from a checkpoint
//   report       human-readable summary of a run's report.json

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rodmap/config.hpp"
#include "rodmap/diagnostics.hpp"
#include "rodmap/exact_solutions.hpp"
#include "rodmap/report.hpp"
#include "rodmap/seed.hpp"
#include "rodmap/solver.hpp"
#include "rodmap/spacetime.hpp"

namespace fs = std::filesystem;
using namespace rodmap;

namespace {

struct Options {
  std::string config_path;
  std::string output_dir;       // overrides [output] directory
  std::string checkpoint_path;  // reconstruct only
  int refine = 0;               // halve h this many times
  std::vector<double> r_schedule;
  double tol = 0.0;
};

RunConfig load_config(const Options& opt) {
  std::ifstream in(opt.config_path);
  if (!in) throw std::runtime_error("cannot open config " + opt.config_path);
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  try {
    cfg = parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw std::runtime_error(opt.config_path + ":" + std::string(e.what()));
  }
  if (!opt.output_dir.empty()) cfg.output_dir = opt.output_dir;
  if (!opt.r_schedule.empty()) cfg.solver.R_schedule = opt.r_schedule;
  if (opt.tol > 0.0) cfg.solver.tol = opt.tol;
  for (int i = 0; i < opt.refine; ++i) cfg.solver.h *= 0.5;
  return cfg;
}

double measured_c(const SeedMap& seed, double R) {
  std::vector<double> radii;
  const double rstar = seed.config().transition_radius;
  for (int i = 0; i < 6; ++i) radii.push_back(rstar * (1.0 + 0.35 * i));
  std::vector<double> angles;
  for (int i = 1; i < 12; ++i) angles.push_back(std::numbers::pi * i / 12.0);
  std::vector<AxisPoint> interior;
  for (double r = 0.25 * rstar; r < rstar; r += 0.12 * rstar)
    for (double th : angles) interior.push_back({r * std::sin(th), r * std::cos(th)});
  (void)R;
  return seed_tension_report(seed, radii, angles, interior).c_measured;
}

json decay_json(const DecayReport& r) {
  return json{{"slope", r.slope},
              {"c_fit", r.c_fit},
              {"c_measured", r.c_measured},
              {"sup_tau", r.sup_tau},
              {"samples", r.samples}};
}

int run_solve(const Options& opt) {
  RunConfig cfg = load_config(opt);
  const GaugeIsometry shift = config_gauge_shift(cfg);
  apply_gauge(cfg, shift);

  fs::create_directories(cfg.output_dir);
  std::ofstream(fs::path(cfg.output_dir) / "resolved.ini") << echo_config(cfg);

  SeedMap seed(cfg.rods, cfg.spec, cfg.seed);

  // seed decay fit beyond the transition radius
  std::vector<double> radii, angles;
  for (int i = 0; i < 8; ++i) radii.push_back(seed.config().transition_radius * (1.0 + 0.5 * i));
  for (int i = 1; i < 16; ++i) angles.push_back(std::numbers::pi * i / 16.0);
  DecayReport decay = seed_tension_report(seed, radii, angles);
  const double c = measured_c(seed, cfg.solver.R_schedule.back());

  json report;
  report["config"] = echo_config(cfg);
  report["gauge_shift"] = to_json(shift);
  report["seed_decay"] = decay_json(decay);
  report["c_measured"] = c;

  bool all_converged = true;
  std::vector<ExhaustStage> stages;
  std::vector<BoundReport> bounds;
  try {
    stages = exhaust(seed, cfg.rods, cfg.solver);
  } catch (const std::exception& e) {
    report["error"] = e.what();
    all_converged = false;
  }

  json jstages = json::array();
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const auto& st = stages[s];
    all_converged = all_converged && st.report.converged;
    DistanceField f = distance_field(st.state, seed);
    BoundReport br = check_max_principle(f, st.state, c);
    bounds.push_back(br);
    json j = to_json(st.report);
    j["R"] = st.R;
    j["cauchy_from_prev"] = st.cauchy_from_prev;
    j["energy"] = discrete_energy(st.state, cfg.rods);
    j["bounds"] = to_json(br);
    jstages.push_back(j);
    std::ostringstream name;
    name << "checkpoint_" << s << ".txt";
    save_state((fs::path(cfg.output_dir) / name.str()).string(), st.state, cfg.rods, st.report);
  }
  report["stages"] = jstages;

  if (!stages.empty()) {
    const FieldState& final_state = stages.back().state;
    if (bounds.size() >= 3) {
      UniformityVerdict uv = uniformity_across_R(bounds);
      report["uniformity"] = json{{"slope", uv.slope},
                                  {"stderr_slope", uv.stderr_slope},
                                  {"growth", uv.growth},
                                  {"bounded", uv.bounded},
                                  {"no_growth", uv.no_growth},
                                  {"pass", uv.pass}};
    }
    DecayReportInfinity di = decay_at_infinity(final_state, seed, c);
    report["decay_at_infinity"] = json{{"frac_enveloped", di.frac_enveloped},
                                       {"tail_slope", di.tail_slope},
                                       {"sigma_far", di.sigma_far},
                                       {"pass_envelope", di.pass_envelope}};
    report["step3"] = to_json(step3_inequality_check(final_state, seed));

    SpacetimeFields fields = reconstruct(final_state, cfg.rods, cfg.cross_sign);
    report["closedness"] = json{{"dw", fields.w.closedness}, {"dlambda", fields.lambda.closedness}};
    for (std::size_t q = 0; q < fields.theta.size(); ++q)
      report["closedness"]["dtheta_" + std::to_string(q)] = fields.theta[q].closedness;
    // away from Sigma and the Dirichlet shell, where second-order convergence holds
    const Grid& fg = final_state.grid;
    report["closedness_masked"] =
        json{{"dw", closedness_masked(fg, fields.w, cfg.rods, 0.3, 0.5)},
             {"dlambda", closedness_masked(fg, fields.lambda, cfg.rods, 0.3, 0.5)}};
    for (std::size_t q = 0; q < fields.theta.size(); ++q)
      report["closedness_masked"]["dtheta_" + std::to_string(q)] =
          closedness_masked(fg, fields.theta[q], cfg.rods, 0.3, 0.5);
    report["conical"] = to_json(conical_deficit(final_state, cfg.rods, fields));

    std::vector<double> ray_angles;
    for (int i = 1; i < 8; ++i) ray_angles.push_back(std::numbers::pi * i / 8.0);
    write_csv((fs::path(cfg.output_dir) / "sigma_rays.csv").string(), {"theta", "r", "sigma"},
              sigma_ray_table(final_state, seed, ray_angles));
    write_csv((fs::path(cfg.output_dir) / "metric.csv").string(),
              metric_table_header(cfg.spec.k), metric_table(final_state, cfg.rods, fields));
  }
  report["converged"] = all_converged;

  std::ofstream out(fs::path(cfg.output_dir) / "report.json");
  out << report.dump(2) << "\n";
  std::cout << (all_converged ? "solve: converged" : "solve: FAILED") << ", report in "
            << cfg.output_dir << "\n";
  return all_converged ? 0 : 1;
}

int run_reconstruct(const Options& opt) {
  std::string path = opt.checkpoint_path;
  std::string outdir = opt.output_dir.empty() ? "." : opt.output_dir;
  if (path.empty()) throw std::runtime_error("reconstruct needs --checkpoint");
  Checkpoint cp = load_state(path);
  fs::create_directories(outdir);
  SpacetimeFields fields = reconstruct(cp.state, cp.rods);
  json report;
  report["checkpoint"] = path;
  report["closedness"] = json{{"dw", fields.w.closedness}, {"dlambda", fields.lambda.closedness}};
  for (std::size_t q = 0; q < fields.theta.size(); ++q)
    report["closedness"]["dtheta_" + std::to_string(q)] = fields.theta[q].closedness;
  report["conical"] = to_json(conical_deficit(cp.state, cp.rods, fields));
  write_csv((fs::path(outdir) / "metric.csv").string(), metric_table_header(cp.state.k),
            metric_table(cp.state, cp.rods, fields));
  std::ofstream out(fs::path(outdir) / "reconstruction.json");
  out << report.dump(2) << "\n";
  std::cout << "reconstruct: wrote " << outdir << "/metric.csv and reconstruction.json\n";
  return 0;
}

bool check(const char* name, bool ok) {
  std::printf("%-52s %s\n", name, ok ? "pass" : "FAIL");
  return ok;
}

int run_validate() {
  bool all = true;
  // tension operator vs the Christoffel oracle on deterministic random jets
  {
    std::mt19937 rng(7041995);
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    double worst = 0.0;
    for (int k : {0, 1, 2, 4})
      for (int n = 0; n < 300; ++n) {
        MapJet j(k);
        j.p.u = uni(-1.5, 1.5);
        j.p.v = uni(-2.0, 2.0);
        for (int q = 0; q < k; ++q) {
          j.p.chi[q] = uni(-2.0, 2.0);
          j.p.psi[q] = uni(-2.0, 2.0);
        }
        for (auto* t : {&j.grad[0], &j.grad[1], &j.lap}) {
          t->du = uni(-1.0, 1.0);
          t->dv = uni(-1.0, 1.0);
          for (int q = 0; q < k; ++q) {
            t->dchi[q] = uni(-1.0, 1.0);
            t->dpsi[q] = uni(-1.0, 1.0);
          }
        }
        TargetTangent a = tension(j), b = christoffel_tension(j);
        const double scale = tension_norm(j.p, a) + 1.0;
        TargetTangent d = a;
        d.du -= b.du;
        d.dv -= b.dv;
        for (int q = 0; q < k; ++q) {
          d.dchi[q] -= b.dchi[q];
          d.dpsi[q] -= b.dpsi[q];
        }
        worst = std::max(worst, tension_norm(j.p, d) / scale);
      }
    all &= check("tension vs Christoffel oracle (rel 1e-10)", worst < 1e-10);
  }
  // rod potential far field
  {
    RodConfig rods;
    rods.gaps = {{-1.0, 1.0}};
    const AxisPoint far{1e6 / std::numbers::sqrt2, 1e6 / std::numbers::sqrt2};
    const double defect = std::abs(axis_potential_u0(rods, far) + std::log(far.rho));
    all &= check("u0 + log rho at r = 1e6 (< 1e-5)", defect < 1e-5);
  }
  // Schwarzschild: the seed solves the discrete system exactly
  {
    SchwarzschildWeyl schw{1.0};
    RodConfig rods = schw.rods();
    SingularMapSpec spec = SingularMapSpec::zeros(0, 2);
    SeedMap seed(rods, spec, SeedConfig::defaults(rods));
    Grid g = Grid::build(rods, 5.0, 0.2);
    SolveParams params;
    auto [st, rep] = solve_on_ball(seed, rods, g, params);
    double sup = 0.0;
    for (const auto& ch : st.f)
      for (double v : ch) sup = std::max(sup, std::abs(v));
    all &= check("Schwarzschild solve: sup |u_reg|, |v| (<= 1e-8)", rep.converged && sup <= 1e-8);
  }
  // Kerr closed form: axis limit of the twist potential and harmonicity
  {
    KerrWeyl kerr{1.0, 0.7};
    const double vt = kerr.v({1e-8, 2.0});
    all &= check("Kerr axis limit v -> -2Ma", std::abs(vt - kerr.v_top()) < 1e-6);
    // finite-difference jet of (u, v) at an off-axis point
    const AxisPoint x{0.45, 0.25};
    const double h = 1e-3;
    MapJet j(0);
    auto at = [&](double dr, double dz) { return kerr.fields({x.rho + dr, x.z + dz}); };
    const auto c0 = at(0, 0), pr = at(h, 0), mr = at(-h, 0), pz = at(0, h), mz = at(0, -h);
    j.p.u = c0.u;
    j.p.v = c0.v;
    j.grad[0].du = (pr.u - mr.u) / (2 * h);
    j.grad[0].dv = (pr.v - mr.v) / (2 * h);
    j.grad[1].du = (pz.u - mz.u) / (2 * h);
    j.grad[1].dv = (pz.v - mz.v) / (2 * h);
    j.lap.du = (pr.u - 2 * c0.u + mr.u) / (h * h) + j.grad[0].du / x.rho +
               (pz.u - 2 * c0.u + mz.u) / (h * h);
    j.lap.dv = (pr.v - 2 * c0.v + mr.v) / (h * h) + j.grad[0].dv / x.rho +
               (pz.v - 2 * c0.v + mz.v) / (h * h);
    const double res = tension_norm(j.p, tension(j));
    all &= check("Kerr map is harmonic (FD tension < 2e-4)", res < 2e-4);
  }
  std::printf("validate: %s\n", all ? "all checks passed" : "FAILURES");
  return all ? 0 : 1;
}

int run_report(const Options& opt) {
  std::string dir = opt.output_dir.empty() ? "out" : opt.output_dir;
  std::ifstream in(fs::path(dir) / "report.json");
  if (!in) throw std::runtime_error("no report.json in " + dir);
  json r = json::parse(in);
  std::cout << "run report: " << dir << "\n";
  std::cout << "  converged: " << (r.value("converged", false) ? "yes" : "no") << "\n";
  if (r.contains("seed_decay"))
    std::cout << "  seed decay slope: " << r["seed_decay"]["slope"].get<double>()
              << "  c_measured: " << r["c_measured"].get<double>() << "\n";
  if (r.contains("stages"))
    for (const auto& s : r["stages"])
      std::cout << "  R = " << s["R"].get<double>() << ": iters " << s["iterations"].get<int>()
                << ", residual " << s["final_residual"].get<double>() << ", sigma_max "
                << s["bounds"]["sigma_max"].get<double>() << "\n";
  if (r.contains("closedness"))
    std::cout << "  closedness dw " << r["closedness"]["dw"].get<double>() << ", dlambda "
              << r["closedness"]["dlambda"].get<double>() << "\n";
  if (r.contains("conical"))
    for (const auto& e : r["conical"]["entries"])
      std::cout << "  component " << e["component"].get<int>()
                << (e["bounded"].get<bool>() ? " (bounded)" : " (ray)") << ": b = "
                << e["deficit"].get<double>() << (e["regular"].get<bool>() ? " regular" : " STRUT")
                << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"axisymmetric harmonic-map solver and spacetime reconstruction"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("-c,--config", opt.config_path, "config file (INI-style)");
    if (needs_config) c->required();
    sub->add_option("-o,--output", opt.output_dir, "output directory override");
    sub->add_option("--refine", opt.refine, "halve the grid spacing this many times");
    sub->add_option("--rschedule", opt.r_schedule, "override the exhaustion radii");
    sub->add_option("--tol", opt.tol, "override the solver tolerance");
  };

  auto* solve = app.add_subcommand("solve", "run the full pipeline");
  add_common(solve, true);
  auto* validate = app.add_subcommand("validate", "run analytic-oracle self-checks");
  auto* reconstruct = app.add_subcommand("reconstruct", "reconstruct from a checkpoint");
  reconstruct->add_option("--checkpoint", opt.checkpoint_path, "checkpoint file")->required();
  reconstruct->add_option("-o,--output", opt.output_dir, "output directory");
  auto* report = app.add_subcommand("report", "summarize a run's report.json");
  report->add_option("-o,--output", opt.output_dir, "run directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (solve->parsed()) return run_solve(opt);
    if (validate->parsed()) return run_validate();
    if (reconstruct->parsed()) return run_reconstruct(opt);
    if (report->parsed()) return run_report(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
