#include "heatlsm/fdm.hpp"
#include "heatlsm/halfspace.hpp"
#include "heatlsm/io.hpp"
#include "heatlsm/quadrature.hpp"
#include "heatlsm/sampling.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace heatlsm;
using nlohmann::json;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  Real seconds() const {
    return std::chrono::duration<Real>(std::chrono::steady_clock::now() - start).count();
  }
};

int active_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

Matrix parse_flux(const std::string& spec, const SpaceTimeMesh& mesh) {
  Matrix flux = Matrix::Zero(mesh.n_space, mesh.n_steps);
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "zero") return flux;
  if (kind == "constant") {
    flux.setConstant(std::stod(args));
    return flux;
  }
  if (kind == "pulse") {
    // pulse:theta0,t0,theta_width,t_width  (Gaussian bump in angle and time)
    std::array<Real, 4> v{0.0, 0.1, 0.5, 0.1};
    std::stringstream ss(args);
    std::string tok;
    for (auto& entry : v) {
      if (!std::getline(ss, tok, ',')) break;
      entry = std::stod(tok);
    }
    for (int k = 0; k < mesh.n_steps; ++k) {
      const Real t = mesh.midpoint_time(k + 1);
      for (int i = 0; i < mesh.n_space; ++i) {
        Real dth = std::remainder(mesh.params[i] - v[0], 2.0 * M_PI);
        flux(i, k) = std::exp(-dth * dth / (2.0 * v[2] * v[2]) -
                              (t - v[1]) * (t - v[1]) / (2.0 * v[3] * v[3]));
      }
    }
    return flux;
  }
  if (kind == "csv") {
    std::ifstream in(args);
    if (!in) throw ValidationError("cannot open flux csv: " + args);
    std::string line;
    int row = 0;
    while (std::getline(in, line) && row < mesh.n_space) {
      std::stringstream ss(line);
      std::string cell;
      int col = 0;
      while (std::getline(ss, cell, ',') && col < mesh.n_steps)
        flux(row, col++) = std::stod(cell);
      if (col != mesh.n_steps)
        throw ValidationError("flux csv: wrong number of columns at row " +
                              std::to_string(row));
      ++row;
    }
    if (row != mesh.n_space) throw ValidationError("flux csv: wrong number of rows");
    return flux;
  }
  throw ValidationError("unknown flux spec: " + spec +
                        " (expected zero|constant:c|pulse:...|csv:path)");
}

int cmd_forward(const std::string& scenario_path, const std::string& flux_spec,
                const std::string& out_dir, bool paper_system, int threads) {
  Timer timer;
  Scenario scenario = Scenario::load(scenario_path);
  fs::create_directories(out_dir);
  ForwardContext ctx(scenario);
  const Matrix flux = parse_flux(flux_spec, ctx.outer_mesh());

  RunManifest manifest;
  manifest.command = "forward";
  manifest.scenario_hash = scenario.hash();
  manifest.parameters["flux"] = flux_spec;
  manifest.parameters["paper_system"] = paper_system ? "true" : "false";
  manifest.threads = threads;

  ForwardSolution sol =
      scenario.has_cavity() ? ctx.solve_indirect(flux) : ctx.solve_empty(flux);
  const std::string u3_path = out_dir + "/u3.csv";
  write_trace_csv(u3_path, ctx.outer_mesh(), sol.u3.values);
  manifest.outputs.push_back(u3_path);
  if (scenario.has_cavity()) {
    write_trace_csv(out_dir + "/u1.csv", ctx.inner_mesh(), sol.u1.values);
    write_trace_csv(out_dir + "/u2.csv", ctx.inner_mesh(), sol.u2.values);
    manifest.outputs.push_back(out_dir + "/u1.csv");
    manifest.outputs.push_back(out_dir + "/u2.csv");
    manifest.parameters["robin_residual"] = format_real(sol.robin_residual);
    std::cout << "robin residual: " << sol.robin_residual << "\n";
  }

  if (paper_system) {
    if (!scenario.has_cavity())
      throw ValidationError("--paper-system requires a cavity scenario");
    ForwardSolution direct = ctx.solve_direct(flux);
    write_trace_csv(out_dir + "/u1_direct.csv", ctx.inner_mesh(), direct.u1.values);
    write_trace_csv(out_dir + "/u2_direct.csv", ctx.inner_mesh(), direct.u2.values);
    write_trace_csv(out_dir + "/u3_direct.csv", ctx.outer_mesh(), direct.u3.values);
    for (const char* f : {"/u1_direct.csv", "/u2_direct.csv", "/u3_direct.csv"})
      manifest.outputs.push_back(out_dir + f);

    const Vector w = ctx.spacetime_weights();
    const Vector d = (direct.u3.values - sol.u3.values).reshaped();
    const Vector base = sol.u3.values.reshaped();
    const Real rel = std::sqrt(d.dot(w.cwiseProduct(d))) /
                     std::max(std::sqrt(base.dot(w.cwiseProduct(base))), 1e-300);
    manifest.parameters["direct_indirect_rel_l2"] = format_real(rel);
    std::cout << "direct vs indirect outer-trace agreement (rel l2): " << rel << "\n";
  }

  manifest.wall_clock_seconds = timer.seconds();
  manifest.write(out_dir + "/manifest.json");
  std::cout << "wrote " << out_dir << "\n";
  return 0;
}

int cmd_synthesize(const std::string& scenario_path, Real noise, std::uint64_t seed,
                   const std::string& out_dir, bool dump_maps, int threads) {
  Timer timer;
  Scenario scenario = Scenario::load(scenario_path);
  if (!scenario.has_cavity())
    std::cout << "note: cavity-free scenario, gap matrix will be ~0\n";
  fs::create_directories(out_dir);
  ForwardContext ctx(scenario);

  NtdGapMatrix lambda_d = ctx.ntd_matrix(scenario.has_cavity());
  NtdGapMatrix lambda_empty = ctx.ntd_matrix(false);
  if (noise > 0.0) lambda_d.map = add_noise(lambda_d.map, noise, seed);
  NtdGapMatrix gap = gap_matrix(lambda_d, lambda_empty);

  RunManifest manifest;
  manifest.command = "synthesize";
  manifest.scenario_hash = scenario.hash();
  manifest.parameters["noise"] = format_real(noise);
  manifest.parameters["seed"] = std::to_string(seed);
  manifest.threads = threads;

  const std::string gap_path = out_dir + "/gap_F.bin";
  write_ntd_binary(gap_path, gap);
  manifest.outputs.push_back(gap_path);
  if (dump_maps) {
    write_ntd_binary(out_dir + "/lambda_D.bin", lambda_d);
    write_ntd_binary(out_dir + "/lambda_empty.bin", lambda_empty);
    manifest.outputs.push_back(out_dir + "/lambda_D.bin");
    manifest.outputs.push_back(out_dir + "/lambda_empty.bin");
  }
  manifest.wall_clock_seconds = timer.seconds();
  manifest.write(out_dir + "/manifest.json");
  std::cout << "wrote " << gap_path << "\n";
  return 0;
}

int cmd_reconstruct(const std::string& gap_path, const std::string& scenario_path,
                    Real grid_spacing, Real sample_time, Real tau, Real alpha,
                    const std::string& alpha_rule, const std::string& out_dir,
                    bool emit_plot, int threads) {
  Timer timer;
  Scenario blind = Scenario::load_blind(scenario_path);
  NtdGapMatrix gap = read_ntd_binary(gap_path);
  fs::create_directories(out_dir);

  if (sample_time <= 0.0) sample_time = blind.horizon / 4.0;
  GridSpec grid = make_grid(blind.outer, grid_spacing);
  if (tau <= 0.0) tau = std::pow(2.0 * grid_spacing, 2);

  RegularizationConfig reg;
  reg.alpha = alpha;
  if (alpha_rule == "quasiopt")
    reg.rule = RegularizationConfig::Rule::quasiopt;
  else if (alpha_rule != "fixed")
    throw ValidationError("--alpha-rule must be fixed or quasiopt");

  IndicatorField field = indicator_sweep(blind, gap, grid, sample_time, tau, reg);
  ContourResult contour = extract_boundary(field);

  RunManifest manifest;
  manifest.command = "reconstruct";
  manifest.scenario_hash = blind.hash();
  manifest.parameters["gap_file"] = gap_path;
  manifest.parameters["grid_spacing"] = format_real(grid_spacing);
  manifest.parameters["s"] = format_real(sample_time);
  manifest.parameters["tau"] = format_real(tau);
  manifest.parameters["alpha"] = format_real(alpha);
  manifest.parameters["alpha_rule"] = alpha_rule;
  manifest.parameters["indicator_norm"] = "discrete_l2_surrogate";
  manifest.parameters["contour_status"] = contour.diagnostic;
  manifest.threads = threads;

  const std::string ind_path = out_dir + "/indicator.csv";
  const std::string con_path = out_dir + "/contour.csv";
  write_indicator_csv(ind_path, field);
  write_contour_csv(con_path, contour);
  manifest.outputs.push_back(ind_path);
  manifest.outputs.push_back(con_path);
  if (emit_plot) {
    write_plot_script(out_dir + "/plot_indicator.py", ind_path, con_path);
    manifest.outputs.push_back(out_dir + "/plot_indicator.py");
  }

  long failures = 0;
  for (int f : field.flags)
    if (f & flag_failed) ++failures;
  manifest.parameters["failed_points"] = std::to_string(failures);

  manifest.wall_clock_seconds = timer.seconds();
  manifest.write(out_dir + "/manifest.json");
  std::cout << "contour: " << contour.diagnostic << " (" << contour.loops.size()
            << " loops)\n";
  std::cout << "wrote " << out_dir << "\n";
  return 0;
}

int cmd_halfspace(Real lambda0, std::vector<Real> epsilons, const std::string& out_dir,
                  int threads) {
  Timer timer;
  if (epsilons.empty()) throw ValidationError("halfspace: provide at least one epsilon");
  fs::create_directories(out_dir);

  std::vector<AsymptoticsRow> rows = coincident_asymptotics(lambda0, epsilons);
  const std::string csv_path = out_dir + "/halfspace_asymptotics.csv";
  {
    std::ofstream out(csv_path);
    out << "epsilon,w_plus,eps3_w_plus,deviation\n";
    for (const auto& r : rows)
      out << format_real(r.epsilon) << ',' << format_real(r.w_plus_value) << ','
          << format_real(r.scaled) << ',' << format_real(r.deviation) << '\n';
  }

  bool pass = true;
  for (const auto& r : rows)
    if (r.epsilon <= 1e-3 + 1e-12) pass = pass && r.deviation <= 0.05;
  std::cout << "limit constant " << coincident_limit_constant() << "\n";
  for (const auto& r : rows)
    std::cout << "eps=" << r.epsilon << "  eps^3*W+=" << r.scaled
              << "  deviation=" << r.deviation << "\n";
  if (std::any_of(epsilons.begin(), epsilons.end(),
                  [](Real e) { return e <= 1e-3 + 1e-12; }))
    std::cout << "5% criterion at eps<=1e-3: " << (pass ? "PASS" : "FAIL") << "\n";

  Real image_report = -1.0;
  if (lambda0 == 0.0) {
    // image-solution exactness at a generic configuration
    HalfspaceConfig cfg;
    cfg.lambda0 = 0.0;
    cfg.xi3 = -0.37;
    cfg.eta3 = -0.21;
    cfg.xi_perp = Vec2(0.3, -0.2);
    cfg.eta_perp = Vec2(-0.1, 0.5);
    cfg.t = 0.13;
    cfg.s = 0.02;
    const Real w = w_plus(cfg);
    const Real tau = cfg.t - cfg.s;
    const Real r2 = (cfg.xi_perp - cfg.eta_perp).squaredNorm() +
                    (cfg.xi3 + cfg.eta3) * (cfg.xi3 + cfg.eta3);
    const Real image = std::pow(4.0 * M_PI * tau, -1.5) * std::exp(-r2 / (4.0 * tau));
    image_report = std::abs(w - image) / image;
    std::cout << "image-solution exactness (lambda0 = 0): rel err " << image_report
              << "\n";
  }

  RunManifest manifest;
  manifest.command = "halfspace";
  manifest.parameters["lambda0"] = format_real(lambda0);
  std::string eps_list;
  for (Real e : epsilons) eps_list += (eps_list.empty() ? "" : ";") + format_real(e);
  manifest.parameters["epsilons"] = eps_list;
  if (image_report >= 0.0) manifest.parameters["image_rel_err"] = format_real(image_report);
  manifest.outputs.push_back(csv_path);
  manifest.threads = threads;
  manifest.wall_clock_seconds = timer.seconds();
  manifest.write(out_dir + "/manifest.json");
  return 0;
}

int cmd_validate(const std::string& scenario_path, const std::string& out_dir,
                 int threads) {
  Timer timer;
  Scenario scenario = Scenario::load(scenario_path, /*allow_misoriented=*/true);
  fs::create_directories(out_dir);

  json checks = json::array();
  bool all_pass = true;
  auto record = [&](const std::string& name, const std::string& status, Real value,
                    Real threshold) {
    checks.push_back({{"name", name},
                      {"status", status},
                      {"value", value},
                      {"threshold", threshold}});
    if (status == "fail") all_pass = false;
  };

  // orientation gate: mis-oriented geometry invalidates everything downstream
  SpaceTimeMesh outer_probe = build_spatial_mesh(scenario.outer, 256);
  bool oriented = outer_probe.signed_area() > 0.0;
  if (scenario.has_cavity()) {
    SpaceTimeMesh inner_probe = build_spatial_mesh(*scenario.cavity, 256);
    oriented = oriented && inner_probe.signed_area() > 0.0;
  }
  record("orientation", oriented ? "pass" : "fail", oriented ? 1.0 : -1.0, 0.0);
  if (!oriented) {
    for (const char* name : {"mesh_weights", "jump_relations", "reciprocity",
                             "factorization", "forward_cross_check"})
      record(name, "skipped", 0.0, 0.0);
    json report{{"overall", "fail"}, {"checks", checks}};
    std::ofstream(out_dir + "/validation.json") << report.dump(2) << '\n';
    std::cout << report.dump(2) << "\n";
    return 1;
  }

  // mesh weights against an adaptive arc-length oracle
  {
    SpaceTimeMesh mesh = build_spatial_mesh(scenario.outer, scenario.n_space_outer);
    QuadResult arc = adaptive_quadrature(
        [&](Real th) { return scenario.outer.speed(th); }, 0.0, 2.0 * M_PI, 1e-12);
    const Real rel = std::abs(mesh.perimeter() - arc.value) / arc.value;
    record("mesh_weights", rel <= 1e-6 ? "pass" : "fail", rel, 1e-6);
  }

  // single-layer jump relations on a shrunken copy of the outer circle radius
  {
    Scenario probe = scenario;
    probe.n_steps = std::min(scenario.n_steps, 16);
    ForwardContext ctx(probe);
    const SpaceTimeMesh& mesh = ctx.outer_mesh();
    Matrix density(mesh.n_space, mesh.n_steps);
    for (int k = 0; k < mesh.n_steps; ++k)
      for (int i = 0; i < mesh.n_space; ++i)
        density(i, k) = 1.0 + std::cos(mesh.params[i]);
    const int node = mesh.n_space / 3;
    const int step = mesh.n_steps - 1;
    const Real t = mesh.midpoint_time(step + 1);
    const Real h = 0.05 * mesh.perimeter() / mesh.n_space;
    std::vector<Vec2> pts{mesh.points[node] + h * mesh.normals[node],
                          mesh.points[node] - h * mesh.normals[node]};
    std::vector<Real> times{t, t};
    std::vector<Vec2> dirs{mesh.normals[node], mesh.normals[node]};
    Vector vals = evaluate_potential(LayerKind::single_layer, mesh, density, pts, times);
    Vector grads = evaluate_potential(LayerKind::adjoint_double_layer, mesh, density,
                                      pts, times, &dirs);
    const Real continuity = std::abs(vals[0] - vals[1]);
    const Real jump = (grads[1] - grads[0]) / density(node, step);
    const bool ok = continuity < 5e-2 * std::abs(vals[0]) && std::abs(jump - 1.0) < 0.2;
    record("jump_relations", ok ? "pass" : "fail", std::abs(jump - 1.0), 0.2);
  }

  // reciprocity of the NtD map on a coarse grid
  {
    Scenario probe = scenario;
    probe.n_space_outer = std::min(scenario.n_space_outer, 24);
    probe.n_space_inner = std::min(std::max(scenario.n_space_inner, 8), 24);
    probe.n_steps = std::min(scenario.n_steps, 16);
    ForwardContext ctx(probe);
    NtdGapMatrix ntd = ctx.ntd_matrix(probe.has_cavity());
    const Real defect =
        reciprocity_defect(ntd, ctx.spacetime_weights(), 20, 20260209ull);
    record("reciprocity", defect <= 5e-2 ? "pass" : "fail", defect, 5e-2);
  }

  // factorization residual (or the F = 0 convention without a cavity)
  if (scenario.has_cavity()) {
    Scenario probe = scenario;
    probe.n_space_outer = std::min(scenario.n_space_outer, 32);
    probe.n_space_inner = std::min(std::max(scenario.n_space_inner, 8), 32);
    probe.n_steps = std::min(scenario.n_steps, 24);
    ForwardContext ctx(probe);
    const Real residual = factorization_residual(ctx);
    record("factorization", residual <= 8e-2 ? "pass" : "fail", residual, 8e-2);
  } else {
    record("factorization_f_zero_convention", "pass", 0.0, 0.0);
  }

  // cross-method check against the finite-difference oracle (concentric only)
  const bool concentric =
      scenario.has_cavity() && scenario.outer.kind == CurveKind::circle &&
      scenario.cavity->kind == CurveKind::circle &&
      (scenario.outer.center - scenario.cavity->center).norm() < 1e-12 &&
      scenario.lambda_is_constant;
  if (concentric) {
    Scenario probe = scenario;
    probe.n_space_outer = std::min(scenario.n_space_outer, 32);
    probe.n_space_inner = probe.n_space_outer;
    probe.n_steps = std::min(scenario.n_steps, 32);
    ForwardContext ctx(probe);
    auto flux_fn = [](Real theta, Real t) {
      return std::cos(theta) * std::min(t / 0.2, 1.0) + 1.0;
    };
    Matrix flux(probe.n_space_outer, probe.n_steps);
    const SpaceTimeMesh& mesh = ctx.outer_mesh();
    for (int k = 0; k < probe.n_steps; ++k)
      for (int i = 0; i < probe.n_space_outer; ++i)
        flux(i, k) = flux_fn(mesh.params[i], mesh.midpoint_time(k + 1));
    ForwardSolution bem = ctx.solve_indirect(flux);

    AnnulusGrid grid;
    grid.r_inner = scenario.cavity->radius;
    grid.r_outer = scenario.outer.radius;
    grid.n_r = 96;
    grid.n_theta = probe.n_space_outer;
    grid.n_time = probe.n_steps * 16;
    grid.horizon = scenario.horizon;
    FdmSolution fdm = fdm_solve(grid, scenario.lambda_constant, flux_fn);
    Matrix fdm_trace = fdm_ntd_trace(fdm, mesh);
    const Vector w = ctx.spacetime_weights();
    const Vector d = (bem.u3.values - fdm_trace).reshaped();
    const Vector base = fdm_trace.reshaped();
    const Real rel = std::sqrt(d.dot(w.cwiseProduct(d))) /
                     std::max(std::sqrt(base.dot(w.cwiseProduct(base))), 1e-300);
    record("fdm_cross_check", rel <= 5e-2 ? "pass" : "fail", rel, 5e-2);

    ForwardSolution direct = ctx.solve_direct(flux);
    const Vector dd = (direct.u3.values - bem.u3.values).reshaped();
    const Vector bb = bem.u3.values.reshaped();
    const Real rel2 = std::sqrt(dd.dot(w.cwiseProduct(dd))) /
                      std::max(std::sqrt(bb.dot(w.cwiseProduct(bb))), 1e-300);
    record("forward_cross_check", rel2 <= 1e-2 ? "pass" : "fail", rel2, 1e-2);
  } else {
    record("fdm_cross_check", "skipped", 0.0, 0.0);
    if (scenario.has_cavity()) {
      Scenario probe = scenario;
      probe.n_space_outer = std::min(scenario.n_space_outer, 32);
      probe.n_space_inner = std::min(std::max(scenario.n_space_inner, 8), 32);
      probe.n_steps = std::min(scenario.n_steps, 24);
      ForwardContext ctx(probe);
      Matrix flux = Matrix::Ones(probe.n_space_outer, probe.n_steps);
      ForwardSolution ind = ctx.solve_indirect(flux);
      ForwardSolution dir = ctx.solve_direct(flux);
      const Vector w = ctx.spacetime_weights();
      const Vector dd = (dir.u3.values - ind.u3.values).reshaped();
      const Vector bb = ind.u3.values.reshaped();
      const Real rel2 = std::sqrt(dd.dot(w.cwiseProduct(dd))) /
                        std::max(std::sqrt(bb.dot(w.cwiseProduct(bb))), 1e-300);
      record("forward_cross_check", rel2 <= 1e-2 ? "pass" : "fail", rel2, 1e-2);
    } else {
      record("forward_cross_check", "skipped", 0.0, 0.0);
    }
  }

  json report{{"overall", all_pass ? "pass" : "fail"}, {"checks", checks}};
  std::ofstream(out_dir + "/validation.json") << report.dump(2) << '\n';
  std::cout << report.dump(2) << "\n";

  RunManifest manifest;
  manifest.command = "validate";
  manifest.scenario_hash = scenario.hash();
  manifest.outputs.push_back(out_dir + "/validation.json");
  manifest.threads = threads;
  manifest.wall_clock_seconds = timer.seconds();
  manifest.write(out_dir + "/manifest.json");
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"space-time boundary-element simulator and cavity reconstruction"};
  app.set_version_flag("--version", version_string);
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (0 = hardware default)");

  std::string scenario_path, out_dir = "out", flux_spec = "constant:1.0";
  bool paper_system = false;
  auto* fwd = app.add_subcommand("forward", "solve the forward problem");
  fwd->add_option("--scenario", scenario_path, "scenario JSON")->required();
  fwd->add_option("--flux", flux_spec, "zero|constant:c|pulse:th0,t0,thw,tw|csv:path");
  fwd->add_option("--out", out_dir, "output directory");
  fwd->add_flag("--paper-system", paper_system, "also solve the direct system");

  Real noise = 0.0;
  std::uint64_t seed = 1;
  bool dump_maps = false;
  auto* syn = app.add_subcommand("synthesize", "build the gap matrix data");
  syn->add_option("--scenario", scenario_path, "scenario JSON")->required();
  syn->add_option("--noise", noise, "relative measurement noise level");
  syn->add_option("--seed", seed, "noise seed");
  syn->add_flag("--dump-maps", dump_maps, "also write both NtD maps");
  syn->add_option("--out", out_dir, "output directory");

  std::string gap_path, alpha_rule = "fixed";
  Real grid_spacing = 0.05, sample_time = 0.0, tau = 0.0, alpha = 1e-10;
  bool emit_plot = false;
  auto* rec = app.add_subcommand("reconstruct", "linear sampling reconstruction");
  rec->add_option("--f", gap_path, "gap matrix binary")->required();
  rec->add_option("--scenario", scenario_path, "blind scenario JSON (outer only)")
      ->required();
  rec->add_option("--grid", grid_spacing, "sampling grid spacing");
  rec->add_option("--s", sample_time, "pole time s (default T/4)");
  rec->add_option("--tau", tau, "indicator time offset (default (2 dx)^2)");
  rec->add_option("--alpha", alpha, "Tikhonov parameter");
  rec->add_option("--alpha-rule", alpha_rule, "fixed | quasiopt");
  rec->add_flag("--plot", emit_plot, "emit a matplotlib script");
  rec->add_option("--out", out_dir, "output directory");

  Real lambda0 = 1.0;
  std::vector<Real> epsilons;
  auto* half = app.add_subcommand("halfspace", "reflected-solution asymptotics");
  half->add_option("--lambda0", lambda0, "impedance at the flattening point");
  half->add_option("--eps", epsilons, "epsilon list")->expected(-1);
  half->add_option("--out", out_dir, "output directory");

  auto* val = app.add_subcommand("validate", "run the property suite");
  val->add_option("--scenario", scenario_path, "scenario JSON")->required();
  val->add_option("--out", out_dir, "output directory");

  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);
  set_threads(threads);
  const int effective_threads = active_threads();

  try {
    if (*fwd)
      return cmd_forward(scenario_path, flux_spec, out_dir, paper_system,
                         effective_threads);
    if (*syn)
      return cmd_synthesize(scenario_path, noise, seed, out_dir, dump_maps,
                            effective_threads);
    if (*rec)
      return cmd_reconstruct(gap_path, scenario_path, grid_spacing, sample_time, tau,
                             alpha, alpha_rule, out_dir, emit_plot, effective_threads);
    if (*half) {
      if (epsilons.empty()) epsilons = {1e-1, 1e-2, 1e-3};
      return cmd_halfspace(lambda0, epsilons, out_dir, effective_threads);
    }
    if (*val) return cmd_validate(scenario_path, out_dir, effective_threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
