#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <filesystem>
#include <iostream>

#include "grr/config.hpp"
#include "grr/experiments.hpp"
#include "grr/geometry.hpp"
#include "grr/pod.hpp"
#include "grr/registration.hpp"

namespace fs = std::filesystem;
using namespace grr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNoConvergence = 2;

std::uint64_t resolve_seed(const RunConfig& cfg) {
  if (const char* env = std::getenv("GRR_SEED")) return std::stoull(env);
  return static_cast<std::uint64_t>(cfg.get_int_or("seed", 20240517));
}

VectorXd parse_pair(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw InputError("expected 'x,y': " + s);
  VectorXd v(2);
  v << std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1));
  return v;
}

const std::set<std::string> kRegisterKeys = {
    "mesh.path", "space.box_lo", "space.box_hi", "space.n_lp", "space.n_lp_is_dim",
    "space.bc", "space.kind", "space.path", "clouds.reference", "clouds.target",
    "clouds.target_raw", "objective.kind", "objective.epsilon", "objective.c_exp",
    "objective.kappa_msh", "objective.lambda1", "objective.lambda2",
    "objective.quad_order", "objective.include_penalty", "objective.literal_exp_mesh_sign",
    "method", "tykhonov.xi", "morozov.delta", "inverted.xi", "inverted.delta_con",
    "solver.max_iters", "solver.grad_tol", "solver.step_tol", "solver.barrier.mu0",
    "solver.barrier.shrink", "solver.barrier.rounds", "solver.barrier.mu_min",
    "solver.auglag.lambda0", "solver.auglag.rho0", "solver.auglag.growth",
    "solver.auglag.tol",
    "cpd.beta", "cpd.lambda", "cpd.w", "cpd.max_em_iters", "cpd.reduced_basis",
    "out.dir", "seed"};

ObjectiveConfig objective_from_config(const RunConfig& cfg) {
  ObjectiveConfig o;
  o.kind = objective_kind_from_string(cfg.get_or("objective.kind", "exp_jac"));
  o.epsilon = cfg.get_double_or("objective.epsilon", 0.1);
  o.c_exp = cfg.get_double_or("objective.c_exp", 0.0);
  o.kappa_msh = cfg.get_double_or("objective.kappa_msh", 10.0);
  o.lambda1 = cfg.get_double_or("objective.lambda1", o.lambda1);
  o.lambda2 = cfg.get_double_or("objective.lambda2", o.lambda2);
  o.quad_order = static_cast<int>(cfg.get_int_or("objective.quad_order", 0));
  o.include_penalty = cfg.get_bool_or("objective.include_penalty",
                                      o.kind == ObjectiveKind::exp_jac ||
                                          o.kind == ObjectiveKind::exp_mesh);
  o.literal_exp_mesh_sign = cfg.get_bool_or("objective.literal_exp_mesh_sign", false);
  return o;
}

SolverConfig solver_from_config(const RunConfig& cfg) {
  SolverConfig s;
  s.max_iters = static_cast<int>(cfg.get_int_or("solver.max_iters", s.max_iters));
  s.grad_tol = cfg.get_double_or("solver.grad_tol", s.grad_tol);
  s.step_tol = cfg.get_double_or("solver.step_tol", s.step_tol);
  s.barrier.mu0 = cfg.get_double_or("solver.barrier.mu0", s.barrier.mu0);
  s.barrier.shrink = cfg.get_double_or("solver.barrier.shrink", s.barrier.shrink);
  s.barrier.rounds = static_cast<int>(cfg.get_int_or("solver.barrier.rounds", s.barrier.rounds));
  s.barrier.mu_min = cfg.get_double_or("solver.barrier.mu_min", s.barrier.mu_min);
  s.auglag.lambda0 = cfg.get_double_or("solver.auglag.lambda0", s.auglag.lambda0);
  s.auglag.rho0 = cfg.get_double_or("solver.auglag.rho0", s.auglag.rho0);
  s.auglag.growth = cfg.get_double_or("solver.auglag.growth", s.auglag.growth);
  s.auglag.tol = cfg.get_double_or("solver.auglag.tol", s.auglag.tol);
  return s;
}

MapSpace space_from_config(const RunConfig& cfg) {
  if (cfg.has("space.path")) return MapSpace::load(cfg.get("space.path"));
  const VectorXd lo = parse_pair(cfg.get_or("space.box_lo", "0,0"));
  const VectorXd hi = parse_pair(cfg.get_or("space.box_hi", "1,1"));
  int n_lp = static_cast<int>(cfg.get_int_or("space.n_lp", 10));
  if (cfg.get_bool_or("space.n_lp_is_dim", false)) n_lp -= 1;
  const std::string bc = cfg.get_or("space.bc", "normal_zero");
  const std::string kind = cfg.get_or("space.kind", "full");
  return MapSpace::build(Box::make(lo, hi), n_lp,
                         bc == "none" ? BoundaryCondition::none : BoundaryCondition::normal_zero,
                         kind == "potential" ? SpaceKind::potential : SpaceKind::full);
}

int cmd_register(const std::string& config_path, const std::string& out_override) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = RunConfig::parse_file(config_path);
  cfg.validate_keys(kRegisterKeys);
  const std::uint64_t seed = resolve_seed(cfg);
  const std::string out_dir = out_override.empty() ? cfg.get_or("out.dir", "out") : out_override;
  fs::create_directories(out_dir);

  const MapSpace space = space_from_config(cfg);
  std::optional<Mesh> mesh;
  if (cfg.has("mesh.path")) mesh.emplace(read_mesh(cfg.get("mesh.path")));

  RegistrationProblem prob;
  prob.space = &space;
  prob.objective = objective_from_config(cfg);
  prob.solver = solver_from_config(cfg);
  prob.method = reg_method_from_string(cfg.get_or("method", "tykhonov"));
  prob.xi = cfg.get_double_or(prob.method == RegMethod::inverted ? "inverted.xi" : "tykhonov.xi",
                              1e-5);
  prob.delta = cfg.get_double_or("morozov.delta", 1e-4);
  prob.delta_con = cfg.get_double_or("inverted.delta_con", 1.0);
  prob.mesh = mesh ? &*mesh : nullptr;
  prob.x_pts = read_cloud_csv(cfg.get("clouds.reference"));

  CpdRegistrationResult piped;
  RegistrationResult res;
  if (cfg.has("clouds.target_raw")) {
    CpdConfig ccfg;
    ccfg.beta = cfg.get_double_or("cpd.beta", 1.0);
    ccfg.lambda = cfg.get_double_or("cpd.lambda", 1.0);
    ccfg.w = cfg.get_double_or("cpd.w", 0.0);
    ccfg.max_em_iters = static_cast<int>(cfg.get_int_or("cpd.max_em_iters", 300));
    std::optional<MapSpace> reduced;
    if (cfg.has("cpd.reduced_basis")) reduced.emplace(MapSpace::load(cfg.get("cpd.reduced_basis")));
    piped = register_with_cpd(prob, read_cloud_csv(cfg.get("clouds.target_raw")), ccfg,
                              reduced ? &*reduced : nullptr);
    res = piped.registration;
  } else {
    prob.y_pts = read_cloud_csv(cfg.get("clouds.target"));
    res = register_map(prob);
  }

  save_mapping((fs::path(out_dir) / "mapping.bin").string(), res.phi);
  space.save((fs::path(out_dir) / "space.bin").string());
  if (mesh) {
    const Mesh deformed = morph_mesh(*mesh, res.phi);
    write_mesh((fs::path(out_dir) / "deformed_mesh.txt").string(), deformed);
  }
  MetricsRow row;
  row.run_id = "register";
  row.method = to_string(prob.method);
  row.param = prob.method == RegMethod::morozov ? prob.delta : prob.xi;
  row.q_min = res.metrics.q_min;
  row.j_min = res.metrics.j_min;
  row.misfit_inf = res.metrics.misfit_inf;
  row.nbr_its = res.report.iterations;
  row.cost_s = res.report.wall_time_s;
  row.converged = res.report.converged;
  write_metrics_csv((fs::path(out_dir) / "metrics.csv").string(), {row});
  write_run_json(out_dir, "register", cfg, seed,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return res.report.converged ? kExitOk : kExitNoConvergence;
}

int cmd_cpd(const std::string& ref_path, const std::string& target_path, double beta,
            double lambda, double w, const std::string& out_path,
            const std::string& reduced_path) {
  const MatrixXd x = read_cloud_csv(ref_path);
  const MatrixXd y = read_cloud_csv(target_path);
  CpdConfig cfg;
  cfg.beta = beta;
  cfg.lambda = lambda;
  cfg.w = w;
  CpdResult res;
  if (!reduced_path.empty()) {
    const MapSpace space = MapSpace::load(reduced_path);
    res = cpd_run_reduced(x, y, cfg, space);
  } else {
    res = cpd_run(x, y, cfg);
  }
  write_cloud_csv(out_path, res.y_aligned);
  RunConfig meta = RunConfig::parse_string("", "<args>");
  meta.set("cpd.beta", fmt17(beta));
  meta.set("cpd.lambda", fmt17(lambda));
  meta.set("cpd.w", fmt17(w));
  write_run_json(fs::path(out_path).parent_path().string(), "cpd", meta, resolve_seed(meta),
                 res.wall_time_s);
  std::cout << "cpd iterations=" << res.iterations << " converged=" << res.converged
            << " cover_dist=" << fmt17(res.cover_dist) << "\n";
  return res.converged ? kExitOk : kExitNoConvergence;
}

int cmd_pod(const std::string& snapshots_dir, const std::string& space_path, double tol,
            const std::string& out_path) {
  const MapSpace space = MapSpace::load(space_path.empty()
                                            ? (fs::path(snapshots_dir) / "space.bin").string()
                                            : space_path);
  std::vector<VectorXd> snaps;
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(snapshots_dir))
    if (e.path().extension() == ".map" || e.path().filename() == "mapping.bin")
      files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) snaps.push_back(load_mapping_coeffs(f, space));
  if (snaps.empty()) throw InputError("no .map snapshots found in " + snapshots_dir);
  const PodBasis basis = pod_build(space, snaps, tol);
  const MapSpace reduced = reduce_space(space, basis);
  reduced.save(out_path);
  save_pod_eigenvalues_csv(out_path + ".eigenvalues.csv", basis);
  RunConfig meta = RunConfig::parse_string("", "<args>");
  meta.set("pod.tol", fmt17(tol));
  meta.set("pod.snapshots", snapshots_dir);
  write_run_json(fs::path(out_path).parent_path().string(), "pod", meta, resolve_seed(meta),
                 0.0);
  std::cout << "pod modes=" << basis.mode_count() << " snapshots=" << snaps.size() << "\n";
  return kExitOk;
}

int cmd_analyze(bool corner, int alphas, const std::string& tube_ref, double tube_delta,
                long tube_n, const std::string& hausdorff_a, const std::string& hausdorff_b,
                const std::string& out_path) {
  if (corner) {
    std::ofstream out(out_path.empty() ? "corner_constant.csv" : out_path);
    out << "alpha,C\n";
    const double pi = 3.14159265358979323846;
    for (int i = 1; i <= alphas; ++i) {
      const double a = 0.5 * pi * i / alphas;
      out << fmt17(a) << ',' << fmt17(corner_constant(a)) << '\n';
    }
    return kExitOk;
  }
  if (!tube_ref.empty()) {
    SampledBoundary b{read_cloud_csv(tube_ref)};
    const auto r = tube_area(b, tube_delta, tube_n);
    std::cout << "tube_area estimate=" << fmt17(r.estimate) << " bound=" << fmt17(r.bound)
              << " std_error=" << fmt17(r.std_error) << "\n";
    return kExitOk;
  }
  if (!hausdorff_a.empty()) {
    const double d = hausdorff(read_cloud_csv(hausdorff_a), read_cloud_csv(hausdorff_b));
    std::cout << "hausdorff=" << fmt17(d) << "\n";
    return kExitOk;
  }
  std::cerr << "analyze: nothing to do (use --corner-constant, --tube-ref or --hausdorff-a)\n";
  return kExitInput;
}

int cmd_reproduce(const std::string& experiment, const std::string& config_path,
                  const std::string& out_dir, bool paper, int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = config_path.empty() ? RunConfig::parse_string("", "<default>")
                                      : RunConfig::parse_file(config_path);
  const std::uint64_t seed = resolve_seed(cfg);
  ExperimentScale scale = paper ? paper_scale() : desk_scale();
  scale.n_train = static_cast<int>(cfg.get_int_or("experiment.n_train", scale.n_train));
  scale.n_test = static_cast<int>(cfg.get_int_or("experiment.n_test", scale.n_test));
  run_table(experiment, scale, out_dir, seed, jobs);
  write_run_json(out_dir, "reproduce " + experiment, cfg, seed,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grr: optimization-based geometry registration and reduction"};
  app.require_subcommand(1);

  auto* reg = app.add_subcommand("register", "solve a registration problem");
  std::string reg_config, reg_out;
  reg->add_option("--config", reg_config, "run configuration file")->required();
  reg->add_option("--out", reg_out, "output directory override");

  auto* cpd = app.add_subcommand("cpd", "align a raw target cloud to a reference cloud");
  std::string cpd_ref, cpd_target, cpd_out, cpd_reduced;
  double cpd_beta = 1.0, cpd_lambda = 1.0, cpd_w = 0.0;
  cpd->add_option("--ref", cpd_ref)->required();
  cpd->add_option("--target", cpd_target)->required();
  cpd->add_option("--beta", cpd_beta);
  cpd->add_option("--lambda", cpd_lambda);
  cpd->add_option("--w", cpd_w);
  cpd->add_option("--out", cpd_out)->required();
  cpd->add_option("--reduced", cpd_reduced, "reduced space file");

  auto* pod = app.add_subcommand("pod", "build a reduced space from mapping snapshots");
  std::string pod_dir, pod_space, pod_out = "basis.bin";
  double pod_tol = 1e-5;
  pod->add_option("--snapshots", pod_dir)->required();
  pod->add_option("--space", pod_space, "space file (defaults to snapshots/space.bin)");
  pod->add_option("--tol", pod_tol);
  pod->add_option("--out", pod_out);

  auto* ana = app.add_subcommand("analyze", "geometric analysis utilities");
  bool ana_corner = false;
  int ana_alphas = 50;
  std::string ana_tube_ref, ana_ha, ana_hb, ana_out;
  double ana_tube_delta = 0.1;
  long ana_tube_n = 1000000;
  ana->add_flag("--corner-constant", ana_corner);
  ana->add_option("--alphas", ana_alphas);
  ana->add_option("--tube-ref", ana_tube_ref);
  ana->add_option("--tube-delta", ana_tube_delta);
  ana->add_option("--tube-samples", ana_tube_n);
  ana->add_option("--hausdorff-a", ana_ha);
  ana->add_option("--hausdorff-b", ana_hb);
  ana->add_option("--out", ana_out);

  auto* rep = app.add_subcommand("reproduce", "run an experiment and emit metric tables");
  std::string rep_exp, rep_config, rep_out = "results";
  bool rep_paper = false;
  int rep_jobs = 1;
  rep->add_option("experiment", rep_exp, "three-point | ring-twist | two-holes")->required();
  rep->add_option("--config", rep_config);
  rep->add_option("--out", rep_out);
  rep->add_flag("--paper-scale", rep_paper);
  rep->add_option("--jobs", rep_jobs);

  CLI11_PARSE(app, argc, argv);

  try {
    if (reg->parsed()) return cmd_register(reg_config, reg_out);
    if (cpd->parsed())
      return cmd_cpd(cpd_ref, cpd_target, cpd_beta, cpd_lambda, cpd_w, cpd_out, cpd_reduced);
    if (pod->parsed()) return cmd_pod(pod_dir, pod_space, pod_tol, pod_out);
    if (ana->parsed())
      return cmd_analyze(ana_corner, ana_alphas, ana_tube_ref, ana_tube_delta, ana_tube_n,
                         ana_ha, ana_hb, ana_out);
    if (rep->parsed()) return cmd_reproduce(rep_exp, rep_config, rep_out, rep_paper, rep_jobs);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
