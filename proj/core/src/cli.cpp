#include "invsrc/cli.hpp"

#include "invsrc/experiments.hpp"
#include "invsrc/io.hpp"
#include "invsrc/quadrature.hpp"
#include "invsrc/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

namespace invsrc {

namespace {

using json = nlohmann::ordered_json;

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// --theta accepts the literal "scheduled" (per-level h*sqrt(rho)) or a number.
double parse_theta(const std::string& s) {
  if (s == "scheduled") return -1.0;
  size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size() || v < 0.0)
    throw CLI::ValidationError("--theta", "expected 'scheduled' or a nonnegative number");
  return v;
}

json record_json(const RunRecord& r) {
  json e;
  e["level"] = r.level;
  e["h"] = r.h;
  e["rho"] = r.rho;
  e["theta"] = r.theta;
  e["delta"] = r.delta;
  e["iterations"] = r.iterations;
  e["converged"] = r.converged;
  e["tolerance"] = r.tolerance;
  e["errors"] = {{"l2_f", r.err_l2_f},
                 {"l2_N", r.err_l2_N},
                 {"l2_D", r.err_l2_D},
                 {"h1_N", r.err_h1_N},
                 {"h1_D", r.err_h1_D}};
  return e;
}

void write_summary(const std::string& path, json summary) {
  summary["generated_at"] = timestamp_utc();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << summary.dump(2) << '\n';
}

void write_reconstruction_vtk(const std::string& path, const RunRecord& r) {
  const TriMesh& mesh = *r.f.mesh;
  const DiffusionField Q = example_diffusion(r.f.mesh);
  write_vtk(path, mesh,
            {{"reconstruction", r.f.values},
             {"truth", r.f_true.values},
             {"error", Eigen::VectorXd(r.f.values - r.f_true.values)}},
            {{"q11", Q.q11}, {"q12", Q.q12}, {"q22", Q.q22}});
}

struct OutputSet {
  bool csv = false, json_out = false, vtk = false;
};

OutputSet parse_formats(const std::vector<std::string>& formats) {
  OutputSet set;
  for (const auto& f : formats) {
    if (f == "csv") set.csv = true;
    else if (f == "json") set.json_out = true;
    else if (f == "vtk") set.vtk = true;
  }
  return set;
}

// ---------------------------------------------------------------------------
// run --example 1: mesh-refinement sweep

int cmd_run_sweep(const SweepConfig& cfg, const OutputSet& out, const std::string& out_dir,
                  json config_echo) {
  const std::vector<RunRecord> records = run_sweep(cfg);

  std::printf("%4s  %-12s %-12s %-12s %8s  %-12s\n", "l", "h_l", "rho_l", "delta_l", "Iterate",
              "Tolerance");
  for (const auto& r : records)
    std::printf("%4d  %-12.4e %-12.4e %-12.4e %8d  %-12.4e\n", r.level, r.h, r.rho, r.delta,
                r.iterations, r.tolerance);
  std::printf("\n%4s  %-12s %-12s %-12s %-12s %-12s\n", "l", "L2_f", "L2_N", "L2_D", "H1_N",
              "H1_D");
  for (const auto& r : records)
    std::printf("%4d  %-12.4e %-12.4e %-12.4e %-12.4e %-12.4e\n", r.level, r.err_l2_f, r.err_l2_N,
                r.err_l2_D, r.err_h1_N, r.err_h1_D);

  json eoc_json;
  std::vector<std::vector<std::string>> eoc_rows;
  if (records.size() >= 2) {
    std::vector<double> hs;
    for (const auto& r : records) hs.push_back(r.h);
    auto column = [&](auto member) {
      std::vector<double> v;
      for (const auto& r : records) v.push_back(r.*member);
      return eoc(v, hs);
    };
    const auto e_l2f = column(&RunRecord::err_l2_f), e_l2N = column(&RunRecord::err_l2_N),
               e_l2D = column(&RunRecord::err_l2_D), e_h1N = column(&RunRecord::err_h1_N),
               e_h1D = column(&RunRecord::err_h1_D);

    std::printf("\n%9s  %-9s %-9s %-9s %-9s %-9s\n", "l", "L2_f", "L2_N", "L2_D", "H1_N", "H1_D");
    for (size_t i = 0; i < e_l2f.size(); ++i) {
      const std::string lvl =
          std::to_string(records[i].level) + "->" + std::to_string(records[i + 1].level);
      std::printf("%9s  %-9.4f %-9.4f %-9.4f %-9.4f %-9.4f\n", lvl.c_str(), e_l2f[i], e_l2N[i],
                  e_l2D[i], e_h1N[i], e_h1D[i]);
      eoc_rows.push_back({lvl, format_full(e_l2f[i]), format_full(e_l2N[i]),
                          format_full(e_l2D[i]), format_full(e_h1N[i]), format_full(e_h1D[i])});
    }
    std::printf("%9s  %-9.4f %-9.4f %-9.4f %-9.4f %-9.4f\n", "mean", mean_eoc(e_l2f),
                mean_eoc(e_l2N), mean_eoc(e_l2D), mean_eoc(e_h1N), mean_eoc(e_h1D));
    eoc_rows.push_back({"mean", format_full(mean_eoc(e_l2f)), format_full(mean_eoc(e_l2N)),
                        format_full(mean_eoc(e_l2D)), format_full(mean_eoc(e_h1N)),
                        format_full(mean_eoc(e_h1D))});
    eoc_json = {{"l2_f", e_l2f}, {"l2_N", e_l2N}, {"l2_D", e_l2D},
                {"h1_N", e_h1N}, {"h1_D", e_h1D},
                {"mean",
                 {{"l2_f", mean_eoc(e_l2f)},
                  {"l2_N", mean_eoc(e_l2N)},
                  {"l2_D", mean_eoc(e_l2D)},
                  {"h1_N", mean_eoc(e_h1N)},
                  {"h1_D", mean_eoc(e_h1D)}}}};
  }

  if (out.csv) {
    std::vector<std::vector<std::string>> t1, t2;
    for (const auto& r : records) {
      t1.push_back({std::to_string(r.level), format_full(r.h), format_full(r.rho),
                    format_full(r.delta), std::to_string(r.iterations),
                    format_full(r.tolerance)});
      t2.push_back({std::to_string(r.level), format_full(r.err_l2_f), format_full(r.err_l2_N),
                    format_full(r.err_l2_D), format_full(r.err_h1_N), format_full(r.err_h1_D)});
    }
    write_csv(out_dir + "/table1.csv", {"l", "h_l", "rho_l", "delta_l", "iterate", "tolerance"},
              t1);
    write_csv(out_dir + "/table2.csv", {"l", "l2_f", "l2_N", "l2_D", "h1_N", "h1_D"}, t2);
    if (!eoc_rows.empty())
      write_csv(out_dir + "/table3.csv", {"l", "eoc_l2_f", "eoc_l2_N", "eoc_l2_D", "eoc_h1_N",
                                          "eoc_h1_D"},
                eoc_rows);
    for (const auto& r : records)
      write_history_csv(out_dir + "/history_l" + std::to_string(r.level) + ".csv", r.history);
  }
  if (out.vtk)
    for (const auto& r : records)
      write_reconstruction_vtk(out_dir + "/reconstruction_l" + std::to_string(r.level) + ".vtk",
                               r);
  if (out.json_out) {
    json summary;
    summary["command"] = "run";
    summary["config"] = std::move(config_echo);
    summary["records"] = json::array();
    for (const auto& r : records) summary["records"].push_back(record_json(r));
    if (!eoc_json.is_null()) summary["eoc"] = eoc_json;
    write_summary(out_dir + "/summary.json", std::move(summary));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// run --example 2: multi-measurement study

int cmd_run_multi(const MultiConfig& base, const std::vector<int>& sizes, const OutputSet& out,
                  const std::string& out_dir, json config_echo) {
  std::vector<RunRecord> records;
  std::printf("%4s  %-12s %8s  %-12s %-12s %-12s %-12s %-12s\n", "I", "delta_bar", "Iterate",
              "L2_f", "L2_N", "L2_D", "H1_N", "H1_D");
  for (int I : sizes) {
    MultiConfig cfg = base;
    cfg.I = I;
    records.push_back(run_multi(cfg));
    const RunRecord& r = records.back();
    std::printf("%4d  %-12.4e %8d  %-12.4e %-12.4e %-12.4e %-12.4e %-12.4e\n", I, r.delta,
                r.iterations, r.err_l2_f, r.err_l2_N, r.err_l2_D, r.err_h1_N, r.err_h1_D);
  }

  if (out.csv) {
    std::vector<std::vector<std::string>> t4;
    for (size_t i = 0; i < records.size(); ++i) {
      const RunRecord& r = records[i];
      t4.push_back({std::to_string(sizes[i]), format_full(r.delta), std::to_string(r.iterations),
                    format_full(r.tolerance), format_full(r.err_l2_f), format_full(r.err_l2_N),
                    format_full(r.err_l2_D), format_full(r.err_h1_N), format_full(r.err_h1_D)});
    }
    write_csv(out_dir + "/table4.csv",
              {"I", "delta_bar", "iterate", "tolerance", "l2_f", "l2_N", "l2_D", "h1_N", "h1_D"},
              t4);
    for (size_t i = 0; i < records.size(); ++i)
      if (!records[i].history.empty())
        write_history_csv(out_dir + "/history_I" + std::to_string(sizes[i]) + ".csv",
                          records[i].history);
  }
  if (out.vtk)
    for (size_t i = 0; i < records.size(); ++i)
      write_reconstruction_vtk(out_dir + "/reconstruction_I" + std::to_string(sizes[i]) + ".vtk",
                               records[i]);
  if (out.json_out) {
    json summary;
    summary["command"] = "run";
    summary["config"] = std::move(config_echo);
    summary["records"] = json::array();
    for (size_t i = 0; i < records.size(); ++i) {
      json e = record_json(records[i]);
      e["I"] = sizes[i];
      summary["records"].push_back(std::move(e));
    }
    write_summary(out_dir + "/summary.json", std::move(summary));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// selftest

int cmd_selftest(std::uint64_t seed, bool corrupt_q) {
  int failures = 0;
  auto report = [&failures](const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] %-28s %s\n", ok ? "ok" : "FAIL", name, detail.c_str());
    if (!ok) ++failures;
  };
  char buf[160];

  // ellipticity of the benchmark diffusion tensor (the hook swaps in a field
  // with an indefinite matrix to prove the check can fail)
  {
    const MeshPtr mesh = build_uniform_mesh(8);
    DiffusionField Q = corrupt_q
                           ? make_diffusion(mesh, [](double, double) {
                               return std::array<double, 3>{1.0, 2.0, 1.0};  // eigenvalues -1, 3
                             })
                           : example_diffusion(mesh);
    std::snprintf(buf, sizeof buf, "smallest eigenvalue %.3g", Q.q_lower);
    report("ellipticity", Q.q_lower > 0.0, buf);
    if (Q.q_lower <= 0.0) return 1;  // everything below assumes an elliptic tensor
  }

  const MeshPtr mesh8 = build_uniform_mesh(8);
  const auto ctx8 = std::make_shared<const ForwardContext>(
      make_context(mesh8, example_diffusion(mesh8)));
  const MeshPtr mesh8i = build_uniform_mesh(8);
  const auto ctx8i = std::make_shared<const ForwardContext>(
      make_context(mesh8i, identity_diffusion(mesh8i)));

  {  // Neumann patch test: u = x reproduced exactly (Q = I, f = 0, j = n.e1)
    const BoundaryField j = boundary_edge_field(mesh8i, [](double x, double y) {
      if (y <= -1.0 || y >= 1.0) return 0.0;
      return x >= 1.0 ? 1.0 : -1.0;
    });
    const NodalField u = neumann_map(*ctx8i, zero_field(mesh8i), j);
    const NodalField exact = nodal_field(mesh8i, [](double x, double) { return x; });
    const double err = (u.values - exact.values).cwiseAbs().maxCoeff();
    std::snprintf(buf, sizeof buf, "max nodal error %.3g", err);
    report("neumann patch test", err <= 1e-9, buf);
  }
  {  // Dirichlet patch test: u = x + y (Q = I, f = 0, g = trace)
    const NodalField exact = nodal_field(mesh8i, [](double x, double y) { return x + y; });
    const NodalField u = dirichlet_map(*ctx8i, zero_field(mesh8i), trace(exact));
    const double err = (u.values - exact.values).cwiseAbs().maxCoeff();
    std::snprintf(buf, sizeof buf, "max nodal error %.3g", err);
    report("dirichlet patch test", err <= 1e-9, buf);
  }
  {  // T self-adjoint and monotone in the mass-weighted inner product
    UniformPm1 rng(mix_seed(seed, 1));
    double worst_sym = 0.0, worst_mono = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 5; ++trial) {
      NodalField f = zero_field(mesh8), w = zero_field(mesh8);
      for (int i = 0; i < mesh8->n_nodes(); ++i) {
        f.values[i] = rng.next();
        w.values[i] = rng.next();
      }
      const NodalField Tf = t_op(*ctx8, f), Tw = t_op(*ctx8, w);
      const double sym = std::abs(l2_inner(*ctx8, Tf, w) - l2_inner(*ctx8, f, Tw)) /
                         (l2(*ctx8, f) * l2(*ctx8, w));
      const double mono = std::min(l2_inner(*ctx8, Tf, f), l2_inner(*ctx8, Tw, w));
      worst_sym = std::max(worst_sym, sym);
      worst_mono = std::min(worst_mono, mono);
    }
    std::snprintf(buf, sizeof buf, "max asymmetry %.3g", worst_sym);
    report("operator self-adjoint", worst_sym <= 1e-9, buf);
    std::snprintf(buf, sizeof buf, "min (T f, f) %.3g", worst_mono);
    report("operator monotone", worst_mono >= -1e-10, buf);
  }

  // shared noisy problem for the gradient and minimizer checks
  const LevelTruth truth8 = make_same_mesh_truth(*ctx8);
  const Schedule sch8 = parameter_schedule(8);
  const NoisyMeasurement noisy8 = add_noise(truth8, sch8.theta, mix_seed(seed, 2));
  const RegularizedProblem prob8 = make_problem(ctx8, {noisy8.meas}, sch8.rho);

  {  // finite-difference check of the L2 gradient
    const MeshPtr mesh4 = build_uniform_mesh(4);
    const auto ctx4 = std::make_shared<const ForwardContext>(
        make_context(mesh4, example_diffusion(mesh4)));
    const Schedule sch4 = parameter_schedule(4);
    const NoisyMeasurement noisy4 =
        add_noise(make_same_mesh_truth(*ctx4), sch4.theta, mix_seed(seed, 3));
    const RegularizedProblem prob4 = make_problem(ctx4, {noisy4.meas}, sch4.rho);

    UniformPm1 rng(mix_seed(seed, 4));
    NodalField f = nodal_field(mesh4, initial_guess);
    const NodalField grad = gradient(prob4, f);
    double worst = 0.0;
    const double eps = 1e-4;
    for (int trial = 0; trial < 3; ++trial) {
      NodalField xi = zero_field(mesh4);
      for (int i = 0; i < mesh4->n_nodes(); ++i) xi.values[i] = rng.next();
      NodalField fp = f, fm = f;
      fp.values += eps * xi.values;
      fm.values -= eps * xi.values;
      const double fd = (cost(prob4, fp) - cost(prob4, fm)) / (2.0 * eps);
      const double dir = l2_inner(*ctx4, grad, xi);
      worst = std::max(worst, std::abs(fd - dir) / std::max(1e-30, std::abs(dir)));
    }
    std::snprintf(buf, sizeof buf, "max relative deviation %.3g", worst);
    report("gradient finite differences", worst <= 1e-5, buf);
  }
  {  // the iterative minimizer and the regularized operator equation agree
    const NodalField direct = lavrentiev_solve(prob8);
    const CgResult cg =
        cg_minimize(prob8, nodal_field(mesh8, initial_guess), {1e-12, 0.0, 2000, false});
    const double gap = l2(*ctx8, {mesh8, cg.f.values - direct.values});
    std::snprintf(buf, sizeof buf, "L2 gap %.3g after %d iterations", gap, cg.iterations);
    report("minimizer agreement", gap <= 1e-6, buf);
  }
  {  // manufactured solution u = -(x^2+y^2)/2, f = 2, Q = I: Dirichlet orders
    auto exact = [](double x, double y) { return -0.5 * (x * x + y * y); };
    auto grad_exact = [](double x, double y) { return std::array<double, 2>{-x, -y}; };
    std::vector<double> hs, el2, eh1;
    for (int l : {4, 8, 16, 32}) {
      const MeshPtr mesh = build_uniform_mesh(l);
      const DirichletSystem dir(mesh, assemble_stiffness(mesh, identity_diffusion(mesh)));
      const SparseSymMatrix M = assemble_mass(mesh);
      const Eigen::VectorXd f2 = Eigen::VectorXd::Constant(mesh->n_nodes(), 2.0);
      const NodalField u{mesh, dir.solve(M.apply(f2), boundary_node_field(mesh, exact))};
      hs.push_back(mesh->h());
      el2.push_back(l2_error_vs(u, exact));
      eh1.push_back(h1_semi_error_vs(u, grad_exact));
    }
    const double r2 = mean_eoc(eoc(el2, hs)), r1 = mean_eoc(eoc(eh1, hs));
    std::snprintf(buf, sizeof buf, "L2 order %.3f, H1 order %.3f", r2, r1);
    report("manufactured solution", r2 >= 1.8 && r2 <= 2.2 && r1 >= 0.9 && r1 <= 1.1, buf);
  }

  std::printf("%s (%d failure%s)\n", failures == 0 ? "selftest passed" : "selftest FAILED",
              failures, failures == 1 ? "" : "s");
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// export-mesh

int cmd_export_mesh(int level, const std::string& path) {
  const MeshPtr mesh = build_uniform_mesh(level);
  const DiffusionField Q = example_diffusion(mesh);
  write_vtk(path, *mesh,
            {{"truth", nodal_field(mesh, source_truth).values},
             {"initial_guess", nodal_field(mesh, initial_guess).values}},
            {{"q11", Q.q11}, {"q12", Q.q12}, {"q22", Q.q22}});
  std::printf("wrote %s (level %d: %d vertices, %d triangles)\n", path.c_str(), level,
              mesh->n_nodes(), mesh->n_tris());
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Variational source reconstruction from boundary Cauchy data"};
  app.require_subcommand(1);
  app.set_config("--config");

  // --- run ---
  auto* run = app.add_subcommand("run", "Run a reconstruction experiment");
  int example = 1;
  std::vector<int> levels{4, 8, 16, 32, 64};
  std::vector<int> sizes{1, 6, 16};
  int level2 = 64, fine_level = 128, max_iter = 600;
  std::uint64_t seed = 1;
  std::string theta_str = "scheduled";
  double rho_coeff = 0.01;
  std::string out_dir = "results";
  std::vector<std::string> formats{"csv", "json"};
  run->add_option("--example", example, "Experiment: 1 = refinement sweep, 2 = multi-measurement")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  run->add_option("--levels", levels, "Sweep levels (example 1)")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--level", level2, "Reconstruction level (example 2)")->capture_default_str();
  run->add_option("--I", sizes, "Measurement-family sizes (example 2)")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--fine-level", fine_level, "Data-generation level")->capture_default_str();
  run->add_option("--seed", seed, "Noise seed")->capture_default_str();
  run->add_option("--theta", theta_str, "Noise amplitude: 'scheduled' or a number")
      ->capture_default_str();
  run->add_option("--rho-coeff", rho_coeff, "Regularization weight as a multiple of h")
      ->capture_default_str();
  run->add_option("--max-iter", max_iter, "Iteration cap")->capture_default_str();
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--format", formats, "Outputs to write: csv, json, vtk")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "json", "vtk"}))
      ->capture_default_str();

  // --- selftest ---
  auto* selftest = app.add_subcommand("selftest", "Run built-in correctness checks");
  std::uint64_t st_seed = 7;
  bool corrupt_q = false;
  selftest->add_option("--seed", st_seed, "Seed for randomized checks")->capture_default_str();
  selftest->add_flag("--corrupt-q", corrupt_q)->group("");  // test hook, hidden

  // --- export-mesh ---
  auto* exp = app.add_subcommand("export-mesh", "Write a mesh with the benchmark fields as VTK");
  int exp_level = 16;
  std::string exp_out = "mesh.vtk";
  exp->add_option("--level", exp_level, "Mesh level")->capture_default_str();
  exp->add_option("--out", exp_out, "Output file")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);  // CLI11 consumes back-to-front
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed()) {
      const double theta = parse_theta(theta_str);
      std::filesystem::create_directories(out_dir);
      const OutputSet out = parse_formats(formats);

      json echo;
      echo["example"] = example;
      echo["fine_level"] = fine_level;
      echo["seed"] = seed;
      echo["theta"] = theta < 0.0 ? json("scheduled") : json(theta);
      echo["rho_coeff"] = rho_coeff;
      echo["max_iter"] = max_iter;
      echo["out"] = out_dir;
      echo["format"] = formats;

      if (example == 1) {
        SweepConfig cfg;
        cfg.levels = levels;
        cfg.fine_level = fine_level;
        cfg.seed = seed;
        cfg.rho_coeff = rho_coeff;
        cfg.theta = theta;
        cfg.max_iter = max_iter;
        echo["levels"] = levels;
        return cmd_run_sweep(cfg, out, out_dir, std::move(echo));
      }
      MultiConfig cfg;
      cfg.level = level2;
      cfg.fine_level = fine_level;
      cfg.theta = theta < 0.0 ? 0.1 : theta;  // the multi study uses a fixed amplitude
      cfg.seed = seed;
      cfg.rho_coeff = rho_coeff;
      cfg.max_iter = max_iter;
      echo["level"] = level2;
      echo["I"] = sizes;
      echo["theta"] = cfg.theta;
      return cmd_run_multi(cfg, sizes, out, out_dir, std::move(echo));
    }
    if (selftest->parsed()) return cmd_selftest(st_seed, corrupt_q);
    if (exp->parsed()) return cmd_export_mesh(exp_level, exp_out);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::cerr << err.dump() << '\n';
    return 2;
  }
  return 0;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? argc - 1 : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace invsrc
