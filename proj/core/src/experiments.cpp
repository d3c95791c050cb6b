#include "invsrc/experiments.hpp"

#include "invsrc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace invsrc {

double flux_value(const FluxFamily& f, double x, double y) {
  // Bottom and top first so the four corners resolve through them, matching
  // the half-open indicator pattern of the definition.
  if (y <= -1.0) return x > 0.0 ? f.A : -f.B;  // bottom: A on (0,1], -B on [-1,0]
  if (y >= 1.0) return x > 0.0 ? f.B : -f.A;   // top:    B on (0,1], -A on [-1,0]
  if (x <= -1.0) return y <= 0.0 ? f.C : -f.D; // left:   C on (-1,0], -D on (0,1)
  if (x >= 1.0) return y <= 0.0 ? f.D : -f.C;  // right:  D on (-1,0], -C on (0,1)
  throw std::invalid_argument("flux_value: point is not on the boundary");
}

double source_truth(double x, double y) {
  const double ex = x + 0.5, ey = y - 0.5;
  if (9.0 * ex * ex + 16.0 * ey * ey <= 1.0) return 2.0;
  const double dx = x - 0.5, dy = y + 0.5;
  if (dx * dx + dy * dy <= 1.0 / 16.0) return -1.0;
  // background level balancing the integral of the source to zero:
  // 2*(pi/12) - (pi/16) + c*(4 - 7*pi/48) = 0
  return 5.0 * std::numbers::pi / (7.0 * std::numbers::pi - 192.0);
}

double initial_guess(double x, double /*y*/) { return x > 0.0 ? 1.0 : -1.0; }

std::array<double, 3> diffusion_coefficients(double x, double y) {
  const double q11 = (std::abs(x) <= 0.5 && std::abs(y) <= 0.5) ? 3.0 : 1.0;
  const double q12 = (std::abs(x) + std::abs(y) <= 0.5) ? 1.0 : 0.0;
  const double q22 = (x * x + y * y <= 0.25) ? 4.0 : 2.0;
  return {q11, q12, q22};
}

DiffusionField example_diffusion(const MeshPtr& mesh) {
  return make_diffusion(mesh, diffusion_coefficients);
}

BoundaryField flux_per_edge(const MeshPtr& mesh, const FluxFamily& fam) {
  return boundary_edge_field(mesh, [&fam](double x, double y) { return flux_value(fam, x, y); });
}

BoundaryField flux_per_node(const MeshPtr& mesh, const FluxFamily& fam) {
  return boundary_node_field(mesh, [&fam](double x, double y) { return flux_value(fam, x, y); });
}

// ---------------------------------------------------------------------------

namespace {

LevelTruth level_truth_fields(const MeshPtr& mesh, const FluxFamily& flux) {
  LevelTruth t;
  t.mesh = mesh;
  t.f_true = nodal_field(mesh, source_truth);
  t.j_edge = flux_per_edge(mesh, flux);
  return t;
}

}  // namespace

TruthData make_truth_data(const std::vector<MeshPtr>& level_meshes, int fine_level,
                          const FluxFamily& flux, SolveMode mode) {
  if (level_meshes.empty())
    throw std::invalid_argument("make_truth_data: no reconstruction meshes given");
  for (const auto& m : level_meshes)
    if (fine_level < m->level || fine_level % m->level != 0)
      throw std::invalid_argument("make_truth_data: level " + std::to_string(m->level) +
                                  " does not divide the fine level " + std::to_string(fine_level));

  TruthData data;
  data.fine_mesh = build_uniform_mesh(fine_level);
  const MeshPtr& fine = data.fine_mesh;
  const SparseSymMatrix K = assemble_stiffness(fine, example_diffusion(fine));
  const SparseSymMatrix M = assemble_mass(fine);
  const NeumannSystem neumann(fine, K, mode);

  const NodalField f_fine = nodal_field(fine, source_truth);
  const BoundaryField j_fine = flux_per_edge(fine, flux);
  data.fine_potential = {fine, neumann.solve(M.apply(f_fine.values) + neumann_load(fine, j_fine))};
  data.fine_trace = trace(data.fine_potential);
  recenter_boundary(data.fine_trace);  // zero up to solver tolerance already

  data.levels.reserve(level_meshes.size());
  for (const auto& mesh : level_meshes) {
    LevelTruth t = level_truth_fields(mesh, flux);
    t.g_trace = restrict_boundary(data.fine_trace, mesh);
    data.levels.push_back(std::move(t));
  }
  return data;
}

LevelTruth make_same_mesh_truth(const ForwardContext& ctx, const FluxFamily& flux) {
  LevelTruth t = level_truth_fields(ctx.mesh, flux);
  NodalField u = neumann_map(ctx, t.f_true, t.j_edge);
  t.g_trace = trace(u);
  recenter_boundary(t.g_trace);
  return t;
}

NoisyMeasurement add_noise(const LevelTruth& truth, double theta, std::uint64_t seed) {
  if (theta < 0.0) throw std::invalid_argument("add_noise: theta must be nonnegative");
  NoisyMeasurement out;
  if (theta == 0.0) {
    out.meas = {truth.j_edge, {}, truth.g_trace};
    out.delta = 0.0;
    return out;
  }

  const int nb = truth.mesh->n_boundary();
  UniformPm1 rng(seed);
  BoundaryField jn = zero_boundary_field(truth.mesh, BoundaryKind::per_node);
  for (int k = 0; k < nb; ++k) jn.values[k] = theta * rng.next();
  BoundaryField gd = truth.g_trace;
  gd.zero_mean = false;
  for (int k = 0; k < nb; ++k) gd.values[k] += theta * rng.next();
  recenter_boundary(gd);

  BoundaryField dg = gd;
  dg.values -= truth.g_trace.values;
  out.delta = boundary_l2(jn) + boundary_l2(dg);
  out.meas = {truth.j_edge, std::move(jn), std::move(gd)};
  return out;
}

// ---------------------------------------------------------------------------

namespace {

NodalField diff(const NodalField& a, const NodalField& b) {
  return {a.mesh, a.values - b.values};
}

void fill_errors(RunRecord& rec, const ForwardContext& ctx, const LevelTruth& truth,
                 const Measurement& used) {
  const NodalField N_ex = neumann_map(ctx, truth.f_true, truth.j_edge);
  const NodalField D_ex = dirichlet_map(ctx, truth.f_true, truth.g_trace);
  const NodalField N_c = neumann_map(ctx, rec.f, used);
  const NodalField D_c = dirichlet_map(ctx, rec.f, used.g);
  rec.err_l2_f = l2(ctx, diff(rec.f, truth.f_true));
  rec.err_l2_N = l2(ctx, diff(N_c, N_ex));
  rec.err_l2_D = l2(ctx, diff(D_c, D_ex));
  rec.err_h1_N = h1(ctx, diff(N_c, N_ex));
  rec.err_h1_D = h1(ctx, diff(D_c, D_ex));
}

void fill_cg(RunRecord& rec, CgResult&& cg) {
  rec.iterations = cg.iterations;
  rec.converged = cg.converged;
  rec.tolerance = cg.tolerance;
  rec.grad_norm0 = cg.grad_norm0;
  rec.grad_norm = cg.grad_norm;
  rec.history = std::move(cg.history);
  rec.f = std::move(cg.f);
}

}  // namespace

std::vector<RunRecord> run_sweep(const SweepConfig& cfg) {
  if (cfg.levels.empty()) throw std::invalid_argument("run_sweep: no levels given");
  for (size_t i = 0; i + 1 < cfg.levels.size(); ++i)
    if (cfg.levels[i + 1] <= cfg.levels[i] || cfg.levels[i + 1] % cfg.levels[i] != 0)
      throw std::invalid_argument(
          "run_sweep: level " + std::to_string(cfg.levels[i + 1]) + " is not a refinement of " +
          std::to_string(cfg.levels[i]) + " (warm starts need nested levels)");
  for (int l : cfg.levels)
    if (l >= cfg.fine_level)
      throw std::invalid_argument("run_sweep: level " + std::to_string(l) +
                                  " must be strictly below the fine level " +
                                  std::to_string(cfg.fine_level));

  std::vector<MeshPtr> meshes;
  meshes.reserve(cfg.levels.size());
  for (int l : cfg.levels) meshes.push_back(build_uniform_mesh(l));

  const TruthData truth = make_truth_data(meshes, cfg.fine_level, cfg.flux, cfg.mode);

  std::vector<RunRecord> records;
  records.reserve(cfg.levels.size());
  NodalField warm;  // previous reconstruction, prolonged as next initial guess

  for (size_t i = 0; i < meshes.size(); ++i) {
    const MeshPtr& mesh = meshes[i];
    const Schedule sch = parameter_schedule(mesh->level, cfg.rho_coeff);
    const double theta = cfg.theta < 0.0 ? sch.theta : cfg.theta;

    auto ctx = std::make_shared<const ForwardContext>(
        make_context(mesh, example_diffusion(mesh), cfg.mode));
    const LevelTruth& lt = truth.levels[i];
    NoisyMeasurement noisy = add_noise(lt, theta, mix_seed(cfg.seed, mesh->level));

    RunRecord rec;
    rec.level = mesh->level;
    rec.h = sch.h;
    rec.rho = sch.rho;
    rec.theta = theta;
    rec.delta = noisy.delta;
    rec.f_true = lt.f_true;

    RegularizedProblem prob = make_problem(ctx, {noisy.meas}, sch.rho);
    const NodalField f0 =
        (i == 0) ? nodal_field(mesh, initial_guess) : prolong_nodal(warm, mesh);
    CgOptions opt{sch.tau1, sch.tau2, cfg.max_iter, cfg.record_history};
    fill_cg(rec, cg_minimize(prob, f0, opt));
    fill_errors(rec, *ctx, lt, noisy.meas);

    warm = rec.f;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<FluxFamily> measurement_family(int I) {
  std::vector<FluxFamily> fams;
  if (I == 1) {
    fams.push_back({1, 2, 3, 4});
  } else if (I == 6) {
    std::array<double, 3> abc{1, 2, 3};
    do {
      fams.push_back({abc[0], abc[1], abc[2], 4});
    } while (std::next_permutation(abc.begin(), abc.end()));
  } else if (I == 16) {
    std::array<double, 4> abcd{1, 2, 3, 4};
    do {
      fams.push_back({abcd[0], abcd[1], abcd[2], abcd[3]});
    } while (static_cast<int>(fams.size()) < 16 &&
             std::next_permutation(abcd.begin(), abcd.end()));
  } else {
    throw std::invalid_argument("measurement_family: supported sizes are 1, 6 and 16, got " +
                                std::to_string(I));
  }
  return fams;
}

RunRecord run_multi(const MultiConfig& cfg) {
  if (cfg.level < 1) throw std::invalid_argument("run_multi: level must be >= 1");
  if (cfg.level >= cfg.fine_level || cfg.fine_level % cfg.level != 0)
    throw std::invalid_argument("run_multi: level " + std::to_string(cfg.level) +
                                " must strictly divide the fine level " +
                                std::to_string(cfg.fine_level));
  const std::vector<FluxFamily> fams = measurement_family(cfg.I);

  // One fine factorization serves every family member.
  const MeshPtr fine = build_uniform_mesh(cfg.fine_level);
  const SparseSymMatrix K_fine = assemble_stiffness(fine, example_diffusion(fine));
  const SparseSymMatrix M_fine = assemble_mass(fine);
  const NeumannSystem neumann_fine(fine, K_fine, cfg.mode);
  const NodalField f_fine = nodal_field(fine, source_truth);
  const Eigen::VectorXd source_load = M_fine.apply(f_fine.values);

  const MeshPtr mesh = build_uniform_mesh(cfg.level);
  auto ctx = std::make_shared<const ForwardContext>(
      make_context(mesh, example_diffusion(mesh), cfg.mode));

  std::vector<LevelTruth> truths;
  std::vector<Measurement> meas;
  double delta_sum = 0.0;
  for (size_t i = 0; i < fams.size(); ++i) {
    NodalField u{fine, neumann_fine.solve(source_load + neumann_load(fine, flux_per_edge(fine, fams[i])))};
    BoundaryField g_fine = trace(u);
    recenter_boundary(g_fine);

    LevelTruth t = level_truth_fields(mesh, fams[i]);
    t.g_trace = restrict_boundary(g_fine, mesh);
    NoisyMeasurement noisy = add_noise(t, cfg.theta, mix_seed(cfg.seed, cfg.level, i));
    delta_sum += noisy.delta;
    truths.push_back(std::move(t));
    meas.push_back(std::move(noisy.meas));
  }

  const Schedule sch = parameter_schedule(cfg.level, cfg.rho_coeff);
  RunRecord rec;
  rec.level = cfg.level;
  rec.h = sch.h;
  rec.rho = sch.rho;
  rec.theta = cfg.theta;
  rec.delta = delta_sum / static_cast<double>(fams.size());
  rec.f_true = truths.front().f_true;

  const Measurement first = meas.front();
  RegularizedProblem prob = make_problem(ctx, std::move(meas), sch.rho);
  CgOptions opt{sch.tau1, sch.tau2, cfg.max_iter, cfg.record_history};
  fill_cg(rec, cg_minimize(prob, nodal_field(mesh, initial_guess), opt));
  fill_errors(rec, *ctx, truths.front(), first);
  return rec;
}

std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size())
    throw std::invalid_argument("eoc: errors and mesh sizes differ in length");
  if (errors.size() < 2) throw std::invalid_argument("eoc: need at least two levels");
  for (double e : errors)
    if (!(e > 0.0)) throw std::invalid_argument("eoc: errors must be positive");
  for (double h : hs)
    if (!(h > 0.0)) throw std::invalid_argument("eoc: mesh sizes must be positive");

  std::vector<double> rates;
  rates.reserve(errors.size() - 1);
  for (size_t i = 1; i < errors.size(); ++i) {
    const double dh = std::log(hs[i - 1]) - std::log(hs[i]);
    if (dh == 0.0) throw std::invalid_argument("eoc: repeated mesh size");
    rates.push_back((std::log(errors[i - 1]) - std::log(errors[i])) / dh);
  }
  return rates;
}

double mean_eoc(const std::vector<double>& rates) {
  if (rates.empty()) throw std::invalid_argument("mean_eoc: no rates");
  double s = 0.0;
  for (double r : rates) s += r;
  return s / static_cast<double>(rates.size());
}

}  // namespace invsrc
