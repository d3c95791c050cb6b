// Microbenchmarks for the hot paths: operator assembly, the factorized
// boundary-value solves, the data-gap operator, and one full regularized
// solve on a small grid.

#include <benchmark/benchmark.h>

#include <invsrc/experiments.hpp>
#include <invsrc/regularization.hpp>

using namespace invsrc;

namespace {

std::shared_ptr<const ForwardContext> ctx_of(int level) {
  const MeshPtr mesh = build_uniform_mesh(level);
  return std::make_shared<const ForwardContext>(make_context(mesh, example_diffusion(mesh)));
}

RegularizedProblem problem_of(const std::shared_ptr<const ForwardContext>& ctx) {
  const LevelTruth truth = make_same_mesh_truth(*ctx);
  const Schedule s = parameter_schedule(ctx->mesh->level);
  return make_problem(ctx, {add_noise(truth, s.theta, 1).meas}, s.rho);
}

}  // namespace

static void BM_AssembleStiffness(benchmark::State& state) {
  const MeshPtr mesh = build_uniform_mesh(static_cast<int>(state.range(0)));
  const DiffusionField Q = example_diffusion(mesh);
  for (auto _ : state) {
    SparseSymMatrix K = assemble_stiffness(mesh, Q);
    benchmark::DoNotOptimize(K);
  }
}
BENCHMARK(BM_AssembleStiffness)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_AssembleMass(benchmark::State& state) {
  const MeshPtr mesh = build_uniform_mesh(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    SparseSymMatrix M = assemble_mass(mesh);
    benchmark::DoNotOptimize(M);
  }
}
BENCHMARK(BM_AssembleMass)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_NeumannFactorize(benchmark::State& state) {
  const MeshPtr mesh = build_uniform_mesh(static_cast<int>(state.range(0)));
  const SparseSymMatrix K = assemble_stiffness(mesh, example_diffusion(mesh));
  for (auto _ : state) {
    NeumannSystem sys(mesh, K, SolveMode::automatic);
    benchmark::DoNotOptimize(sys);
  }
}
BENCHMARK(BM_NeumannFactorize)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_NeumannSolve(benchmark::State& state) {
  auto ctx = ctx_of(static_cast<int>(state.range(0)));
  const Eigen::VectorXd load =
      ctx->M.apply(nodal_field(ctx->mesh, source_truth).values);
  for (auto _ : state) {
    Eigen::VectorXd u = ctx->neumann->solve(load);
    benchmark::DoNotOptimize(u);
  }
}
BENCHMARK(BM_NeumannSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_DirichletSolve(benchmark::State& state) {
  auto ctx = ctx_of(static_cast<int>(state.range(0)));
  const Eigen::VectorXd load =
      ctx->M.apply(nodal_field(ctx->mesh, source_truth).values);
  for (auto _ : state) {
    Eigen::VectorXd u = ctx->dirichlet->solve_zero(load);
    benchmark::DoNotOptimize(u);
  }
}
BENCHMARK(BM_DirichletSolve)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_GapOperator(benchmark::State& state) {
  auto ctx = ctx_of(static_cast<int>(state.range(0)));
  const NodalField f = nodal_field(ctx->mesh, initial_guess);
  for (auto _ : state) {
    NodalField w = t_op(*ctx, f);
    benchmark::DoNotOptimize(w);
  }
}
BENCHMARK(BM_GapOperator)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_GradientEval(benchmark::State& state) {
  auto ctx = ctx_of(static_cast<int>(state.range(0)));
  const RegularizedProblem p = problem_of(ctx);
  const NodalField f = nodal_field(ctx->mesh, initial_guess);
  for (auto _ : state) {
    NodalField g = gradient(p, f);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_GradientEval)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_RegularizedSolve(benchmark::State& state) {
  auto ctx = ctx_of(static_cast<int>(state.range(0)));
  const RegularizedProblem p = problem_of(ctx);
  for (auto _ : state) {
    NodalField f = lavrentiev_solve(p);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_RegularizedSolve)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
