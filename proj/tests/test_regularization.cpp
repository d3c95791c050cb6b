// Tests for the regularized reconstruction problem: the parameter schedule,
// cost/gradient consistency, the two equivalent solvers, and the optimality
// identities the minimizer must satisfy.

#include <invsrc/experiments.hpp>
#include <invsrc/regularization.hpp>

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "helpers.hpp"

using namespace invsrc;

namespace {

// Benchmark problem on its own mesh: exact same-mesh data plus the scheduled
// noise level, matching the configurations the frozen constants were run at.
RegularizedProblem noisy_problem(const std::shared_ptr<const ForwardContext>& ctx, int level,
                                 unsigned long long seed, double rho_factor = 1.0) {
  const LevelTruth truth = make_same_mesh_truth(*ctx);
  const Schedule s = parameter_schedule(level);
  const NoisyMeasurement noisy = add_noise(truth, s.theta, seed);
  return make_problem(ctx, {noisy.meas}, rho_factor * s.rho);
}

double field_gap(const ForwardContext& ctx, const NodalField& a, const NodalField& b) {
  return l2(ctx, {ctx.mesh, a.values - b.values});
}

}  // namespace

TEST_CASE("parameter schedule follows the mesh size") {
  const Schedule s = parameter_schedule(4);
  CHECK(s.h == doctest::Approx(0.70710678118654757).epsilon(1e-12));
  CHECK(s.rho == doctest::Approx(0.0070710678118654757).epsilon(1e-12));
  CHECK(s.theta == doctest::Approx(0.059460355750136053).epsilon(1e-12));
  CHECK(s.tau1 == doctest::Approx(8.4089641525371465e-07).epsilon(1e-12));
  CHECK(s.tau2 == doctest::Approx(8.4089641525371454e-05).epsilon(1e-12));

  const Schedule s8 = parameter_schedule(8);
  CHECK(s8.h == doctest::Approx(std::sqrt(8.0) / 8.0).epsilon(1e-12));
  // Halving h scales rho by 1/2 and theta by 1/(2 sqrt 2).
  CHECK(s8.rho == doctest::Approx(0.5 * s.rho).epsilon(1e-12));
  CHECK(s8.theta == doctest::Approx(s.theta / (2.0 * std::sqrt(2.0))).epsilon(1e-12));

  CHECK_THROWS_AS((void)parameter_schedule(0), std::invalid_argument);
  CHECK_THROWS_AS((void)parameter_schedule(-4), std::invalid_argument);
  CHECK_THROWS_AS((void)parameter_schedule(4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)parameter_schedule(4, -0.01), std::invalid_argument);
}

TEST_CASE("analytic gradient matches central differences") {
  auto ctx = testutil::benchmark_context(4);
  const RegularizedProblem p = noisy_problem(ctx, 4, 2);
  UniformPm1 rng(31);

  const NodalField f = testutil::random_field(ctx->mesh, rng);
  const NodalField grad = gradient(p, f);
  const double eps = 1e-4;
  for (int trial = 0; trial < 5; ++trial) {
    const NodalField d = testutil::random_field(ctx->mesh, rng);
    NodalField fp{ctx->mesh, f.values + eps * d.values};
    NodalField fm{ctx->mesh, f.values - eps * d.values};
    const double fd = (cost(p, fp) - cost(p, fm)) / (2.0 * eps);
    const double an = l2_inner(*ctx, grad, d);
    CHECK(std::abs(fd - an) <= 1e-6 * (1.0 + std::abs(an)));
  }
}

TEST_CASE("cost is strictly convex along segments") {
  auto ctx = testutil::benchmark_context(4);
  const RegularizedProblem p = noisy_problem(ctx, 4, 2);
  UniformPm1 rng(32);

  for (int trial = 0; trial < 3; ++trial) {
    const NodalField a = testutil::random_field(ctx->mesh, rng);
    const NodalField b = testutil::random_field(ctx->mesh, rng);
    const NodalField mid{ctx->mesh, 0.5 * (a.values + b.values)};
    const NodalField d{ctx->mesh, a.values - b.values};
    const double avg = 0.5 * (cost(p, a) + cost(p, b));
    // Quadratic with Hessian >= 2 rho M: the midpoint dips below the chord
    // by at least (rho/4) * ||a-b||^2 in L2.
    const double dip = 0.25 * p.rho * l2(*ctx, d) * l2(*ctx, d);
    CHECK(cost(p, mid) <= avg - dip + 1e-10);
  }
}

TEST_CASE("conjugate gradients and the operator-equation solve agree") {
  auto ctx = testutil::benchmark_context(4);
  const RegularizedProblem p = noisy_problem(ctx, 4, 3);

  const NodalField direct = lavrentiev_solve(p);
  const CgResult cg =
      cg_minimize(p, nodal_field(ctx->mesh, initial_guess), {1e-12, 0.0, 2000, false});

  CHECK(cg.converged);
  CHECK(cg.iterations <= 100);  // measured: 18 iterations on this problem
  CHECK(field_gap(*ctx, cg.f, direct) <= 1e-8);  // measured: 2.8e-12
}

TEST_CASE("the minimizer satisfies the fixed-point identity") {
  auto ctx = testutil::benchmark_context(4);
  const RegularizedProblem p = noisy_problem(ctx, 4, 3);
  const Measurement& m = p.data.front();

  const NodalField f = lavrentiev_solve(p, 1e-12);
  // f - f_star = -(1/rho) (N_f j - D_f g) at the optimum.
  const Eigen::VectorXd gap =
      neumann_map(*ctx, f, m).values - dirichlet_map(*ctx, f, m.g).values;
  const NodalField residual{ctx->mesh, f.values - p.f_star.values + gap / p.rho};
  CHECK(l2(*ctx, residual) <= 1e-8 * (1.0 + l2(*ctx, f)));
}

TEST_CASE("raising rho pulls the reconstruction toward the prior") {
  auto ctx = testutil::benchmark_context(4);
  const LevelTruth truth = make_same_mesh_truth(*ctx);
  const Schedule s = parameter_schedule(4);
  const NoisyMeasurement noisy = add_noise(truth, s.theta, 11);

  const NodalField f1 = lavrentiev_solve(make_problem(ctx, {noisy.meas}, s.rho));
  const NodalField f2 = lavrentiev_solve(make_problem(ctx, {noisy.meas}, 2.0 * s.rho));
  // With f_star = 0 the solution norm is non-increasing in rho.
  CHECK(l2(*ctx, f2) < l2(*ctx, f1));
  CHECK(l2(*ctx, f1) == doctest::Approx(1.13066046601784).epsilon(1e-9));
  CHECK(l2(*ctx, f2) == doctest::Approx(0.870467629382058).epsilon(1e-9));
}

TEST_CASE("repeated measurements average to the single-measurement problem") {
  auto ctx = testutil::benchmark_context(4);
  const LevelTruth truth = make_same_mesh_truth(*ctx);
  const Schedule s = parameter_schedule(4);
  const Measurement m = add_noise(truth, s.theta, 7).meas;

  const RegularizedProblem single = make_problem(ctx, {m}, s.rho);
  const RegularizedProblem triple = make_problem(ctx, {m, m, m}, s.rho);

  UniformPm1 rng(33);
  const NodalField f = testutil::random_field(ctx->mesh, rng);
  CHECK(cost(single, f) == doctest::Approx(cost(triple, f)).epsilon(1e-12));
  CHECK(field_gap(*ctx, gradient(single, f), gradient(triple, f)) <= 1e-12);

  const NodalField f_single = lavrentiev_solve(single);
  const NodalField f_triple = lavrentiev_solve(triple);
  CHECK(field_gap(*ctx, f_single, f_triple) <= 1e-10);
}

TEST_CASE("a stationary start returns immediately") {
  auto ctx = testutil::benchmark_context(4);
  Measurement m;
  m.j = zero_boundary_field(ctx->mesh, BoundaryKind::per_edge);
  m.g = zero_boundary_field(ctx->mesh, BoundaryKind::per_node);
  const RegularizedProblem p = make_problem(ctx, {m}, 0.01);

  const CgOptions opt{1e-6, 1e-4, 600, true};
  const CgResult res = cg_minimize(p, zero_field(ctx->mesh), opt);
  CHECK(res.iterations == 0);
  CHECK(res.converged);
  CHECK(res.grad_norm0 == 0.0);
  CHECK(res.tolerance == doctest::Approx(-1e-6).epsilon(1e-12));
  REQUIRE(res.history.size() == 1);
  CHECK(res.history[0].k == 0);
  CHECK(res.history[0].cost == 0.0);
  CHECK(res.history[0].grad_norm == 0.0);
  CHECK(res.history[0].t == 0.0);
  CHECK(res.history[0].beta == 0.0);
}

TEST_CASE("iteration history mirrors the returned result") {
  auto ctx = testutil::benchmark_context(4);
  const RegularizedProblem p = noisy_problem(ctx, 4, 3);
  const NodalField f0 = nodal_field(ctx->mesh, initial_guess);

  const CgResult res = cg_minimize(p, f0, {1e-12, 0.0, 2000, true});
  REQUIRE(res.converged);
  REQUIRE(res.history.size() == static_cast<size_t>(res.iterations) + 1);
  for (size_t k = 0; k < res.history.size(); ++k) {
    CHECK(res.history[k].k == static_cast<int>(k));
    if (k > 0) {
      // Exact line searches on a convex quadratic never increase the cost.
      CHECK(res.history[k].cost <=
            res.history[k - 1].cost + 1e-12 * (1.0 + std::abs(res.history[0].cost)));
    }
  }
  CHECK(res.history.front().beta == 0.0);
  CHECK(res.history.back().t == 0.0);
  CHECK(res.history.back().beta == 0.0);
  CHECK(res.history.back().tolerance == res.tolerance);
  CHECK(res.history.back().grad_norm == res.grad_norm);

  const CgResult quiet = cg_minimize(p, f0, {1e-12, 0.0, 2000, false});
  CHECK(quiet.history.empty());
  CHECK(field_gap(*ctx, quiet.f, res.f) == 0.0);
}

TEST_CASE("problem construction and solvers validate their inputs") {
  auto ctx = testutil::benchmark_context(4);
  const MeshPtr& mesh = ctx->mesh;
  const MeshPtr other = build_uniform_mesh(4);
  const LevelTruth truth = make_same_mesh_truth(*ctx);
  const Measurement good{truth.j_edge, {}, truth.g_trace};

  CHECK_THROWS_AS((void)make_problem(ctx, {}, 0.01), std::invalid_argument);
  CHECK_THROWS_AS((void)make_problem(ctx, {good}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)make_problem(ctx, {good}, -0.5), std::invalid_argument);

  Measurement foreign_j = good;
  foreign_j.j = zero_boundary_field(other, BoundaryKind::per_edge);
  CHECK_THROWS_AS((void)make_problem(ctx, {foreign_j}, 0.01), std::invalid_argument);

  Measurement foreign_noise = good;
  foreign_noise.j_noise = zero_boundary_field(other, BoundaryKind::per_node);
  CHECK_THROWS_AS((void)make_problem(ctx, {foreign_noise}, 0.01), std::invalid_argument);

  Measurement edge_trace = good;
  edge_trace.g = zero_boundary_field(mesh, BoundaryKind::per_edge);
  CHECK_THROWS_AS((void)make_problem(ctx, {edge_trace}, 0.01), std::invalid_argument);

  CHECK_THROWS_AS((void)make_problem(ctx, {good}, 0.01, zero_field(other)),
                  std::invalid_argument);

  const RegularizedProblem p = make_problem(ctx, {good}, 0.01);
  CHECK_THROWS_AS((void)cg_minimize(p, zero_field(other), {}), std::invalid_argument);
  CHECK_THROWS_AS((void)cg_minimize(p, zero_field(mesh), {1e-6, 1e-4, 0, false}),
                  std::invalid_argument);

  // The two-argument constructor defaults the prior to zero.
  CHECK(p.f_star.mesh.get() == mesh.get());
  CHECK(p.f_star.values.lpNorm<Eigen::Infinity>() == 0.0);
}
