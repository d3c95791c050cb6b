#include <invsrc/solvers.hpp>
#include <invsrc/experiments.hpp>
#include <invsrc/rng.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

using namespace invsrc;

namespace {

// Affine field with zero boundary mean: the exact discrete solution of the
// mean-constrained pure-Neumann problem for its own stiffness load.
NodalField recentered_affine(const MeshPtr& m, double a, double b) {
  NodalField u = nodal_field(m, [=](double x, double y) { return a * x + b * y; });
  const Eigen::VectorXd w = boundary_weights(m);
  u.values.array() -= w.dot(u.values) / w.sum();
  return u;
}

}  // namespace

TEST_CASE("neumann system reproduces mean-zero affine fields") {
  for (int level : {2, 4, 8}) {
    const MeshPtr m = build_uniform_mesh(level);
    const NeumannSystem sys(m, identity_diffusion(m));
    const NodalField exact = recentered_affine(m, 0.7, -0.4);
    const Eigen::VectorXd u = sys.solve(sys.stiffness().apply(exact.values));
    CHECK((u - exact.values).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("neumann solve enforces the mean constraint and is symmetric") {
  const MeshPtr m = build_uniform_mesh(8);
  const NeumannSystem sys(m, example_diffusion(m));
  UniformPm1 rng(21);

  Eigen::VectorXd F1(m->n_nodes()), F2(m->n_nodes());
  for (int i = 0; i < m->n_nodes(); ++i) {
    F1[i] = rng.next();
    F2[i] = rng.next();
  }

  const Eigen::VectorXd u1 = sys.solve(F1), u2 = sys.solve(F2);
  CHECK(std::abs(sys.weights().dot(u1)) <= 1e-10 * u1.norm());
  CHECK(std::abs(sys.weights().dot(u2)) <= 1e-10 * u2.norm());

  // the solution operator is self-adjoint
  const double s12 = F1.dot(u2), s21 = F2.dot(u1);
  CHECK(s12 == doctest::Approx(s21).epsilon(1e-9));

  // the multiplier absorbs the compatibility defect: K u + lambda b = F with
  // lambda fixed by the constant test function
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m->n_nodes());
  const double lambda = ones.dot(F1) / ones.dot(sys.weights());
  const Eigen::VectorXd residual = sys.stiffness().apply(u1) + lambda * sys.weights() - F1;
  CHECK(residual.cwiseAbs().maxCoeff() <= 1e-9 * F1.cwiseAbs().maxCoeff());
}

TEST_CASE("dirichlet solve matches boundary data and the interior identity") {
  const MeshPtr m = build_uniform_mesh(8);
  const DirichletSystem sys(m, example_diffusion(m));
  UniformPm1 rng(22);

  BoundaryField g = zero_boundary_field(m, BoundaryKind::per_node);
  for (int k = 0; k < m->n_boundary(); ++k) g.values[k] = rng.next();
  Eigen::VectorXd load(m->n_nodes());
  for (int i = 0; i < m->n_nodes(); ++i) load[i] = rng.next();

  const Eigen::VectorXd v = sys.solve(load, g);
  for (int k = 0; k < m->n_boundary(); ++k) CHECK(v[m->boundary_nodes[k]] == g.values[k]);

  const Eigen::VectorXd residual = sys.stiffness().apply(v) - load;
  for (int i = 0; i < m->n_nodes(); ++i)
    if (!m->on_boundary(i)) CHECK(std::abs(residual[i]) <= 1e-9);

  const Eigen::VectorXd v0 = sys.solve_zero(load);
  for (int k = 0; k < m->n_boundary(); ++k) CHECK(v0[m->boundary_nodes[k]] == 0.0);
}

TEST_CASE("dirichlet system reproduces affine fields") {
  for (int level : {2, 4, 8}) {
    const MeshPtr m = build_uniform_mesh(level);
    const DirichletSystem sys(m, identity_diffusion(m));
    const NodalField exact = nodal_field(m, [](double x, double y) { return 0.3 * x - 0.8 * y + 0.25; });
    // affine fields are discretely harmonic: zero interior load suffices
    BoundaryField g = zero_boundary_field(m, BoundaryKind::per_node);
    for (int k = 0; k < m->n_boundary(); ++k) g.values[k] = exact.values[m->boundary_nodes[k]];
    g.zero_mean = false;
    const Eigen::VectorXd v = sys.solve(Eigen::VectorXd::Zero(m->n_nodes()), g);
    CHECK((v - exact.values).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("direct and iterative modes agree") {
  const MeshPtr m = build_uniform_mesh(8);
  const DiffusionField Q = example_diffusion(m);
  UniformPm1 rng(23);
  Eigen::VectorXd F(m->n_nodes());
  for (int i = 0; i < m->n_nodes(); ++i) F[i] = rng.next();

  const NeumannSystem nd(m, Q, SolveMode::direct);
  const NeumannSystem ni(m, Q, SolveMode::iterative);
  const Eigen::VectorXd ud = nd.solve(F), ui = ni.solve(F);
  CHECK((ud - ui).norm() <= 1e-7 * ud.norm());

  BoundaryField g = zero_boundary_field(m, BoundaryKind::per_node);
  for (int k = 0; k < m->n_boundary(); ++k) g.values[k] = rng.next();
  const DirichletSystem dd(m, Q, SolveMode::direct);
  const DirichletSystem di(m, Q, SolveMode::iterative);
  const Eigen::VectorXd vd = dd.solve(F, g), vi = di.solve(F, g);
  CHECK((vd - vi).norm() <= 1e-7 * vd.norm());
}

TEST_CASE("neumann solution norms are stable across random loads") {
  // Spread of ||u|| over random unit-L2 sources stays within a factor two of
  // the median: the discrete solution operator has no rogue amplification.
  auto ctx = testutil::benchmark_context(8);
  const MeshPtr& m = ctx->mesh;
  UniformPm1 rng(5);
  std::vector<double> norms;
  for (int t = 0; t < 20; ++t) {
    NodalField r = testutil::random_field(m, rng);
    const double rn = l2(*ctx, r);
    const Eigen::VectorXd load = ctx->M.apply(r.values / rn);
    norms.push_back(l2(*ctx, {m, ctx->neumann->solve(load)}));
  }
  std::sort(norms.begin(), norms.end());
  const double median = 0.5 * (norms[9] + norms[10]);
  const double ratio = norms.back() / median;
  CHECK(ratio > 1.0);
  CHECK(ratio < 2.0);  // measured 1.7954 for this seed
}

TEST_CASE("systems reject non-elliptic tensors") {
  const MeshPtr m = build_uniform_mesh(4);
  const DiffusionField bad =
      make_diffusion(m, [](double, double) { return std::array<double, 3>{1.0, 2.0, 1.0}; });
  CHECK_THROWS_AS(NeumannSystem(m, bad), std::invalid_argument);
  CHECK_THROWS_AS(DirichletSystem(m, bad), std::invalid_argument);
}

TEST_CASE("solves reject mismatched data") {
  const MeshPtr m = build_uniform_mesh(4);
  const NeumannSystem ns(m, identity_diffusion(m));
  const DirichletSystem ds(m, identity_diffusion(m));
  const Eigen::VectorXd load = Eigen::VectorXd::Zero(m->n_nodes());

  CHECK_THROWS_AS(ns.solve(Eigen::VectorXd::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(ds.solve_zero(Eigen::VectorXd::Zero(3)), std::invalid_argument);

  const MeshPtr other = build_uniform_mesh(4);
  CHECK_THROWS_AS(ds.solve(load, zero_boundary_field(other, BoundaryKind::per_node)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ds.solve(load, zero_boundary_field(m, BoundaryKind::per_edge)),
                  std::invalid_argument);
  BoundaryField short_g = zero_boundary_field(m, BoundaryKind::per_node);
  short_g.values.resize(3);
  CHECK_THROWS_AS(ds.solve(load, short_g), std::invalid_argument);
}
