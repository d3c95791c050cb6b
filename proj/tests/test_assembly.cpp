#include <invsrc/assembly.hpp>
#include <invsrc/experiments.hpp>
#include <invsrc/quadrature.hpp>
#include <invsrc/rng.hpp>

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "helpers.hpp"

using namespace invsrc;

namespace {
DiffusionField constant_diffusion(const MeshPtr& mesh, double q11, double q12, double q22) {
  return make_diffusion(mesh, [=](double, double) { return std::array<double, 3>{q11, q12, q22}; });
}
}  // namespace

TEST_CASE("element stiffness on the reference triangle") {
  const Node a{0, 0}, b{1, 0}, c{0, 1};
  const Eigen::Matrix3d K = stiffness_element(a, b, c, 1.0, 0.0, 1.0);
  Eigen::Matrix3d exact;
  exact << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  exact *= 0.5;
  CHECK((K - exact).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("element stiffness with an anisotropic tensor") {
  // area 1/2, gradients (-1,-1), (1,0), (0,1): K_ij = area * grad_i^T Q grad_j
  const Node a{0, 0}, b{1, 0}, c{0, 1};
  const double q11 = 2.0, q12 = 0.5, q22 = 3.0;
  const Eigen::Matrix3d K = stiffness_element(a, b, c, q11, q12, q22);
  Eigen::Matrix3d exact;
  exact << q11 + 2 * q12 + q22, -(q11 + q12), -(q12 + q22),
           -(q11 + q12), q11, q12,
           -(q12 + q22), q12, q22;
  exact *= 0.5;
  CHECK((K - exact).cwiseAbs().maxCoeff() <= 1e-15);

  // invariance under translation and behaviour under scaling by s: gradients
  // scale by 1/s, area by s^2, so the element matrix is scale-invariant.
  const double s = 3.0, tx = -0.7, ty = 1.2;
  const Node as{tx, ty}, bs{s + tx, ty}, cs{tx, s + ty};
  const Eigen::Matrix3d Ks = stiffness_element(as, bs, cs, q11, q12, q22);
  CHECK((Ks - exact).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("element mass matrix") {
  const Node a{0, 0}, b{1, 0}, c{0, 1};
  Eigen::Matrix3d pattern;
  pattern << 2, 1, 1, 1, 2, 1, 1, 1, 2;

  const Eigen::Matrix3d M = mass_element(a, b, c);
  CHECK((M - 0.5 / 12.0 * pattern).cwiseAbs().maxCoeff() <= 1e-15);

  // area scales the whole matrix: triangle (0,0),(2,0),(0,3) has area 3
  const Eigen::Matrix3d M2 = mass_element({0, 0}, {2, 0}, {0, 3});
  CHECK((M2 - 3.0 / 12.0 * pattern).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("global stiffness annihilates constants and is exactly symmetric") {
  const MeshPtr m = build_uniform_mesh(4);
  const SparseSymMatrix K = assemble_stiffness(m, example_diffusion(m));
  CHECK(K.rows() == m->n_nodes());

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m->n_nodes());
  CHECK(K.apply(ones).cwiseAbs().maxCoeff() <= 1e-13);

  // mirrored storage: transposed entries are bitwise equal
  for (int col = 0; col < K.m.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K.m, col); it; ++it)
      CHECK(K.m.coeff(col, it.row()) == it.value());

  UniformPm1 rng(4);
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd u(m->n_nodes());
    for (int i = 0; i < u.size(); ++i) u[i] = rng.next();
    CHECK(K.quad(u, u) >= 0.0);
  }
}

TEST_CASE("global stiffness quadratic form matches closed-form integrals") {
  // For affine fields the P1 interpolant is exact, so u^T K v equals the
  // integral of grad(u)^T Q grad(v) over the square.
  const MeshPtr m = build_uniform_mesh(8);
  const double q11 = 2.0, q12 = 0.5, q22 = 3.0;
  const SparseSymMatrix K = assemble_stiffness(m, constant_diffusion(m, q11, q12, q22));
  const Eigen::VectorXd X = nodal_field(m, [](double x, double) { return x; }).values;
  const Eigen::VectorXd Y = nodal_field(m, [](double, double y) { return y; }).values;
  CHECK(K.quad(X, X) == doctest::Approx(4.0 * q11).epsilon(1e-13));
  CHECK(K.quad(X, Y) == doctest::Approx(4.0 * q12).epsilon(1e-13));
  CHECK(K.quad(Y, Y) == doctest::Approx(4.0 * q22).epsilon(1e-13));

  const SparseSymMatrix KI = assemble_stiffness(m, identity_diffusion(m));
  CHECK(KI.quad(X, X) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(KI.quad(X, Y) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("global mass matrix integrates affine products exactly") {
  const MeshPtr m = build_uniform_mesh(4);
  const SparseSymMatrix M = assemble_mass(m);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m->n_nodes());
  const Eigen::VectorXd X = nodal_field(m, [](double x, double) { return x; }).values;
  const Eigen::VectorXd Y = nodal_field(m, [](double, double y) { return y; }).values;

  CHECK(M.quad(ones, ones) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(M.quad(X, X) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(M.quad(X, ones) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(M.quad(X, Y) == doctest::Approx(0.0).epsilon(1e-14));

  // row sums are the hat-function integrals; they partition the area
  CHECK(M.apply(ones).sum() == doctest::Approx(4.0).epsilon(1e-14));
  for (int i = 0; i < m->n_nodes(); ++i) CHECK(M.m.coeff(i, i) > 0.0);
}

TEST_CASE("boundary mass matrix and boundary weights") {
  const MeshPtr m = build_uniform_mesh(4);
  const double len = m->spacing();

  const Eigen::VectorXd b = boundary_weights(m);
  double sum = 0.0;
  for (int v = 0; v < m->n_nodes(); ++v) {
    if (m->on_boundary(v))
      CHECK(b[v] == doctest::Approx(len).epsilon(1e-14));  // two incident half edges
    else
      CHECK(b[v] == 0.0);
    sum += b[v];
  }
  CHECK(sum == doctest::Approx(8.0).epsilon(1e-14));

  const SparseSymMatrix Mb = assemble_boundary_mass(m);
  const int v0 = m->boundary_nodes[1];  // non-corner boundary vertex
  const int v1 = m->boundary_nodes[2];  // its loop neighbour
  CHECK(Mb.m.coeff(v0, v0) == doctest::Approx(2.0 * len / 3.0).epsilon(1e-14));
  CHECK(Mb.m.coeff(v0, v1) == doctest::Approx(len / 6.0).epsilon(1e-14));
  // interior rows vanish
  for (int v = 0; v < m->n_nodes(); ++v)
    if (!m->on_boundary(v)) CHECK(Mb.apply(Eigen::VectorXd::Unit(m->n_nodes(), v)).norm() == 0.0);
  // the quadratic form of the all-ones vector is the perimeter
  CHECK(Mb.quad(Eigen::VectorXd::Ones(m->n_nodes()), Eigen::VectorXd::Ones(m->n_nodes())) ==
        doctest::Approx(8.0).epsilon(1e-13));
}

TEST_CASE("neumann load vectors") {
  const MeshPtr m = build_uniform_mesh(4);
  const double len = m->spacing();

  // unit per-edge flux: load_i = integral of phi_i over the boundary
  const BoundaryField ones_e = boundary_edge_field(m, [](double, double) { return 1.0; });
  const Eigen::VectorXd load1 = neumann_load(m, ones_e);
  CHECK((load1 - boundary_weights(m)).cwiseAbs().maxCoeff() <= 1e-14);

  // unit per-node flux gives the same load
  const BoundaryField ones_n = boundary_node_field(m, [](double, double) { return 1.0; });
  CHECK((neumann_load(m, ones_n) - boundary_weights(m)).cwiseAbs().maxCoeff() <= 1e-14);

  // the benchmark flux family is balanced: total flux zero
  const Eigen::VectorXd loadf = neumann_load(m, flux_per_edge(m, {}));
  CHECK(std::abs(loadf.sum()) <= 1e-13);

  // per-node data: summing the loads telescopes to the boundary integral
  const BoundaryField xb = boundary_node_field(m, [](double x, double) { return x; });
  CHECK(std::abs(neumann_load(m, xb).sum() - boundary_integral(xb)) <= 1e-14);

  // a single per-edge value spreads half to each endpoint
  BoundaryField one_edge = zero_boundary_field(m, BoundaryKind::per_edge);
  one_edge.values[0] = 1.0;
  const Eigen::VectorXd le = neumann_load(m, one_edge);
  CHECK(le[m->boundary_edges[0].a] == doctest::Approx(len / 2.0).epsilon(1e-14));
  CHECK(le[m->boundary_edges[0].b] == doctest::Approx(len / 2.0).epsilon(1e-14));
  CHECK(le.sum() == doctest::Approx(len).epsilon(1e-14));
}

TEST_CASE("diffusion fields sample barycenters and carry ellipticity") {
  const MeshPtr m = build_uniform_mesh(8);

  const DiffusionField I = identity_diffusion(m);
  CHECK(I.q_lower == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(I.q11.size() == m->n_tris());
  CHECK(I.q12.norm() == 0.0);

  const DiffusionField Q = example_diffusion(m);
  CHECK(Q.q_lower == doctest::Approx(1.0).epsilon(1e-14));
  for (int t = 0; t < m->n_tris(); ++t) {
    const auto [bx, by] = m->barycenter(t);
    const auto [q11, q12, q22] = diffusion_coefficients(bx, by);
    CHECK(Q.q11[t] == q11);
    CHECK(Q.q12[t] == q12);
    CHECK(Q.q22[t] == q22);
  }
}

TEST_CASE("assembly rejects broken inputs") {
  const MeshPtr m = build_uniform_mesh(4);

  // indefinite tensor (eigenvalues -1 and 3) is constructible but not assemblable
  const DiffusionField bad =
      make_diffusion(m, [](double, double) { return std::array<double, 3>{1.0, 2.0, 1.0}; });
  CHECK(bad.q_lower < 0.0);
  CHECK_THROWS_AS(assemble_stiffness(m, bad), std::invalid_argument);

  // diffusion living on a different mesh object
  const MeshPtr other = build_uniform_mesh(4);
  CHECK_THROWS_AS(assemble_stiffness(m, identity_diffusion(other)), std::invalid_argument);
}

TEST_CASE("quadrature rule integrates smooth polynomials exactly") {
  const MeshPtr m = build_uniform_mesh(4);
  CHECK(integrate(*m, [](double, double) { return 1.0; }) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(integrate(*m, [](double x, double) { return x * x; }) ==
        doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  // degree five monomial, within the rule's exactness
  CHECK(integrate(*m, [](double x, double y) { return x * x * y * y * y; }) ==
        doctest::Approx(0.0).epsilon(1e-13));
  CHECK(integrate(*m, [](double x, double y) { return x * x * x * x * y; }) ==
        doctest::Approx(0.0).epsilon(1e-13));

  // error functionals vanish on interpolated affine data
  const NodalField u = nodal_field(m, [](double x, double y) { return 1.0 + 2.0 * x - y; });
  CHECK(l2_error_vs(u, [](double x, double y) { return 1.0 + 2.0 * x - y; }) <= 1e-13);
  CHECK(h1_semi_error_vs(u, [](double, double) { return std::array<double, 2>{2.0, -1.0}; }) <=
        1e-13);
}
