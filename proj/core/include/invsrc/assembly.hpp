#pragma once

#include "invsrc/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace invsrc {

// Symmetric 2x2 diffusion tensor, piecewise constant per triangle.  Formula-
// defined coefficients are sampled at the triangle barycenter, so a jump
// curve assigns each triangle the side its barycenter lies on.
struct DiffusionField {
  MeshPtr mesh;
  Eigen::VectorXd q11, q12, q22;  // one entry per triangle
  double q_lower = 0.0;           // smallest eigenvalue over all triangles
};

// at_barycenter returns {q11, q12, q22} for a point.  The field stores the
// smallest eigenvalue; construction never throws so that deliberately broken
// fields can be built for negative tests -- assembly rejects them instead.
DiffusionField make_diffusion(const MeshPtr& mesh,
                              const std::function<std::array<double, 3>(double, double)>& at_barycenter);
DiffusionField identity_diffusion(const MeshPtr& mesh);

// Sparse symmetric matrix with exactly mirrored storage (a_ij and a_ji are
// bitwise equal by construction).
struct SparseSymMatrix {
  Eigen::SparseMatrix<double> m;

  int rows() const { return static_cast<int>(m.rows()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return m * x; }
  double quad(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const { return u.dot(m * v); }
};

// Exact P1 element integrals on one triangle (vertices counter-clockwise).
Eigen::Matrix3d stiffness_element(const Node& p0, const Node& p1, const Node& p2,
                                  double q11, double q12, double q22);
Eigen::Matrix3d mass_element(const Node& p0, const Node& p1, const Node& p2);

// Global matrices.  assemble_stiffness rejects diffusion fields that are not
// uniformly elliptic (q_lower <= 0) or that live on a different mesh.
SparseSymMatrix assemble_stiffness(const MeshPtr& mesh, const DiffusionField& Q);
SparseSymMatrix assemble_mass(const MeshPtr& mesh);

// Boundary mass matrix (n x n, nonzero only in boundary rows/columns) and the
// weight vector b_i = integral of the i-th hat function over the boundary.
SparseSymMatrix assemble_boundary_mass(const MeshPtr& mesh);
Eigen::VectorXd boundary_weights(const MeshPtr& mesh);

// Load vector of the boundary flux term: load_i = integral_bd j * phi_i.
// Accepts per-node (piecewise linear) and per-edge (piecewise constant) data.
Eigen::VectorXd neumann_load(const MeshPtr& mesh, const BoundaryField& j);

}  // namespace invsrc
