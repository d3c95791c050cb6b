#pragma once

#include "invsrc/solvers.hpp"

namespace invsrc {

// Everything needed to evaluate the two boundary-value maps on one mesh:
// stiffness (with the problem's diffusion tensor and with the identity, the
// latter for H1 seminorms), mass, boundary weights and the two factored
// systems.  Build once per mesh, reuse across all solves.
struct ForwardContext {
  MeshPtr mesh;
  DiffusionField Q;
  SparseSymMatrix K;       // stiffness with Q (energy inner product)
  SparseSymMatrix K_unit;  // stiffness with identity diffusion
  SparseSymMatrix M;       // mass (L2 inner product)
  Eigen::VectorXd b;       // boundary weights, b_i = integral_bd phi_i
  std::shared_ptr<const NeumannSystem> neumann;
  std::shared_ptr<const DirichletSystem> dirichlet;
};

ForwardContext make_context(const MeshPtr& mesh, const DiffusionField& Q,
                            SolveMode mode = SolveMode::automatic);

// One Cauchy data pair: boundary flux and boundary trace.  The flux is
// carried as a base field (per-edge for the piecewise-constant exact data)
// plus an optional additive perturbation (per-node for synthetic noise,
// which enters as a piecewise-linear boundary field); j_noise.mesh == nullptr
// means no perturbation.  The trace g is per-node with zero boundary mean.
struct Measurement {
  BoundaryField j;
  BoundaryField j_noise;
  BoundaryField g;
};

// u = N_f j: zero-boundary-mean potential driven by the source f and the
// boundary flux j (per-node or per-edge).
NodalField neumann_map(const ForwardContext& ctx, const NodalField& f, const BoundaryField& j);

// Neumann potential under a measurement's total flux (carrier plus optional
// additive noise term).
NodalField neumann_map(const ForwardContext& ctx, const NodalField& f, const Measurement& m);

// v = D_f g: potential matching the boundary trace g (per-node) with source f.
NodalField dirichlet_map(const ForwardContext& ctx, const NodalField& f, const BoundaryField& g);

// T f = N_f 0 - D_f 0.  Linear, self-adjoint and monotone in the mass-
// weighted inner product; the data-free part of the misfit gradient.
NodalField t_op(const ForwardContext& ctx, const NodalField& f);

// Norms of piecewise-linear fields on the context mesh.
double l2(const ForwardContext& ctx, const NodalField& u);
double h1_semi(const ForwardContext& ctx, const NodalField& u);
double h1(const ForwardContext& ctx, const NodalField& u);
double energy(const ForwardContext& ctx, const NodalField& u);  // sqrt(u^T K_Q u)

// Mass-weighted inner product of two nodal fields.
double l2_inner(const ForwardContext& ctx, const NodalField& u, const NodalField& v);

// L2(boundary) norm of boundary data; mesh-only, no context required.
double boundary_l2(const BoundaryField& f);

// Boundary trace of a nodal field, in loop ordering.
BoundaryField trace(const NodalField& u);

}  // namespace invsrc
