#pragma once

#include "invsrc/assembly.hpp"

#include <memory>

namespace invsrc {

// Direct factorizations are used up to this many vertices (covers level 128);
// larger systems fall back to Jacobi-preconditioned conjugate gradients.
inline constexpr int kDirectSolveLimit = 40000;

enum class SolveMode { automatic, direct, iterative };

// Discrete pure-Neumann operator: given a load vector F, finds u with
//
//   K u + lambda b = F,   b^T u = 0,
//
// i.e. the Galerkin solution in the zero-boundary-mean subspace, with the
// multiplier absorbing the compatibility defect of F.  Direct mode factors
// the bordered saddle system [[K, b], [b^T, 0]] once (sparse LU); iterative
// mode runs Jacobi-PCG on the rank-one-augmented SPD form K + sigma*b*b^T
// and shifts the constant component afterwards -- both enforce b^T u = 0.
class NeumannSystem {
 public:
  NeumannSystem(MeshPtr mesh, const DiffusionField& Q, SolveMode mode = SolveMode::automatic);
  NeumannSystem(MeshPtr mesh, SparseSymMatrix K, SolveMode mode = SolveMode::automatic);
  ~NeumannSystem();
  NeumannSystem(NeumannSystem&&) noexcept;
  NeumannSystem& operator=(NeumannSystem&&) noexcept;

  Eigen::VectorXd solve(const Eigen::VectorXd& load) const;

  const MeshPtr& mesh() const { return mesh_; }
  const SparseSymMatrix& stiffness() const { return K_; }
  const Eigen::VectorXd& weights() const { return b_; }

 private:
  struct Impl;
  MeshPtr mesh_;
  SparseSymMatrix K_;
  Eigen::VectorXd b_;
  std::unique_ptr<Impl> impl_;
};

// Discrete Dirichlet solve: v matches the boundary data g at boundary
// vertices and satisfies the Galerkin identity against all interior hat
// functions.  The SPD interior block is factored once (sparse LDLT) or
// solved by Jacobi-PCG in iterative mode.
class DirichletSystem {
 public:
  DirichletSystem(MeshPtr mesh, const DiffusionField& Q, SolveMode mode = SolveMode::automatic);
  DirichletSystem(MeshPtr mesh, SparseSymMatrix K, SolveMode mode = SolveMode::automatic);
  ~DirichletSystem();
  DirichletSystem(DirichletSystem&&) noexcept;
  DirichletSystem& operator=(DirichletSystem&&) noexcept;

  // g must be per-node boundary data on the same mesh.
  Eigen::VectorXd solve(const Eigen::VectorXd& load, const BoundaryField& g) const;
  // Homogeneous boundary values (the common case inside the T operator).
  Eigen::VectorXd solve_zero(const Eigen::VectorXd& load) const;

  const MeshPtr& mesh() const { return mesh_; }
  const SparseSymMatrix& stiffness() const { return K_; }

 private:
  struct Impl;
  MeshPtr mesh_;
  SparseSymMatrix K_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace invsrc
