#include "invsrc/solvers.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace invsrc {

namespace {

// Jacobi-preconditioned conjugate gradients for an SPD operator given as a
// callable.  Relative residual tolerance; throws on breakdown or stagnation.
template <class Op>
Eigen::VectorXd pcg(const Op& apply, const Eigen::VectorXd& diag, const Eigen::VectorXd& rhs,
                    double rel_tol, int max_iter, const char* who) {
  const Eigen::VectorXd inv_diag = diag.cwiseInverse();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd r = rhs;
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return x;

  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd Ap = apply(p);
    const double pAp = p.dot(Ap);
    if (pAp <= 0.0)
      throw std::runtime_error(std::string(who) + ": PCG breakdown, non-positive curvature");
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    if (r.norm() <= rel_tol * rhs_norm) return x;
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw std::runtime_error(std::string(who) + ": PCG did not converge, relative residual " +
                           std::to_string(r.norm() / rhs_norm));
}

bool use_direct(SolveMode mode, int n) {
  return mode == SolveMode::direct || (mode == SolveMode::automatic && n <= kDirectSolveLimit);
}

constexpr double kPcgTol = 1e-12;

}  // namespace

// ---------------------------------------------------------------------------
// NeumannSystem

struct NeumannSystem::Impl {
  bool direct = true;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;  // bordered system, direct mode
  double sigma = 1.0;                               // augmentation weight, iterative mode
  Eigen::VectorXd aug_diag;                         // diag(K) + sigma * b.^2
};

NeumannSystem::NeumannSystem(MeshPtr mesh, const DiffusionField& Q, SolveMode mode)
    : NeumannSystem(mesh, assemble_stiffness(mesh, Q), mode) {}

NeumannSystem::NeumannSystem(MeshPtr mesh, SparseSymMatrix K, SolveMode mode)
    : mesh_(std::move(mesh)), K_(std::move(K)), impl_(std::make_unique<Impl>()) {
  const int n = mesh_->n_nodes();
  if (K_.rows() != n)
    throw std::invalid_argument("NeumannSystem: stiffness size does not match mesh");
  b_ = boundary_weights(mesh_);
  impl_->direct = use_direct(mode, n);

  if (impl_->direct) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(K_.m.nonZeros() + 2 * static_cast<size_t>(mesh_->n_boundary()));
    for (int k = 0; k < K_.m.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(K_.m, k); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int v = 0; v < n; ++v)
      if (b_[v] != 0.0) {
        trip.emplace_back(v, n, b_[v]);
        trip.emplace_back(n, v, b_[v]);
      }
    Eigen::SparseMatrix<double> bordered(n + 1, n + 1);
    bordered.setFromTriplets(trip.begin(), trip.end());
    bordered.makeCompressed();
    impl_->lu.compute(bordered);
    if (impl_->lu.info() != Eigen::Success)
      throw std::runtime_error("NeumannSystem: factorization of the bordered system failed");
  } else {
    // Scale the rank-one augmentation to the stiffness diagonal so the
    // Jacobi preconditioner stays balanced.
    const Eigen::VectorXd diag = K_.m.diagonal();
    impl_->sigma = (diag.sum() / n) / b_.squaredNorm();
    impl_->aug_diag = diag + impl_->sigma * b_.cwiseProduct(b_);
  }
}

NeumannSystem::~NeumannSystem() = default;
NeumannSystem::NeumannSystem(NeumannSystem&&) noexcept = default;
NeumannSystem& NeumannSystem::operator=(NeumannSystem&&) noexcept = default;

Eigen::VectorXd NeumannSystem::solve(const Eigen::VectorXd& load) const {
  const int n = mesh_->n_nodes();
  if (load.size() != n)
    throw std::invalid_argument("NeumannSystem::solve: load size does not match mesh");

  if (impl_->direct) {
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = load;
    rhs[n] = 0.0;
    const Eigen::VectorXd sol = impl_->lu.solve(rhs);
    if (impl_->lu.info() != Eigen::Success)
      throw std::runtime_error("NeumannSystem::solve: back substitution failed");
    return sol.head(n);
  }

  // Solve (K + sigma b b^T) w = load, then remove the constant component:
  // u = w - (b^T w / b^T 1) * 1 satisfies K u + lambda b = load, b^T u = 0.
  const double sigma = impl_->sigma;
  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return K_.m * x + (sigma * b_.dot(x)) * b_;
  };
  const Eigen::VectorXd w =
      pcg(apply, impl_->aug_diag, load, kPcgTol, 10 * n, "NeumannSystem::solve");
  return w - Eigen::VectorXd::Constant(n, b_.dot(w) / b_.sum());
}

// ---------------------------------------------------------------------------
// DirichletSystem

struct DirichletSystem::Impl {
  bool direct = true;
  std::vector<int> interior;      // vertex ids of interior nodes
  std::vector<int> interior_pos;  // vertex id -> index into interior, -1 on boundary
  Eigen::SparseMatrix<double> K_II;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::VectorXd diag_II;
};

DirichletSystem::DirichletSystem(MeshPtr mesh, const DiffusionField& Q, SolveMode mode)
    : DirichletSystem(mesh, assemble_stiffness(mesh, Q), mode) {}

DirichletSystem::DirichletSystem(MeshPtr mesh, SparseSymMatrix K, SolveMode mode)
    : mesh_(std::move(mesh)), K_(std::move(K)), impl_(std::make_unique<Impl>()) {
  const int n = mesh_->n_nodes();
  if (K_.rows() != n)
    throw std::invalid_argument("DirichletSystem: stiffness size does not match mesh");

  impl_->interior_pos.assign(n, -1);
  for (int v = 0; v < n; ++v)
    if (!mesh_->on_boundary(v)) {
      impl_->interior_pos[v] = static_cast<int>(impl_->interior.size());
      impl_->interior.push_back(v);
    }
  const int ni = static_cast<int>(impl_->interior.size());

  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < K_.m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K_.m, k); it; ++it) {
      const int ri = impl_->interior_pos[it.row()], ci = impl_->interior_pos[it.col()];
      if (ri >= 0 && ci >= 0) trip.emplace_back(ri, ci, it.value());
    }
  impl_->K_II.resize(ni, ni);
  impl_->K_II.setFromTriplets(trip.begin(), trip.end());
  impl_->K_II.makeCompressed();

  impl_->direct = use_direct(mode, n);
  if (impl_->direct) {
    impl_->ldlt.compute(impl_->K_II);
    if (impl_->ldlt.info() != Eigen::Success)
      throw std::runtime_error("DirichletSystem: factorization of the interior block failed");
  } else {
    impl_->diag_II = impl_->K_II.diagonal();
  }
}

DirichletSystem::~DirichletSystem() = default;
DirichletSystem::DirichletSystem(DirichletSystem&&) noexcept = default;
DirichletSystem& DirichletSystem::operator=(DirichletSystem&&) noexcept = default;

namespace {

Eigen::VectorXd gather(const std::vector<int>& ids, const Eigen::VectorXd& full) {
  Eigen::VectorXd out(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) out[i] = full[ids[i]];
  return out;
}

}  // namespace

Eigen::VectorXd DirichletSystem::solve(const Eigen::VectorXd& load, const BoundaryField& g) const {
  if (g.mesh.get() != mesh_.get())
    throw std::invalid_argument("DirichletSystem::solve: boundary data lives on a different mesh");
  if (g.kind != BoundaryKind::per_node)
    throw std::invalid_argument("DirichletSystem::solve: boundary data must be per-node");
  if (g.values.size() != mesh_->n_boundary())
    throw std::invalid_argument("DirichletSystem::solve: boundary data size does not match mesh");
  if (load.size() != mesh_->n_nodes())
    throw std::invalid_argument("DirichletSystem::solve: load size does not match mesh");

  const int n = mesh_->n_nodes();
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < mesh_->n_boundary(); ++k) lift[mesh_->boundary_nodes[k]] = g.values[k];

  Eigen::VectorXd u = lift;
  const Eigen::VectorXd r = load - K_.m * lift;
  const Eigen::VectorXd r_I = gather(impl_->interior, r);
  Eigen::VectorXd u_I;
  if (impl_->direct) {
    u_I = impl_->ldlt.solve(r_I);
    if (impl_->ldlt.info() != Eigen::Success)
      throw std::runtime_error("DirichletSystem::solve: back substitution failed");
  } else {
    auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return impl_->K_II * x; };
    u_I = pcg(apply, impl_->diag_II, r_I, kPcgTol,
              10 * std::max(1, static_cast<int>(r_I.size())), "DirichletSystem::solve");
  }
  for (size_t i = 0; i < impl_->interior.size(); ++i) u[impl_->interior[i]] = u_I[i];
  return u;
}

Eigen::VectorXd DirichletSystem::solve_zero(const Eigen::VectorXd& load) const {
  if (load.size() != mesh_->n_nodes())
    throw std::invalid_argument("DirichletSystem::solve_zero: load size does not match mesh");
  return solve(load, zero_boundary_field(mesh_, BoundaryKind::per_node));
}

}  // namespace invsrc
