#include "invsrc/forward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace invsrc {

namespace {

void check_field(const ForwardContext& ctx, const NodalField& u, const char* who) {
  if (u.mesh.get() != ctx.mesh.get())
    throw std::invalid_argument(std::string(who) + ": field lives on a different mesh");
  if (u.values.size() != ctx.mesh->n_nodes())
    throw std::invalid_argument(std::string(who) + ": field size does not match mesh");
}

}  // namespace

ForwardContext make_context(const MeshPtr& mesh, const DiffusionField& Q, SolveMode mode) {
  ForwardContext ctx;
  ctx.mesh = mesh;
  ctx.Q = Q;
  ctx.K = assemble_stiffness(mesh, Q);
  ctx.K_unit = assemble_stiffness(mesh, identity_diffusion(mesh));
  ctx.M = assemble_mass(mesh);
  ctx.b = boundary_weights(mesh);
  ctx.neumann = std::make_shared<NeumannSystem>(mesh, ctx.K, mode);
  ctx.dirichlet = std::make_shared<DirichletSystem>(mesh, ctx.K, mode);
  return ctx;
}

NodalField neumann_map(const ForwardContext& ctx, const NodalField& f, const BoundaryField& j) {
  check_field(ctx, f, "neumann_map");
  const Eigen::VectorXd load = ctx.M.apply(f.values) + neumann_load(ctx.mesh, j);
  return {ctx.mesh, ctx.neumann->solve(load)};
}

NodalField neumann_map(const ForwardContext& ctx, const NodalField& f, const Measurement& m) {
  check_field(ctx, f, "neumann_map");
  Eigen::VectorXd load = ctx.M.apply(f.values) + neumann_load(ctx.mesh, m.j);
  if (m.j_noise.mesh) load += neumann_load(ctx.mesh, m.j_noise);
  return {ctx.mesh, ctx.neumann->solve(load)};
}

NodalField dirichlet_map(const ForwardContext& ctx, const NodalField& f, const BoundaryField& g) {
  check_field(ctx, f, "dirichlet_map");
  return {ctx.mesh, ctx.dirichlet->solve(ctx.M.apply(f.values), g)};
}

NodalField t_op(const ForwardContext& ctx, const NodalField& f) {
  check_field(ctx, f, "t_op");
  const Eigen::VectorXd load = ctx.M.apply(f.values);
  return {ctx.mesh, ctx.neumann->solve(load) - ctx.dirichlet->solve_zero(load)};
}

double l2(const ForwardContext& ctx, const NodalField& u) {
  check_field(ctx, u, "l2");
  return std::sqrt(std::max(0.0, ctx.M.quad(u.values, u.values)));
}

double h1_semi(const ForwardContext& ctx, const NodalField& u) {
  check_field(ctx, u, "h1_semi");
  return std::sqrt(std::max(0.0, ctx.K_unit.quad(u.values, u.values)));
}

double h1(const ForwardContext& ctx, const NodalField& u) {
  check_field(ctx, u, "h1");
  const double a = ctx.M.quad(u.values, u.values), b = ctx.K_unit.quad(u.values, u.values);
  return std::sqrt(std::max(0.0, a + b));
}

double energy(const ForwardContext& ctx, const NodalField& u) {
  check_field(ctx, u, "energy");
  return std::sqrt(std::max(0.0, ctx.K.quad(u.values, u.values)));
}

double l2_inner(const ForwardContext& ctx, const NodalField& u, const NodalField& v) {
  check_field(ctx, u, "l2_inner");
  check_field(ctx, v, "l2_inner");
  return ctx.M.quad(u.values, v.values);
}

double boundary_l2(const BoundaryField& f) {
  const TriMesh& m = *f.mesh;
  const double len = m.spacing();
  double s = 0.0;
  if (f.kind == BoundaryKind::per_edge) {
    s = len * f.values.squaredNorm();
  } else {
    const int nb = m.n_boundary();
    for (int k = 0; k < nb; ++k) {
      const double a = f.values[k], b = f.values[(k + 1) % nb];
      s += len / 6.0 * (2.0 * a * a + 2.0 * a * b + 2.0 * b * b);
    }
  }
  return std::sqrt(std::max(0.0, s));
}

BoundaryField trace(const NodalField& u) {
  const TriMesh& m = *u.mesh;
  BoundaryField out{u.mesh, BoundaryKind::per_node, Eigen::VectorXd(m.n_boundary()), false};
  for (int k = 0; k < m.n_boundary(); ++k) out.values[k] = u.values[m.boundary_nodes[k]];
  return out;
}

}  // namespace invsrc
