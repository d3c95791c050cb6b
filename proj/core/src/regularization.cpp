#include "invsrc/regularization.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace invsrc {

namespace {

void validate(const RegularizedProblem& p, const char* who) {
  if (!p.ctx) throw std::invalid_argument(std::string(who) + ": problem has no context");
  if (p.data.empty()) throw std::invalid_argument(std::string(who) + ": no measurements");
  if (!(p.rho > 0.0)) throw std::invalid_argument(std::string(who) + ": rho must be positive");
  const MeshPtr& mesh = p.ctx->mesh;
  for (const auto& m : p.data) {
    if (m.j.mesh.get() != mesh.get() || m.g.mesh.get() != mesh.get())
      throw std::invalid_argument(std::string(who) + ": measurement on a different mesh");
    if (m.j_noise.mesh && m.j_noise.mesh.get() != mesh.get())
      throw std::invalid_argument(std::string(who) + ": flux perturbation on a different mesh");
    if (m.g.kind != BoundaryKind::per_node)
      throw std::invalid_argument(std::string(who) + ": trace data must be per-node");
  }
  if (p.f_star.mesh.get() != mesh.get() || p.f_star.values.size() != mesh->n_nodes())
    throw std::invalid_argument(std::string(who) + ": f_star does not match the context mesh");
}

// Data-only potential differences N_0 j_i - D_0 g_i; the affine offsets of
// the misfit states, independent of the trial source.
std::vector<Eigen::VectorXd> data_states(const RegularizedProblem& p) {
  const ForwardContext& ctx = *p.ctx;
  const NodalField zero = zero_field(ctx.mesh);
  std::vector<Eigen::VectorXd> out;
  out.reserve(p.data.size());
  for (const auto& m : p.data)
    out.push_back(neumann_map(ctx, zero, m).values - dirichlet_map(ctx, zero, m.g).values);
  return out;
}

Eigen::VectorXd mean_of(const std::vector<Eigen::VectorXd>& vs) {
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(vs.front().size());
  for (const auto& v : vs) avg += v;
  return avg / static_cast<double>(vs.size());
}

}  // namespace

RegularizedProblem make_problem(std::shared_ptr<const ForwardContext> ctx,
                                std::vector<Measurement> data, double rho) {
  NodalField fs = zero_field(ctx->mesh);
  return make_problem(std::move(ctx), std::move(data), rho, std::move(fs));
}

RegularizedProblem make_problem(std::shared_ptr<const ForwardContext> ctx,
                                std::vector<Measurement> data, double rho, NodalField f_star) {
  RegularizedProblem p{std::move(ctx), std::move(data), rho, std::move(f_star)};
  validate(p, "make_problem");
  return p;
}

double cost(const RegularizedProblem& p, const NodalField& f) {
  validate(p, "cost");
  const ForwardContext& ctx = *p.ctx;
  double misfit = 0.0;
  for (const auto& m : p.data) {
    const Eigen::VectorXd w = neumann_map(ctx, f, m).values - dirichlet_map(ctx, f, m.g).values;
    misfit += ctx.K.quad(w, w);
  }
  misfit /= static_cast<double>(p.data.size());
  const Eigen::VectorXd df = f.values - p.f_star.values;
  return misfit + p.rho * ctx.M.quad(df, df);
}

NodalField gradient(const RegularizedProblem& p, const NodalField& f) {
  validate(p, "gradient");
  const ForwardContext& ctx = *p.ctx;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(ctx.mesh->n_nodes());
  for (const auto& m : p.data)
    g += neumann_map(ctx, f, m).values - dirichlet_map(ctx, f, m.g).values;
  g *= 2.0 / static_cast<double>(p.data.size());
  g += 2.0 * p.rho * (f.values - p.f_star.values);
  return {ctx.mesh, std::move(g)};
}

Schedule parameter_schedule(int level, double rho_coeff) {
  if (level < 1) throw std::invalid_argument("parameter_schedule: level must be >= 1");
  if (!(rho_coeff > 0.0)) throw std::invalid_argument("parameter_schedule: rho_coeff must be positive");
  Schedule s;
  s.h = std::sqrt(8.0) / level;
  s.rho = rho_coeff * s.h;
  s.theta = s.h * std::sqrt(s.rho);
  s.tau1 = 1e-6 * std::sqrt(s.h);
  s.tau2 = 1e-4 * std::sqrt(s.h);
  return s;
}

CgResult cg_minimize(const RegularizedProblem& p, const NodalField& f0, const CgOptions& opt) {
  validate(p, "cg_minimize");
  const ForwardContext& ctx = *p.ctx;
  if (f0.mesh.get() != ctx.mesh.get() || f0.values.size() != ctx.mesh->n_nodes())
    throw std::invalid_argument("cg_minimize: initial guess does not match the context mesh");
  if (opt.max_iter < 1) throw std::invalid_argument("cg_minimize: max_iter must be >= 1");

  const auto data = data_states(p);
  const Eigen::VectorXd avg_data = mean_of(data);
  const double rho = p.rho;
  const double inv_I = 1.0 / static_cast<double>(data.size());

  auto m_dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return ctx.M.quad(a, b);
  };
  // misfit(f) evaluated from the current T f (the data offsets are fixed)
  auto misfit_of = [&](const Eigen::VectorXd& Tf) {
    double s = 0.0;
    for (const auto& d : data) {
      const Eigen::VectorXd w = Tf + d;
      s += ctx.K.quad(w, w);
    }
    return s * inv_I;
  };

  CgResult res;
  res.f = f0;
  Eigen::VectorXd f = f0.values;
  Eigen::VectorXd Tf = t_op(ctx, {ctx.mesh, f}).values;
  Eigen::VectorXd grad = 2.0 * (Tf + avg_data) + 2.0 * rho * (f - p.f_star.values);
  double gn = std::sqrt(std::max(0.0, m_dot(grad, grad)));
  const double gn0 = gn;
  res.grad_norm0 = gn0;

  auto cost_now = [&] {
    const Eigen::VectorXd df = f - p.f_star.values;
    return misfit_of(Tf) + rho * m_dot(df, df);
  };
  auto record = [&](int k, double t, double beta, double tol) {
    if (opt.record_history) res.history.push_back({k, cost_now(), gn, t, beta, tol});
  };

  if (gn == 0.0) {  // already stationary; step length is undefined
    res.converged = true;
    res.tolerance = -opt.tau1 - opt.tau2 * gn0;
    record(0, 0.0, 0.0, res.tolerance);
    return res;
  }

  Eigen::VectorXd d = -grad;
  double gn_prev = gn;
  int k = 0;
  double tol = gn - opt.tau1 - opt.tau2 * gn0;  // indicator at the current iterate

  while (true) {
    // exact step length along d for the quadratic functional
    const Eigen::VectorXd Td = t_op(ctx, {ctx.mesh, d}).values;
    const double denom = m_dot(d, Td) + rho * m_dot(d, d);
    if (!(denom > 0.0))
      throw std::runtime_error("cg_minimize: non-positive curvature along search direction");
    const double t = -0.5 * m_dot(d, grad) / denom;

    record(k, t, (k == 0) ? 0.0 : gn * gn / (gn_prev * gn_prev), tol);

    f += t * d;
    Tf = t_op(ctx, {ctx.mesh, f}).values;  // fresh solve; no incremental drift
    gn_prev = gn;
    grad = 2.0 * (Tf + avg_data) + 2.0 * rho * (f - p.f_star.values);
    gn = std::sqrt(std::max(0.0, m_dot(grad, grad)));
    ++k;
    tol = gn - opt.tau1 - opt.tau2 * gn0;

    if (tol <= 0.0 || k >= opt.max_iter) {
      res.converged = tol <= 0.0;
      break;
    }
    const double beta = (gn * gn) / (gn_prev * gn_prev);
    d = -grad + beta * d;
  }

  record(k, 0.0, 0.0, tol);
  res.f = {ctx.mesh, std::move(f)};
  res.iterations = k;
  res.tolerance = tol;
  res.grad_norm = gn;
  return res;
}

NodalField lavrentiev_solve(const RegularizedProblem& p, double rel_tol, int max_iter_per_dof) {
  validate(p, "lavrentiev_solve");
  const ForwardContext& ctx = *p.ctx;
  const int n = ctx.mesh->n_nodes();
  const double rho = p.rho;

  const Eigen::VectorXd avg_data = mean_of(data_states(p));
  const Eigen::VectorXd rhs = rho * p.f_star.values - avg_data;

  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return t_op(ctx, {ctx.mesh, x}).values + rho * x;
  };
  auto m_dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return ctx.M.quad(a, b);
  };

  // Conjugate gradients in the mass-weighted inner product; T + rho I is
  // self-adjoint and positive definite there.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = rhs;
  const double rhs_norm = std::sqrt(std::max(0.0, m_dot(rhs, rhs)));
  if (rhs_norm == 0.0) return {ctx.mesh, std::move(x)};

  Eigen::VectorXd d = r;
  double rr = m_dot(r, r);
  const int max_iter = max_iter_per_dof * n;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd Ad = apply(d);
    const double dAd = m_dot(d, Ad);
    if (!(dAd > 0.0))
      throw std::runtime_error("lavrentiev_solve: operator lost positive definiteness");
    const double alpha = rr / dAd;
    x += alpha * d;
    r -= alpha * Ad;
    const double rr_next = m_dot(r, r);
    if (std::sqrt(rr_next) <= rel_tol * rhs_norm) return {ctx.mesh, std::move(x)};
    d = r + (rr_next / rr) * d;
    rr = rr_next;
  }
  throw std::runtime_error("lavrentiev_solve: no convergence after " + std::to_string(max_iter) +
                           " iterations, relative residual " +
                           std::to_string(std::sqrt(rr) / rhs_norm));
}

}  // namespace invsrc
