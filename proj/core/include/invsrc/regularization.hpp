#pragma once

#include "invsrc/forward.hpp"

#include <vector>

namespace invsrc {

// The variational reconstruction problem
//
//   min_f  (1/I) sum_i || N_f j_i - D_f g_i ||_energy^2  +  rho || f - f_star ||_L2^2
//
// over piecewise-linear sources f.  The misfit compares the Neumann and
// Dirichlet potentials of the same trial source in the diffusion-weighted
// energy norm; since N_f j - D_f g = T f + (N_0 j - D_0 g) is affine in f,
// the functional is a strictly convex quadratic with L2 gradient
//
//   grad(f) = (2/I) sum_i (N_f j_i - D_f g_i) + 2 rho (f - f_star).
struct RegularizedProblem {
  std::shared_ptr<const ForwardContext> ctx;
  std::vector<Measurement> data;
  double rho = 0.0;
  NodalField f_star;
};

RegularizedProblem make_problem(std::shared_ptr<const ForwardContext> ctx,
                                std::vector<Measurement> data, double rho);
RegularizedProblem make_problem(std::shared_ptr<const ForwardContext> ctx,
                                std::vector<Measurement> data, double rho, NodalField f_star);

double cost(const RegularizedProblem& p, const NodalField& f);
NodalField gradient(const RegularizedProblem& p, const NodalField& f);

// Mesh-size-coupled parameters of the synthetic experiments:
// h = sqrt(8)/level, rho = rho_coeff * h, theta = h * sqrt(rho),
// tau1 = 1e-6 * sqrt(h), tau2 = 1e-4 * sqrt(h).
struct Schedule {
  double h, rho, theta, tau1, tau2;
};
Schedule parameter_schedule(int level, double rho_coeff = 0.01);

struct CgOptions {
  double tau1 = 0.0;
  double tau2 = 0.0;
  int max_iter = 600;
  bool record_history = true;
};

// One row per iterate: the functional value and gradient norm at f_k, the
// step length / direction-mixing coefficient used to leave f_k (zero on the
// final row), and the stopping indicator ||grad|| - tau1 - tau2*||grad_0||.
struct CgIterate {
  int k = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double t = 0.0;
  double beta = 0.0;
  double tolerance = 0.0;
};

struct CgResult {
  NodalField f;
  int iterations = 0;         // final iterate index
  bool converged = false;     // stopping indicator reached zero
  double tolerance = 0.0;     // final stopping indicator value
  double grad_norm0 = 0.0;
  double grad_norm = 0.0;
  std::vector<CgIterate> history;
};

// Fletcher-Reeves conjugate gradients with the exact quadratic step length
//
//   t_k = -1/2 (d_k, grad(f_k)) / ( (d_k, T d_k) + rho ||d_k||^2 )
//
// (all inner products mass-weighted), beta_k = ||grad_k||^2 / ||grad_{k-1}||^2,
// d_0 = -grad(f_0).  Stops when the indicator reaches zero or at max_iter.
CgResult cg_minimize(const RegularizedProblem& p, const NodalField& f0, const CgOptions& opt);

// Solves the equivalent regularized operator equation
//
//   (T + rho I) f = rho f_star + (1/I) sum_i (D_0 g_i - N_0 j_i)
//
// by matrix-free conjugate gradients in the mass-weighted inner product.
// The result is the unique minimizer of the quadratic above; its fixed-point
// form is f - f_star = -(1/rho) (1/I) sum_i (N_f j_i - D_f g_i).
NodalField lavrentiev_solve(const RegularizedProblem& p, double rel_tol = 1e-10,
                            int max_iter_per_dof = 10);

}  // namespace invsrc
