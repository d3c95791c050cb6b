#pragma once

#include "invsrc/regularization.hpp"

#include <cstdint>

namespace invsrc {

// ---------------------------------------------------------------------------
// Benchmark problem on (-1,1)^2: discontinuous anisotropic diffusion, a
// piecewise-constant truth source supported on an ellipse and a disk, and a
// four-parameter family of piecewise-constant boundary fluxes.

struct FluxFamily {
  double A = 1, B = 2, C = 3, D = 4;
};

// Pointwise boundary flux: +-A and +-B on the two halves of the bottom/top
// sides, +-C and +-D on the left/right sides, arranged so the total flux
// vanishes for every parameter choice.  The pieces are half-open, so corners
// and sign-change points get exactly one value.
double flux_value(const FluxFamily& fam, double x, double y);

// Truth source: 2 on the ellipse 9(x+1/2)^2 + 16(y-1/2)^2 <= 1, -1 on the
// disk (x-1/2)^2 + (y+1/2)^2 <= 1/16, and the constant 5*pi/(7*pi - 192)
// (~ -9.239e-2) elsewhere -- chosen so the source integrates to zero.
// Points exactly on a jump curve take the inside value.
double source_truth(double x, double y);

// Reconstruction starting guess: sign(x), with x = 0 counted as negative.
double initial_guess(double x, double y);

// Diffusion tensor entries: q11 = 3 on the square |x|,|y| <= 1/2 else 1,
// q12 = 1 on the diamond |x|+|y| <= 1/2 else 0, q22 = 4 on the disk
// x^2+y^2 <= 1/4 else 2.  Uniformly elliptic (smallest eigenvalue 1).
std::array<double, 3> diffusion_coefficients(double x, double y);
DiffusionField example_diffusion(const MeshPtr& mesh);

BoundaryField flux_per_edge(const MeshPtr& mesh, const FluxFamily& fam);
BoundaryField flux_per_node(const MeshPtr& mesh, const FluxFamily& fam);

// ---------------------------------------------------------------------------
// Synthetic data

struct LevelTruth {
  MeshPtr mesh;
  NodalField f_true;      // nodal interpolant of the truth source
  BoundaryField j_edge;   // exact flux, per-edge (the flux family is constant
                          // on each boundary edge, so this carrier is exact)
  BoundaryField g_trace;  // exact trace, per-node, zero boundary mean
};

struct TruthData {
  MeshPtr fine_mesh;
  NodalField fine_potential;  // zero-mean potential the traces come from
  BoundaryField fine_trace;
  std::vector<LevelTruth> levels;  // same order as the input meshes
};

// Generates the exact Cauchy pair on a strictly finer grid and transplants
// the trace to each reconstruction mesh by nodal sampling (re-centered), so
// reconstructions never invert data manufactured on their own mesh.
TruthData make_truth_data(const std::vector<MeshPtr>& level_meshes, int fine_level,
                          const FluxFamily& flux = {}, SolveMode mode = SolveMode::automatic);

// Same-mesh variant: the trace comes from the reconstruction mesh itself.
// Exists for the inverse-crime control and the noise-rate study, where the
// crime is deliberate.
LevelTruth make_same_mesh_truth(const ForwardContext& ctx, const FluxFamily& flux = {});

struct NoisyMeasurement {
  Measurement meas;
  double delta = 0.0;  // ||jd - j||_L2(bd) + ||gd - g||_L2(bd)
};

// Adds one uniform(-1,1) draw of amplitude theta at each boundary node to
// both data fields: the flux perturbation rides along as a piecewise-linear
// boundary field next to the exact per-edge carrier, and the noisy trace is
// re-centered to zero boundary mean.  delta sums the L2(boundary) norms of
// the two perturbations.  Deterministic in seed; theta = 0 returns the exact
// pair with delta = 0.
NoisyMeasurement add_noise(const LevelTruth& truth, double theta, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiment drivers

struct RunRecord {
  int level = 0;
  double h = 0, rho = 0, theta = 0, delta = 0;
  int iterations = 0;
  bool converged = false;
  double tolerance = 0;
  double grad_norm0 = 0, grad_norm = 0;
  // errors against the same-level exact states (reconstruction vs truth
  // interpolant; noisy-data potentials vs exact-data potentials)
  double err_l2_f = 0, err_l2_N = 0, err_l2_D = 0, err_h1_N = 0, err_h1_D = 0;
  std::vector<CgIterate> history;
  NodalField f;       // reconstruction
  NodalField f_true;  // same-level truth interpolant
};

// Mesh-refinement sweep with the mesh-coupled parameter schedule
// (rho = rho_coeff * h, theta = h * sqrt(rho) unless overridden) and warm
// starts: each level's reconstruction is prolonged as the next initial guess.
struct SweepConfig {
  std::vector<int> levels{4, 8, 16, 32, 64};
  int fine_level = 128;
  std::uint64_t seed = 1;
  double rho_coeff = 0.01;
  double theta = -1.0;  // negative: scheduled per level
  int max_iter = 600;
  FluxFamily flux{};
  SolveMode mode = SolveMode::automatic;
  bool record_history = true;
};

std::vector<RunRecord> run_sweep(const SweepConfig& cfg);

// Preset flux families for the multi-measurement study: I = 1 is the
// canonical (1,2,3,4); I = 6 permutes (A,B,C) over {1,2,3} with D = 4;
// I = 16 takes the first 16 permutations of (1,2,3,4) in lexicographic order.
std::vector<FluxFamily> measurement_family(int I);

// Averaged multi-measurement reconstruction at one level; delta is the mean
// of the per-measurement data errors, and the error fields refer to the
// first family member's exact states.
struct MultiConfig {
  int I = 1;
  int level = 64;
  int fine_level = 128;
  double theta = 0.1;
  std::uint64_t seed = 1;
  double rho_coeff = 0.01;
  int max_iter = 600;
  SolveMode mode = SolveMode::automatic;
  bool record_history = false;
};

RunRecord run_multi(const MultiConfig& cfg);

// Experimental orders of convergence between consecutive refinement levels:
// eoc_i = (ln e_{i-1} - ln e_i) / (ln h_{i-1} - ln h_i).
std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs);
double mean_eoc(const std::vector<double>& rates);

}  // namespace invsrc
