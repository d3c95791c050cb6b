#include "invsrc/assembly.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace invsrc {

namespace {

void check_mesh(const MeshPtr& mesh, const MeshPtr& other, const char* who) {
  if (mesh.get() != other.get())
    throw std::invalid_argument(std::string(who) + ": field lives on a different mesh");
}

double smaller_eigenvalue(double q11, double q12, double q22) {
  const double tr = q11 + q22;
  const double disc = std::sqrt((q11 - q22) * (q11 - q22) + 4.0 * q12 * q12);
  return 0.5 * (tr - disc);
}

}  // namespace

DiffusionField make_diffusion(const MeshPtr& mesh,
                              const std::function<std::array<double, 3>(double, double)>& at_barycenter) {
  const int nt = mesh->n_tris();
  DiffusionField Q{mesh, Eigen::VectorXd(nt), Eigen::VectorXd(nt), Eigen::VectorXd(nt), 0.0};
  double lo = std::numeric_limits<double>::infinity();
  for (int t = 0; t < nt; ++t) {
    const auto [cx, cy] = mesh->barycenter(t);
    const auto [a, b, c] = at_barycenter(cx, cy);
    Q.q11[t] = a;
    Q.q12[t] = b;
    Q.q22[t] = c;
    lo = std::min(lo, smaller_eigenvalue(a, b, c));
  }
  Q.q_lower = lo;
  return Q;
}

DiffusionField identity_diffusion(const MeshPtr& mesh) {
  return make_diffusion(mesh, [](double, double) { return std::array<double, 3>{1.0, 0.0, 1.0}; });
}

Eigen::Matrix3d stiffness_element(const Node& p0, const Node& p1, const Node& p2,
                                  double q11, double q12, double q22) {
  // Constant hat-function gradients: grad phi_i = (b_i, c_i) with
  // b_i = (y_{i+1} - y_{i+2}) / (2A), c_i = (x_{i+2} - x_{i+1}) / (2A).
  const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  if (det <= 0.0) throw std::invalid_argument("stiffness_element: degenerate or clockwise triangle");
  const double area = 0.5 * det;
  const double b[3] = {(p1.y - p2.y) / det, (p2.y - p0.y) / det, (p0.y - p1.y) / det};
  const double c[3] = {(p2.x - p1.x) / det, (p0.x - p2.x) / det, (p1.x - p0.x) / det};
  Eigen::Matrix3d K;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      // grad phi_i . Q grad phi_j, symmetric in (i, j); fill both halves from
      // the same expression so the element matrix is bitwise symmetric.
      const double v = area * (q11 * b[i] * b[j] + q22 * c[i] * c[j] +
                               q12 * (b[i] * c[j] + c[i] * b[j]));
      K(i, j) = v;
      K(j, i) = v;
    }
  return K;
}

Eigen::Matrix3d mass_element(const Node& p0, const Node& p1, const Node& p2) {
  const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  if (det <= 0.0) throw std::invalid_argument("mass_element: degenerate or clockwise triangle");
  const double w = 0.5 * det / 12.0;
  Eigen::Matrix3d M;
  M << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return w * M;
}

namespace {

SparseSymMatrix from_triplets(int n, std::vector<Eigen::Triplet<double>>& trip) {
  Eigen::SparseMatrix<double> upper(n, n);
  upper.setFromTriplets(trip.begin(), trip.end());
  SparseSymMatrix out;
  // Mirror the assembled upper triangle so both halves hold identical bits.
  out.m = upper.selfadjointView<Eigen::Upper>();
  return out;
}

}  // namespace

SparseSymMatrix assemble_stiffness(const MeshPtr& mesh, const DiffusionField& Q) {
  check_mesh(mesh, Q.mesh, "assemble_stiffness");
  if (Q.q11.size() != mesh->n_tris())
    throw std::invalid_argument("assemble_stiffness: diffusion field size does not match mesh");
  if (!(Q.q_lower > 0.0))
    throw std::invalid_argument("assemble_stiffness: diffusion field is not uniformly elliptic");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(mesh->n_tris()) * 6);
  for (int t = 0; t < mesh->n_tris(); ++t) {
    const auto& v = mesh->tris[t].v;
    const Eigen::Matrix3d K = stiffness_element(mesh->nodes[v[0]], mesh->nodes[v[1]],
                                                mesh->nodes[v[2]], Q.q11[t], Q.q12[t], Q.q22[t]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (v[i] <= v[j]) trip.emplace_back(v[i], v[j], K(i, j));
  }
  return from_triplets(mesh->n_nodes(), trip);
}

SparseSymMatrix assemble_mass(const MeshPtr& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(mesh->n_tris()) * 6);
  for (int t = 0; t < mesh->n_tris(); ++t) {
    const auto& v = mesh->tris[t].v;
    const Eigen::Matrix3d M =
        mass_element(mesh->nodes[v[0]], mesh->nodes[v[1]], mesh->nodes[v[2]]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (v[i] <= v[j]) trip.emplace_back(v[i], v[j], M(i, j));
  }
  return from_triplets(mesh->n_nodes(), trip);
}

SparseSymMatrix assemble_boundary_mass(const MeshPtr& mesh) {
  // 1D P1 mass blocks len/6 * [[2,1],[1,2]] over each boundary edge.
  std::vector<Eigen::Triplet<double>> trip;
  const double w = mesh->spacing() / 6.0;
  for (const auto& e : mesh->boundary_edges) {
    const int a = std::min(e.a, e.b), b = std::max(e.a, e.b);
    trip.emplace_back(a, a, 2.0 * w);
    trip.emplace_back(b, b, 2.0 * w);
    trip.emplace_back(a, b, w);
  }
  return from_triplets(mesh->n_nodes(), trip);
}

Eigen::VectorXd boundary_weights(const MeshPtr& mesh) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh->n_nodes());
  const double half = 0.5 * mesh->spacing();
  for (const auto& e : mesh->boundary_edges) {
    b[e.a] += half;
    b[e.b] += half;
  }
  return b;
}

Eigen::VectorXd neumann_load(const MeshPtr& mesh, const BoundaryField& j) {
  check_mesh(mesh, j.mesh, "neumann_load");
  const int nb = mesh->n_boundary();
  if (j.values.size() != nb)
    throw std::invalid_argument("neumann_load: boundary field size does not match mesh");

  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh->n_nodes());
  const double len = mesh->spacing();
  for (int k = 0; k < nb; ++k) {
    const auto& e = mesh->boundary_edges[k];
    if (j.kind == BoundaryKind::per_edge) {
      // integral_e j phi_i = j_e * len / 2 at both endpoints
      load[e.a] += 0.5 * len * j.values[k];
      load[e.b] += 0.5 * len * j.values[k];
    } else {
      // integral_e (ja phi_a + jb phi_b) phi_i via the 1D mass block
      const double ja = j.values[k], jb = j.values[(k + 1) % nb];
      load[e.a] += len / 6.0 * (2.0 * ja + jb);
      load[e.b] += len / 6.0 * (ja + 2.0 * jb);
    }
  }
  return load;
}

}  // namespace invsrc
