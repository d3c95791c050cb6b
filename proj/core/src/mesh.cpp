#include "invsrc/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace invsrc {

double TriMesh::h() const { return std::sqrt(8.0) / level; }

double TriMesh::tri_area(int t) const {
  const auto& [i, j, k] = tris[t].v;
  const Node &a = nodes[i], &b = nodes[j], &c = nodes[k];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

std::array<double, 2> TriMesh::barycenter(int t) const {
  const auto& [i, j, k] = tris[t].v;
  return {(nodes[i].x + nodes[j].x + nodes[k].x) / 3.0,
          (nodes[i].y + nodes[j].y + nodes[k].y) / 3.0};
}

MeshPtr build_uniform_mesh(int level) {
  if (level < 1)
    throw std::invalid_argument("build_uniform_mesh: level must be >= 1, got " +
                                std::to_string(level));
  auto mesh = std::make_shared<TriMesh>();
  TriMesh& m = *mesh;
  m.level = level;
  const int l = level, n1 = level + 1;
  auto vid = [n1](int i, int j) { return j * n1 + i; };

  m.nodes.resize(static_cast<size_t>(n1) * n1);
  for (int j = 0; j <= l; ++j)
    for (int i = 0; i <= l; ++i)
      m.nodes[vid(i, j)] = {-1.0 + 2.0 * i / l, -1.0 + 2.0 * j / l};

  m.tris.reserve(2 * static_cast<size_t>(l) * l);
  for (int j = 0; j < l; ++j)
    for (int i = 0; i < l; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      m.tris.push_back({{v00, v10, v11}});  // below the diagonal
      m.tris.push_back({{v00, v11, v01}});  // above the diagonal
    }

  // Counter-clockwise boundary loop from the corner (-1,-1); each side
  // contributes exactly l vertices (the starting corner of the next side is
  // not repeated).
  m.boundary_nodes.reserve(4 * static_cast<size_t>(l));
  for (int i = 0; i < l; ++i) m.boundary_nodes.push_back(vid(i, 0));      // bottom
  for (int j = 0; j < l; ++j) m.boundary_nodes.push_back(vid(l, j));      // right
  for (int i = 0; i < l; ++i) m.boundary_nodes.push_back(vid(l - i, l));  // top
  for (int j = 0; j < l; ++j) m.boundary_nodes.push_back(vid(0, l - j));  // left

  const int nb = 4 * l;
  m.boundary_edges.reserve(nb);
  for (int k = 0; k < nb; ++k) {
    BoundaryEdge e;
    e.a = m.boundary_nodes[k];
    e.b = m.boundary_nodes[(k + 1) % nb];
    e.side = static_cast<Side>(k / l);
    m.boundary_edges.push_back(e);
  }

  m.boundary_index.assign(m.nodes.size(), -1);
  for (int k = 0; k < nb; ++k) m.boundary_index[m.boundary_nodes[k]] = k;
  return mesh;
}

NodalField zero_field(const MeshPtr& mesh) {
  return {mesh, Eigen::VectorXd::Zero(mesh->n_nodes())};
}

NodalField nodal_field(const MeshPtr& mesh, const std::function<double(double, double)>& f) {
  NodalField out{mesh, Eigen::VectorXd(mesh->n_nodes())};
  for (int v = 0; v < mesh->n_nodes(); ++v)
    out.values[v] = f(mesh->nodes[v].x, mesh->nodes[v].y);
  return out;
}

BoundaryField zero_boundary_field(const MeshPtr& mesh, BoundaryKind kind) {
  const int n = mesh->n_boundary();  // edge and vertex loops have equal length
  return {mesh, kind, Eigen::VectorXd::Zero(n), kind == BoundaryKind::per_node};
}

BoundaryField boundary_node_field(const MeshPtr& mesh,
                                  const std::function<double(double, double)>& f) {
  BoundaryField out{mesh, BoundaryKind::per_node, Eigen::VectorXd(mesh->n_boundary()), false};
  for (int k = 0; k < mesh->n_boundary(); ++k) {
    const Node& p = mesh->nodes[mesh->boundary_nodes[k]];
    out.values[k] = f(p.x, p.y);
  }
  return out;
}

BoundaryField boundary_edge_field(const MeshPtr& mesh,
                                  const std::function<double(double, double)>& f) {
  const int nb = static_cast<int>(mesh->boundary_edges.size());
  BoundaryField out{mesh, BoundaryKind::per_edge, Eigen::VectorXd(nb), false};
  for (int k = 0; k < nb; ++k) {
    const auto& e = mesh->boundary_edges[k];
    const Node &a = mesh->nodes[e.a], &b = mesh->nodes[e.b];
    out.values[k] = f(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
  }
  return out;
}

double boundary_integral(const BoundaryField& f) {
  const TriMesh& m = *f.mesh;
  const double len = m.spacing();  // all boundary edges are axis-aligned
  double s = 0.0;
  if (f.kind == BoundaryKind::per_edge) {
    s = len * f.values.sum();
  } else {
    const int nb = m.n_boundary();
    for (int k = 0; k < nb; ++k)
      s += 0.5 * len * (f.values[k] + f.values[(k + 1) % nb]);
  }
  return s;
}

void recenter_boundary(BoundaryField& f) {
  const double perimeter = 4.0 * 2.0;
  f.values.array() -= boundary_integral(f) / perimeter;
  f.zero_mean = true;
}

namespace {

// Checks the two meshes belong to the nested uniform family and returns the
// refinement ratio fine/coarse.
int refinement_ratio(int coarse_level, int fine_level, const char* who) {
  if (fine_level < coarse_level || fine_level % coarse_level != 0)
    throw std::invalid_argument(std::string(who) + ": level " + std::to_string(fine_level) +
                                " is not a refinement of level " + std::to_string(coarse_level));
  return fine_level / coarse_level;
}

}  // namespace

NodalField prolong_nodal(const NodalField& coarse, const MeshPtr& fine) {
  if (!coarse.mesh) throw std::invalid_argument("prolong_nodal: field has no mesh");
  const int lc = coarse.mesh->level, lf = fine->level;
  const int r = refinement_ratio(lc, lf, "prolong_nodal");
  const Eigen::VectorXd& u = coarse.values;
  if (u.size() != coarse.mesh->n_nodes())
    throw std::invalid_argument("prolong_nodal: field size does not match its mesh");

  NodalField out{fine, Eigen::VectorXd(fine->n_nodes())};
  const int nc1 = lc + 1;
  auto cvid = [nc1](int i, int j) { return j * nc1 + i; };
  for (int j = 0; j <= lf; ++j) {
    for (int i = 0; i <= lf; ++i) {
      int ci = std::min(i / r, lc - 1), cj = std::min(j / r, lc - 1);
      const double xi = static_cast<double>(i - ci * r) / r;
      const double eta = static_cast<double>(j - cj * r) / r;
      const double u00 = u[cvid(ci, cj)], u10 = u[cvid(ci + 1, cj)];
      const double u01 = u[cvid(ci, cj + 1)], u11 = u[cvid(ci + 1, cj + 1)];
      // P1 evaluation on the cell split along its (0,0)-(1,1) diagonal; both
      // formulas agree on the diagonal itself.
      double val;
      if (eta <= xi)
        val = u00 * (1.0 - xi) + u10 * (xi - eta) + u11 * eta;
      else
        val = u00 * (1.0 - eta) + u11 * xi + u01 * (eta - xi);
      out.values[j * (lf + 1) + i] = val;
    }
  }
  return out;
}

BoundaryField restrict_boundary(const BoundaryField& fine, const MeshPtr& coarse) {
  if (!fine.mesh) throw std::invalid_argument("restrict_boundary: field has no mesh");
  if (fine.kind != BoundaryKind::per_node)
    throw std::invalid_argument("restrict_boundary: only per-node fields can be restricted");
  const int r = refinement_ratio(coarse->level, fine.mesh->level, "restrict_boundary");
  if (fine.values.size() != fine.mesh->n_boundary())
    throw std::invalid_argument("restrict_boundary: field size does not match its mesh");

  // Loop position m on the coarse boundary sits at loop position m*r on the
  // fine boundary (both loops start at (-1,-1) and walk ccw with level
  // vertices per side).
  BoundaryField out{coarse, BoundaryKind::per_node, Eigen::VectorXd(coarse->n_boundary()), false};
  for (int m = 0; m < coarse->n_boundary(); ++m) out.values[m] = fine.values[m * r];
  if (fine.zero_mean) recenter_boundary(out);
  return out;
}

}  // namespace invsrc
