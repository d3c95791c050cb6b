#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace invsrc {

// Uniform Friedrichs-Keller triangulation of the square (-1,1)^2.  Level l
// splits every side into l segments and cuts each cell along its bottom-left
// to top-right diagonal, giving (l+1)^2 vertices, 2*l^2 triangles and 4*l
// boundary vertices.  All triangles have diameter sqrt(8)/l.

struct Node {
  double x, y;
};

struct Tri {
  std::array<int, 3> v;  // vertex ids, counter-clockwise
};

enum class Side { bottom = 0, right = 1, top = 2, left = 3 };

// One segment of the counter-clockwise boundary loop; edge k joins loop
// vertex k to loop vertex k+1 (mod 4l).
struct BoundaryEdge {
  int a = 0, b = 0;  // global vertex ids
  Side side = Side::bottom;
};

struct TriMesh {
  int level = 0;
  std::vector<Node> nodes;                   // lexicographic by (y, x)
  std::vector<Tri> tris;
  std::vector<int> boundary_nodes;           // ccw loop starting at (-1,-1)
  std::vector<BoundaryEdge> boundary_edges;  // ccw loop, same starting corner
  std::vector<int> boundary_index;           // vertex id -> loop position, -1 if interior

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_tris() const { return static_cast<int>(tris.size()); }
  int n_boundary() const { return static_cast<int>(boundary_nodes.size()); }
  bool on_boundary(int v) const { return boundary_index[v] >= 0; }

  double spacing() const { return 2.0 / level; }        // axis-aligned edge length
  double h() const;                                     // longest edge, sqrt(8)/level
  double tri_area(int t) const;                         // signed area (positive for ccw)
  std::array<double, 2> barycenter(int t) const;
};

using MeshPtr = std::shared_ptr<const TriMesh>;

// Builds the level-l mesh; throws std::invalid_argument for l < 1.
MeshPtr build_uniform_mesh(int level);

// Piecewise-linear scalar field, one value per vertex.
struct NodalField {
  MeshPtr mesh;
  Eigen::VectorXd values;
};

NodalField zero_field(const MeshPtr& mesh);
NodalField nodal_field(const MeshPtr& mesh, const std::function<double(double, double)>& f);

enum class BoundaryKind { per_node, per_edge };

// Scalar data on the boundary loop: either one value per boundary vertex
// (piecewise-linear traces) or one constant per boundary edge (fluxes).
// zero_mean marks trace data whose boundary integral vanishes.
struct BoundaryField {
  MeshPtr mesh;
  BoundaryKind kind = BoundaryKind::per_node;
  Eigen::VectorXd values;  // loop ordering (vertices or edges)
  bool zero_mean = false;
};

BoundaryField zero_boundary_field(const MeshPtr& mesh, BoundaryKind kind);
BoundaryField boundary_node_field(const MeshPtr& mesh,
                                  const std::function<double(double, double)>& f);
// Per-edge constants sampled at edge midpoints.
BoundaryField boundary_edge_field(const MeshPtr& mesh,
                                  const std::function<double(double, double)>& f);

// Exact integral over the boundary of the piecewise-linear (per_node) or
// piecewise-constant (per_edge) interpolant.
double boundary_integral(const BoundaryField& f);

// Subtracts the boundary mean and sets the zero_mean flag.
void recenter_boundary(BoundaryField& f);

// P1 interpolation of a coarse field onto a finer level of the same family.
// Exact at shared vertices and linear in the coarse values.  Requires
// fine->level to be a multiple of coarse.mesh->level.
NodalField prolong_nodal(const NodalField& coarse, const MeshPtr& fine);

// Samples a fine per-node boundary field at the coarse boundary vertices
// (every coarse boundary vertex is a fine one).  Fields flagged zero_mean
// are re-centered after sampling so the flag stays truthful.  Requires
// coarse->level to divide fine.mesh->level.
BoundaryField restrict_boundary(const BoundaryField& fine, const MeshPtr& coarse);

}  // namespace invsrc
