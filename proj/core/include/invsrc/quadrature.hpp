#pragma once

#include "invsrc/mesh.hpp"

#include <array>
#include <cmath>
#include <functional>

namespace invsrc {

// 7-point symmetric triangle rule, exact for polynomials up to degree 5.
// Used as an independent oracle for error integrals against closed-form
// solutions -- deliberately does not touch the assembled matrices.
struct TriQuadratureRule {
  static constexpr int n = 7;
  // barycentric coordinates (l1, l2) with l3 = 1 - l1 - l2, and weights
  // summing to 1 (multiply by the triangle area).
  static constexpr double pts[n][2] = {
      {1.0 / 3.0, 1.0 / 3.0},
      {0.797426985353087, 0.101286507323456},
      {0.101286507323456, 0.797426985353087},
      {0.101286507323456, 0.101286507323456},
      {0.059715871789770, 0.470142064105115},
      {0.470142064105115, 0.059715871789770},
      {0.470142064105115, 0.470142064105115},
  };
  static constexpr double wts[n] = {0.225,
                                    0.125939180544827, 0.125939180544827, 0.125939180544827,
                                    0.132394152788506, 0.132394152788506, 0.132394152788506};
};

inline double integrate(const TriMesh& mesh, const std::function<double(double, double)>& f) {
  double total = 0.0;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const auto& v = mesh.tris[t].v;
    const Node &a = mesh.nodes[v[0]], &b = mesh.nodes[v[1]], &c = mesh.nodes[v[2]];
    const double area = mesh.tri_area(t);
    double s = 0.0;
    for (int q = 0; q < TriQuadratureRule::n; ++q) {
      const double l1 = TriQuadratureRule::pts[q][0], l2 = TriQuadratureRule::pts[q][1];
      const double l3 = 1.0 - l1 - l2;
      s += TriQuadratureRule::wts[q] * f(l1 * a.x + l2 * b.x + l3 * c.x,
                                         l1 * a.y + l2 * b.y + l3 * c.y);
    }
    total += area * s;
  }
  return total;
}

// || u_h - exact ||_L2 with u_h piecewise linear, quadrature per triangle.
inline double l2_error_vs(const NodalField& u, const std::function<double(double, double)>& exact) {
  const TriMesh& mesh = *u.mesh;
  double total = 0.0;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const auto& v = mesh.tris[t].v;
    const Node &a = mesh.nodes[v[0]], &b = mesh.nodes[v[1]], &c = mesh.nodes[v[2]];
    const double ua = u.values[v[0]], ub = u.values[v[1]], uc = u.values[v[2]];
    const double area = mesh.tri_area(t);
    double s = 0.0;
    for (int q = 0; q < TriQuadratureRule::n; ++q) {
      const double l1 = TriQuadratureRule::pts[q][0], l2 = TriQuadratureRule::pts[q][1];
      const double l3 = 1.0 - l1 - l2;
      const double x = l1 * a.x + l2 * b.x + l3 * c.x, y = l1 * a.y + l2 * b.y + l3 * c.y;
      const double d = l1 * ua + l2 * ub + l3 * uc - exact(x, y);
      s += TriQuadratureRule::wts[q] * d * d;
    }
    total += area * s;
  }
  return std::sqrt(total);
}

// | u_h - exact |_H1 (seminorm); grad_exact returns (du/dx, du/dy).
inline double h1_semi_error_vs(const NodalField& u,
                               const std::function<std::array<double, 2>(double, double)>& grad_exact) {
  const TriMesh& mesh = *u.mesh;
  double total = 0.0;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const auto& v = mesh.tris[t].v;
    const Node &a = mesh.nodes[v[0]], &b = mesh.nodes[v[1]], &c = mesh.nodes[v[2]];
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    const double area = 0.5 * det;
    // constant gradient of the P1 interpolant on this triangle
    const double gx = (u.values[v[0]] * (b.y - c.y) + u.values[v[1]] * (c.y - a.y) +
                       u.values[v[2]] * (a.y - b.y)) / det;
    const double gy = (u.values[v[0]] * (c.x - b.x) + u.values[v[1]] * (a.x - c.x) +
                       u.values[v[2]] * (b.x - a.x)) / det;
    double s = 0.0;
    for (int q = 0; q < TriQuadratureRule::n; ++q) {
      const double l1 = TriQuadratureRule::pts[q][0], l2 = TriQuadratureRule::pts[q][1];
      const double l3 = 1.0 - l1 - l2;
      const double x = l1 * a.x + l2 * b.x + l3 * c.x, y = l1 * a.y + l2 * b.y + l3 * c.y;
      const auto [ex, ey] = grad_exact(x, y);
      s += TriQuadratureRule::wts[q] * ((gx - ex) * (gx - ex) + (gy - ey) * (gy - ey));
    }
    total += area * s;
  }
  return std::sqrt(total);
}

}  // namespace invsrc
