// Quadrature on mesh faces and polygonal elements: mapped Gauss-Legendre on
// segments, collapsed tensor rules on triangles, centroid-fan subdivision on
// general star-shaped polygons.

#ifndef PSTOKES_QUADRATURE_HPP
#define PSTOKES_QUADRATURE_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pstokes/mesh.hpp"

namespace pstokes {

struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

namespace detail {

/// Gauss-Legendre nodes/weights on [-1,1], Newton on Legendre roots.
inline void gauss_legendre(int npts, std::vector<double>& x, std::vector<double>& w) {
  x.assign(npts, 0.0);
  w.assign(npts, 0.0);
  for (int i = 0; i < npts; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (npts + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= npts; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = npts * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

/// Collapsed (Duffy) rule on the triangle (a,b,c), exact for 2D polynomials
/// of total degree <= `degree`.
inline void append_triangle_rule(const Vec2& a, const Vec2& b, const Vec2& c, int degree,
                                 QuadratureRule& out) {
  const int mu = (degree + 2) / 2 + 1; // covers the +1 from the collapse Jacobian
  const int mv = degree / 2 + 1;
  std::vector<double> xu, wu, xv, wv;
  gauss_legendre(mu, xu, wu);
  gauss_legendre(mv, xv, wv);
  const double area2 = (b - a).x() * (c - a).y() - (c - a).x() * (b - a).y();
  for (int i = 0; i < mu; ++i) {
    const double u = 0.5 * (xu[i] + 1.0);
    for (int j = 0; j < mv; ++j) {
      const double v = 0.5 * (xv[j] + 1.0) * (1.0 - u);
      out.points.push_back(a + u * (b - a) + v * (c - a));
      out.weights.push_back(0.25 * wu[i] * wv[j] * (1.0 - u) * area2);
    }
  }
}

} // namespace detail

/// Rule on face `f`, exact for 1D polynomials of degree <= `degree` along it.
inline QuadratureRule make_face_quadrature(const Mesh& mesh, int f, int degree) {
  const int npts = degree / 2 + 1;
  std::vector<double> x, w;
  detail::gauss_legendre(npts, x, w);
  const Vec2 a = mesh.vertices[mesh.faces[f].a];
  const Vec2 b = mesh.vertices[mesh.faces[f].b];
  QuadratureRule rule;
  rule.points.reserve(npts);
  rule.weights.reserve(npts);
  const double half = 0.5 * mesh.face_length(f);
  for (int i = 0; i < npts; ++i) {
    rule.points.push_back(0.5 * (a + b) + 0.5 * x[i] * (b - a));
    rule.weights.push_back(half * w[i]);
  }
  return rule;
}

/// Rule on element `e`, exact for polynomials of total degree <= `degree`.
/// Triangles get a single collapsed rule, other polygons a centroid fan;
/// the fan requires the polygon to be star-shaped w.r.t. its centroid.
inline QuadratureRule make_element_quadrature(const Mesh& mesh, int e, int degree) {
  const auto& loop = mesh.elements[e];
  const int nv = static_cast<int>(loop.size());
  QuadratureRule rule;
  if (nv == 3) {
    detail::append_triangle_rule(mesh.vertices[loop[0]], mesh.vertices[loop[1]],
                                 mesh.vertices[loop[2]], degree, rule);
    return rule;
  }
  const Vec2 c = mesh.element_centroid(e);
  for (int i = 0; i < nv; ++i) {
    const Vec2& a = mesh.vertices[loop[i]];
    const Vec2& b = mesh.vertices[loop[(i + 1) % nv]];
    if (detail::tri_area2(c, a, b) <= 0.0)
      throw std::runtime_error("make_element_quadrature: element " + std::to_string(e) +
                               " is not star-shaped w.r.t. its centroid");
    detail::append_triangle_rule(c, a, b, degree, rule);
  }
  return rule;
}

} // namespace pstokes

#endif
