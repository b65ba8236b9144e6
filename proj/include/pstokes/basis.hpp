// Hierarchical L2-orthonormal modal bases on elements and faces, built by
// modified Gram-Schmidt on centroid/diameter-scaled monomials. Because the
// bases are orthonormal and nested by degree, L2 projection is a plain
// moment computation and projection between degrees is coefficient
// truncation / zero padding.

#ifndef PSTOKES_BASIS_HPP
#define PSTOKES_BASIS_HPP

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pstokes/quadrature.hpp"

namespace pstokes {

inline int dim_P2(int degree) { return (degree + 1) * (degree + 2) / 2; }
inline int dim_P1(int degree) { return degree + 1; }

namespace detail {

/// Modified Gram-Schmidt in the quadrature inner product, with one
/// mandatory re-orthogonalization pass (high-degree monomial Gram matrices
/// are too ill-conditioned for a single sweep). Returns the triangular
/// change-of-basis matrix and rewrites `vals` in place to the orthonormal
/// family. Throws if a pivot collapses, which flags a degenerate entity.
inline Eigen::MatrixXd mgs_coefficients(Eigen::MatrixXd& vals,
                                        const std::vector<double>& w,
                                        const std::string& entity) {
  const int n = static_cast<int>(vals.cols());
  const int nq = static_cast<int>(vals.rows());
  Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.data(), nq);
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Identity(n, n);
  auto dot = [&](int i, int j) { return vals.col(i).dot(wv.cwiseProduct(vals.col(j))); };
  for (int i = 0; i < n; ++i) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < i; ++j) {
        const double r = dot(i, j);
        vals.col(i) -= r * vals.col(j);
        coeffs.row(i) -= r * coeffs.row(j);
      }
    }
    const double nrm = std::sqrt(dot(i, i));
    if (!(nrm > 1e-14))
      throw std::runtime_error("orthonormalize: numerically singular Gram matrix on " + entity);
    vals.col(i) /= nrm;
    coeffs.row(i) /= nrm;
  }
  return coeffs;
}

} // namespace detail

/// Orthonormal basis of P^degree on one element, together with the
/// quadrature rule it was orthonormalized against. Functions are stored as
/// a lower-triangular coefficient matrix over scaled monomials in
/// degree-lexicographic order, so the leading dim_P2(l) rows form the
/// degree-l basis for every l <= degree.
class ElementBasis {
public:
  ElementBasis(const Mesh& mesh, int e, int degree, int quad_degree)
      : m_degree(degree), m_dim(dim_P2(degree)), m_center(mesh.element_centroid(e)),
        m_h(mesh.element_diameter(e)), m_quad(make_element_quadrature(mesh, e, quad_degree)) {
    orthonormalize(e);
  }

  int degree() const { return m_degree; }
  int dim() const { return m_dim; }
  const QuadratureRule& quadrature() const { return m_quad; }

  /// Values of the first `ndofs` basis functions at one point.
  Eigen::VectorXd eval(const Vec2& p, int ndofs = -1) const {
    if (ndofs < 0) ndofs = m_dim;
    const Eigen::VectorXd mono = monomials(p);
    return m_coeffs.topRows(ndofs) * mono;
  }

  /// Gradients, rows = basis functions, cols = (d/dx, d/dy).
  Eigen::MatrixXd eval_grad(const Vec2& p, int ndofs = -1) const {
    if (ndofs < 0) ndofs = m_dim;
    Eigen::MatrixXd dm(m_dim, 2);
    monomial_gradients(p, dm);
    return m_coeffs.topRows(ndofs) * dm;
  }

  /// (n_points x ndofs) table of values at the given points.
  Eigen::MatrixXd values_at(const std::vector<Vec2>& pts, int ndofs = -1) const {
    if (ndofs < 0) ndofs = m_dim;
    Eigen::MatrixXd v(pts.size(), ndofs);
    for (std::size_t q = 0; q < pts.size(); ++q) v.row(q) = eval(pts[q], ndofs).transpose();
    return v;
  }

  /// L2 projection onto P^l: with an orthonormal basis, coefficients are the
  /// moments of f against the first dim_P2(l) functions.
  Eigen::VectorXd project(const std::function<double(const Vec2&)>& f, int l) const {
    const int nd = dim_P2(l);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nd);
    for (int q = 0; q < m_quad.size(); ++q)
      c += m_quad.weights[q] * f(m_quad.points[q]) * eval(m_quad.points[q], nd);
    return c;
  }

private:
  int m_degree, m_dim;
  Vec2 m_center;
  double m_h;
  QuadratureRule m_quad;
  Eigen::MatrixXd m_coeffs; // lower triangular over scaled monomials

  Eigen::VectorXd monomials(const Vec2& p) const {
    const double x = (p.x() - m_center.x()) / m_h;
    const double y = (p.y() - m_center.y()) / m_h;
    Eigen::VectorXd m(m_dim);
    int idx = 0;
    for (int d = 0; d <= m_degree; ++d)
      for (int ay = 0; ay <= d; ++ay) m[idx++] = std::pow(x, d - ay) * std::pow(y, ay);
    return m;
  }

  void monomial_gradients(const Vec2& p, Eigen::MatrixXd& dm) const {
    const double x = (p.x() - m_center.x()) / m_h;
    const double y = (p.y() - m_center.y()) / m_h;
    int idx = 0;
    for (int d = 0; d <= m_degree; ++d)
      for (int ay = 0; ay <= d; ++ay) {
        const int ax = d - ay;
        dm(idx, 0) = ax == 0 ? 0.0 : ax * std::pow(x, ax - 1) * std::pow(y, ay) / m_h;
        dm(idx, 1) = ay == 0 ? 0.0 : ay * std::pow(x, ax) * std::pow(y, ay - 1) / m_h;
        ++idx;
      }
  }

  void orthonormalize(int e) {
    Eigen::MatrixXd vals(m_quad.size(), m_dim); // monomial values at quad points
    for (int q = 0; q < m_quad.size(); ++q) {
      const double x = (m_quad.points[q].x() - m_center.x()) / m_h;
      const double y = (m_quad.points[q].y() - m_center.y()) / m_h;
      int idx = 0;
      for (int d = 0; d <= m_degree; ++d)
        for (int ay = 0; ay <= d; ++ay) vals(q, idx++) = std::pow(x, d - ay) * std::pow(y, ay);
    }
    m_coeffs = detail::mgs_coefficients(vals, m_quad.weights, "element " + std::to_string(e));
  }
};

/// Orthonormal 1-variate basis of P^degree on one face, in the arclength
/// coordinate scaled by the face length.
class FaceBasis {
public:
  FaceBasis(const Mesh& mesh, int f, int degree, int quad_degree)
      : m_degree(degree), m_dim(dim_P1(degree)), m_mid(mesh.face_midpoint(f)),
        m_tangent(mesh.face_tangent(f)), m_h(mesh.face_length(f)),
        m_quad(make_face_quadrature(mesh, f, quad_degree)) {
    Eigen::MatrixXd vals(m_quad.size(), m_dim);
    for (int q = 0; q < m_quad.size(); ++q) {
      const double s = param(m_quad.points[q]);
      double p = 1.0;
      for (int d = 0; d < m_dim; ++d, p *= s) vals(q, d) = p;
    }
    m_coeffs = detail::mgs_coefficients(vals, m_quad.weights, "face " + std::to_string(f));
  }

  int degree() const { return m_degree; }
  int dim() const { return m_dim; }
  const QuadratureRule& quadrature() const { return m_quad; }

  Eigen::VectorXd eval(const Vec2& p, int ndofs = -1) const {
    if (ndofs < 0) ndofs = m_dim;
    const double s = param(p);
    Eigen::VectorXd mono(m_dim);
    double t = 1.0;
    for (int d = 0; d < m_dim; ++d, t *= s) mono[d] = t;
    return m_coeffs.topRows(ndofs) * mono;
  }

  Eigen::MatrixXd values_at(const std::vector<Vec2>& pts, int ndofs = -1) const {
    if (ndofs < 0) ndofs = m_dim;
    Eigen::MatrixXd v(pts.size(), ndofs);
    for (std::size_t q = 0; q < pts.size(); ++q) v.row(q) = eval(pts[q], ndofs).transpose();
    return v;
  }

  Eigen::VectorXd project(const std::function<double(const Vec2&)>& f, int l) const {
    const int nd = dim_P1(l);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nd);
    for (int q = 0; q < m_quad.size(); ++q)
      c += m_quad.weights[q] * f(m_quad.points[q]) * eval(m_quad.points[q], nd);
    return c;
  }

private:
  int m_degree, m_dim;
  Vec2 m_mid, m_tangent;
  double m_h;
  QuadratureRule m_quad;
  Eigen::MatrixXd m_coeffs;

  double param(const Vec2& p) const { return 2.0 * (p - m_mid).dot(m_tangent) / m_h; }
};

} // namespace pstokes

#endif
