// Element-local discontinuous Galerkin machinery: BR2 jump liftings,
// discrete gradients, the symmetric penalized viscous coupling across faces,
// the stabilized equal-order pressure-velocity coupling, and data loads.
// Orthonormal element bases make every lifting a plain moment computation.

#ifndef PSTOKES_DG_LOCAL_HPP
#define PSTOKES_DG_LOCAL_HPP

#include <Eigen/Dense>
#include <vector>

#include "pstokes/basis.hpp"
#include "pstokes/stokes_data.hpp"

namespace pstokes {

/// Lower bound on the BR2 penalty for face f; the default adds one to it.
inline double dg_penalty_bound(const Mesh& mesh, int f) {
  const Face& fc = mesh.faces[f];
  double b = static_cast<double>(mesh.element_faces[fc.left].size());
  if (fc.right >= 0) b = std::max(b, static_cast<double>(mesh.element_faces[fc.right].size()));
  return b;
}

/// Per-(element, face) lifting data: with an orthonormal basis on T, the
/// lifting of a trace phi is the tensor (i,j) -> n_i * lambda_j where
/// lambda_j collects the half-moments of phi_j against the element basis.
/// `moments` maps face-quadrature values of a scalar trace to the
/// coefficient vector lambda.
struct LiftingOps {
  Eigen::MatrixXd moments; // ne x nq: 0.5 * Psi^T W
  Vec2 normal;             // n_TF

  /// Coefficients (in the element basis) of the (i,j) component of the
  /// lifting of the vector trace whose j-th component has the given values.
  Eigen::VectorXd lift_component(const Eigen::VectorXd& trace_vals_j) const {
    return moments * trace_vals_j;
  }
};

inline LiftingOps make_lifting(const ElementBasis& eb, const QuadratureRule& fq,
                               const Vec2& n_out) {
  LiftingOps l;
  l.normal = n_out;
  Eigen::MatrixXd psi(fq.size(), eb.dim());
  for (int q = 0; q < fq.size(); ++q) psi.row(q) = eb.eval(fq.points[q]).transpose();
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(fq.weights.data(), fq.size());
  l.moments = 0.5 * psi.transpose() * w.asDiagonal();
  return l;
}

/// One DG element: orthonormal basis of P^k plus its volume stiffness and
/// divergence coupling. DG requires k >= 1 (the coarsest multilevel degree).
class DgElement {
public:
  DgElement(const Mesh& mesh, int e, int k, int quad_degree)
      : m_basis(mesh, e, k, quad_degree), m_ne(dim_P2(k)) {
    if (k < 1) throw std::invalid_argument("dg: polynomial degree must be >= 1");
    const QuadratureRule& eq = m_basis.quadrature();
    m_stiff = Eigen::MatrixXd::Zero(m_ne, m_ne);
    m_divx = Eigen::MatrixXd::Zero(m_ne, m_ne);
    m_divy = Eigen::MatrixXd::Zero(m_ne, m_ne);
    for (int q = 0; q < eq.size(); ++q) {
      const Eigen::MatrixXd g = m_basis.eval_grad(eq.points[q]);
      const Eigen::VectorXd v = m_basis.eval(eq.points[q]);
      m_stiff += eq.weights[q] * g * g.transpose();
      m_divx += eq.weights[q] * v * g.col(0).transpose(); // int psi_i d_x psi_j
      m_divy += eq.weights[q] * v * g.col(1).transpose();
    }
  }

  const ElementBasis& basis() const { return m_basis; }
  int n_modes() const { return m_ne; }
  const Eigen::MatrixXd& stiffness() const { return m_stiff; }
  /// int_T psi_i d_c psi_j
  const Eigen::MatrixXd& div(int c) const { return c == 0 ? m_divx : m_divy; }

private:
  ElementBasis m_basis;
  int m_ne;
  Eigen::MatrixXd m_stiff, m_divx, m_divy;
};

/// Discrete gradient of a scalar broken polynomial on element T: returns the
/// coefficients (element basis of T) of component d_c, given the element
/// coefficients on T and, per i/D face, the jump trace values at the face
/// quadrature points. Used by tests and kept close to the definition; the
/// assembly integrates the same pieces term by term.
inline Eigen::VectorXd discrete_gradient_component(
    const DgElement& de, const Eigen::VectorXd& coeffs, int c,
    const std::vector<LiftingOps>& liftings, const std::vector<Eigen::VectorXd>& jump_vals) {
  const QuadratureRule& eq = de.basis().quadrature();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(de.n_modes());
  for (int q = 0; q < eq.size(); ++q) {
    const double gval = de.basis().eval_grad(eq.points[q]).col(c).dot(coeffs);
    out += eq.weights[q] * gval * de.basis().eval(eq.points[q]);
  }
  for (std::size_t i = 0; i < liftings.size(); ++i)
    out -= liftings[i].normal[c] * liftings[i].lift_component(jump_vals[i]);
  return out;
}

} // namespace pstokes

#endif
