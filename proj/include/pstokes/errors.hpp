// L2 error norms of a recovered solution against a closed-form reference:
// element velocity, gradient of the velocity reconstruction (broken gradient
// for DG), pressure, and the divergence of the element velocity field.
// Bases are rebuilt with the assembly parameters (so coefficients match the
// solve bitwise) and the error integrals use a finer quadrature.

#ifndef PSTOKES_ERRORS_HPP
#define PSTOKES_ERRORS_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "pstokes/dof_layout.hpp"
#include "pstokes/hho_local.hpp"

namespace pstokes {

struct ExactFields {
  VecFn velocity;
  std::function<Eigen::Matrix2d(const Vec2&)> velocity_gradient; // (i,j) = d u_j / d x_i
  std::function<double(const Vec2&)> pressure;
};

struct ErrorNorms {
  double u = 0.0, grad_u = 0.0, p = 0.0, div_u = 0.0;
};

/// Computes the four error norms from the per-element full local vectors
/// produced by StokesSystem::recover_solution.
inline ErrorNorms error_norms(const Mesh& mesh, Scheme scheme, int k,
                              const std::vector<Eigen::VectorXd>& local,
                              const ExactFields& exact) {
  ErrorNorms err;
  const int err_quad_degree = 2 * (k + 2) + 3;
  const int np = dim_P2(k);

  for (int e = 0; e < mesh.n_elements(); ++e) {
    const Eigen::VectorXd& x = local[e];
    const QuadratureRule q = make_element_quadrature(mesh, e, err_quad_degree);

    // velocity/pressure coefficients per component in one element basis,
    // plus the coefficients whose gradient carries the gradient error
    Eigen::MatrixXd ucoef, gcoef;
    Eigen::VectorXd pcoef;
    int nvaldofs; // basis functions carrying u and p
    std::unique_ptr<ElementBasis> basis;
    if (scheme == Scheme::Dg) {
      basis = std::make_unique<ElementBasis>(mesh, e, k, 2 * (k + 1) + 1);
      const int ne = dim_P2(k);
      nvaldofs = ne;
      ucoef.resize(ne, 2);
      gcoef.resize(ne, 2);
      for (int c = 0; c < 2; ++c) {
        ucoef.col(c) = x.segment(c * ne, ne);
        gcoef.col(c) = ucoef.col(c);
      }
      pcoef = x.segment(2 * ne, ne);
    } else {
      const int k_elem = element_degree(scheme, k);
      HhoElement he(mesh, e, k, k_elem);
      const int ne = he.n_elem_modes();
      const int nf = he.n_face_modes();
      Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(he.n_scalar_dofs(), 2);
      for (int c = 0; c < 2; ++c) {
        for (int m = 0; m < ne; ++m) comp(m, c) = x[c * ne + m];
        for (int lf = 0; lf < he.n_faces(); ++lf)
          for (int m = 0; m < nf; ++m)
            comp(he.face_offset(lf) + m, c) = x[2 * ne + lf * 2 * nf + c * nf + m];
      }
      const int nrec = he.n_rec_modes();
      nvaldofs = nrec;
      gcoef = he.reconstruction() * comp; // velocity reconstruction
      // The velocity field measured: the hybrid-pressure variant carries a
      // degree-(k+1) element velocity (pointwise divergence free), so it is
      // used directly; the equal-order variant's element field is only
      // degree k and the reconstruction is the field with the full rate.
      if (scheme == Scheme::HhoHp) {
        ucoef = Eigen::MatrixXd::Zero(nrec, 2);
        ucoef.topRows(ne) = comp.topRows(ne);
      } else {
        ucoef = gcoef;
      }
      pcoef = Eigen::VectorXd::Zero(nrec);
      pcoef.head(np) = x.segment(2 * (ne + he.n_faces() * nf), np);
      basis = std::make_unique<ElementBasis>(mesh, e, k + 1, he.quad_degree());
    }

    for (int iq = 0; iq < q.size(); ++iq) {
      const double w = q.weights[iq];
      const Eigen::VectorXd v = basis->eval(q.points[iq], nvaldofs);
      const Eigen::MatrixXd g = basis->eval_grad(q.points[iq], nvaldofs);
      const Vec2 ue = exact.velocity(q.points[iq]);
      const Eigen::Matrix2d ge = exact.velocity_gradient(q.points[iq]);
      const double pe = exact.pressure(q.points[iq]);
      double div = 0.0;
      for (int c = 0; c < 2; ++c) {
        const double uh = v.dot(ucoef.col(c));
        err.u += w * (uh - ue[c]) * (uh - ue[c]);
        for (int d = 0; d < 2; ++d) {
          const double gh = g.col(d).dot(gcoef.col(c));
          err.grad_u += w * (gh - ge(d, c)) * (gh - ge(d, c));
        }
        div += g.col(c).dot(ucoef.col(c));
      }
      const double ph = v.dot(pcoef);
      err.p += w * (ph - pe) * (ph - pe);
      err.div_u += w * div * div;
    }
  }
  err.u = std::sqrt(err.u);
  err.grad_u = std::sqrt(err.grad_u);
  err.p = std::sqrt(err.p);
  err.div_u = std::sqrt(err.div_u);
  return err;
}

} // namespace pstokes

#endif
