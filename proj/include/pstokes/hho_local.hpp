// Element-local hybrid high-order machinery for the Stokes momentum and
// mass equations: scalar potential reconstruction with mean-value closure,
// face residuals, the stabilized viscous block with weakly enforced
// Dirichlet conditions, the pressure-velocity coupling in its discontinuous
// (element pressure) and hybrid (element + face pressure) variants, and the
// data loads.

#ifndef PSTOKES_HHO_LOCAL_HPP
#define PSTOKES_HHO_LOCAL_HPP

#include <Eigen/Dense>
#include <vector>

#include "pstokes/basis.hpp"
#include "pstokes/stokes_data.hpp"

namespace pstokes {

inline double default_dirichlet_penalty(int k) { return 3.0 * (k + 1) * (k + 1); }

/// Scalar-level operators on one element for face degree k and element
/// degree k_elem in {k, k+1}. Local scalar dofs are ordered element modes
/// first, then the faces in element_faces order.
class HhoElement {
public:
  HhoElement(const Mesh& mesh, int e, int k, int k_elem)
      : m_mesh(mesh), m_e(e), m_k(k), m_k_elem(k_elem),
        m_quad_degree(2 * (k + 1) + 1),
        m_rec_basis(mesh, e, k + 1, m_quad_degree) {
    m_nrec = dim_P2(k + 1);
    m_ne = dim_P2(k_elem);
    m_nf = dim_P1(k);
    const auto& fus = mesh.element_faces[e];
    m_nfaces = static_cast<int>(fus.size());
    m_nscalar = m_ne + m_nfaces * m_nf;
    m_fbases.reserve(m_nfaces);
    for (const auto& fu : fus) m_fbases.emplace_back(mesh, fu.face, k, m_quad_degree);
    build_reconstruction();
  }

  int face_degree() const { return m_k; }
  int element_degree() const { return m_k_elem; }
  int n_faces() const { return m_nfaces; }
  int n_elem_modes() const { return m_ne; }
  int n_face_modes() const { return m_nf; }
  int n_scalar_dofs() const { return m_nscalar; }
  int n_rec_modes() const { return m_nrec; }
  const ElementBasis& rec_basis() const { return m_rec_basis; }
  const FaceBasis& face_basis(int lf) const { return m_fbases[lf]; }
  int face_offset(int lf) const { return m_ne + lf * m_nf; }

  /// Potential reconstruction: coefficients in the degree-(k+1) orthonormal
  /// element basis as a linear map of the local scalar dofs.
  const Eigen::MatrixXd& reconstruction() const { return m_pr; }

  /// Face residual values at the quadrature points of local face lf,
  /// columns indexed by local scalar dofs.
  Eigen::MatrixXd face_residual_values(int lf) const {
    const FaceBasis& fb = m_fbases[lf];
    const auto& pts = fb.quadrature().points;
    const Eigen::MatrixXd rec_tr = m_rec_basis.values_at(pts) * m_pr; // trace of p(v)
    const Eigen::MatrixXd phi = fb.values_at(pts);
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(fb.quadrature().weights.data(),
                                                          fb.quadrature().size());
    // pi_F^k(v_F - p(v)); v_F is already in P^k(F), so it projects to itself
    Eigen::MatrixXd coeff1 = phi.transpose() * w.asDiagonal() * (-rec_tr); // nf x nscalar
    coeff1.middleCols(face_offset(lf), m_nf) += Eigen::MatrixXd::Identity(m_nf, m_nf);
    // pi_T^{k_elem}(v_T - p(v)) restricted to the face
    Eigen::MatrixXd coeff2 = -m_pr.topRows(m_ne);
    coeff2.leftCols(m_ne) += Eigen::MatrixXd::Identity(m_ne, m_ne);
    return phi * coeff1 - m_rec_basis.values_at(pts, m_ne) * coeff2;
  }

  /// Scalar viscous block: reconstruction stiffness + face-residual
  /// stabilization + weak Dirichlet terms with penalty eta.
  Eigen::MatrixXd scalar_viscous_block(double eta) const {
    if (!(eta > 0.0)) throw std::invalid_argument("hho: Dirichlet penalty must be positive");
    Eigen::MatrixXd a = m_pr.transpose() * m_stiff * m_pr;
    for (int lf = 0; lf < m_nfaces; ++lf) {
      const FaceBasis& fb = m_fbases[lf];
      const int f = m_mesh.element_faces[m_e][lf].face;
      const double hF = m_mesh.face_length(f);
      Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(fb.quadrature().weights.data(),
                                                            fb.quadrature().size());
      const Eigen::MatrixXd r = face_residual_values(lf);
      a += (1.0 / hF) * r.transpose() * w.asDiagonal() * r;
      if (m_mesh.faces[f].tag == FaceTag::Dirichlet) {
        const Eigen::MatrixXd dn = normal_grad_values(lf);           // n . grad p(v)
        Eigen::MatrixXd vf = Eigen::MatrixXd::Zero(fb.quadrature().size(), m_nscalar);
        vf.middleCols(face_offset(lf), m_nf) = fb.values_at(fb.quadrature().points);
        const Eigen::MatrixXd cross = dn.transpose() * w.asDiagonal() * vf;
        a -= cross + cross.transpose();
        a += (eta / hF) * vf.transpose() * w.asDiagonal() * vf;
      }
    }
    return a;
  }

  /// Values of n . grad p(v) at the quadrature points of local face lf.
  Eigen::MatrixXd normal_grad_values(int lf) const {
    const FaceBasis& fb = m_fbases[lf];
    const auto& pts = fb.quadrature().points;
    const int f = m_mesh.element_faces[m_e][lf].face;
    const Vec2 n = m_mesh.element_faces[m_e][lf].sign * m_mesh.face_normal(f);
    Eigen::MatrixXd dn(fb.quadrature().size(), m_nrec);
    for (int q = 0; q < fb.quadrature().size(); ++q)
      dn.row(q) = (m_rec_basis.eval_grad(pts[q]) * n).transpose();
    return dn * m_pr;
  }

  Vec2 outward_normal(int lf) const {
    const auto& fu = m_mesh.element_faces[m_e][lf];
    return fu.sign * m_mesh.face_normal(fu.face);
  }

  const Mesh& mesh() const { return m_mesh; }
  int element() const { return m_e; }
  int quad_degree() const { return m_quad_degree; }
  const Eigen::MatrixXd& reconstruction_stiffness() const { return m_stiff; }

private:
  const Mesh& m_mesh;
  int m_e, m_k, m_k_elem, m_quad_degree;
  ElementBasis m_rec_basis;
  std::vector<FaceBasis> m_fbases;
  int m_nrec = 0, m_ne = 0, m_nf = 0, m_nfaces = 0, m_nscalar = 0;
  Eigen::MatrixXd m_stiff; // grad-grad Gram of the reconstruction basis
  Eigen::MatrixXd m_pr;    // nrec x nscalar

  void build_reconstruction() {
    const QuadratureRule& eq = m_rec_basis.quadrature();
    m_stiff = Eigen::MatrixXd::Zero(m_nrec, m_nrec);
    Eigen::VectorXd ones_moments = Eigen::VectorXd::Zero(m_nrec);
    for (int q = 0; q < eq.size(); ++q) {
      const Eigen::MatrixXd g = m_rec_basis.eval_grad(eq.points[q]);
      m_stiff += eq.weights[q] * g * g.transpose();
      ones_moments += eq.weights[q] * m_rec_basis.eval(eq.points[q]);
    }
    // right-hand side columns: grad-grad against element modes, face terms
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m_nrec, m_nscalar);
    rhs.leftCols(m_ne) = m_stiff.leftCols(m_ne);
    for (int lf = 0; lf < m_nfaces; ++lf) {
      const FaceBasis& fb = m_fbases[lf];
      const auto& fq = fb.quadrature();
      const Vec2 n = outward_normal(lf);
      for (int q = 0; q < fq.size(); ++q) {
        const Eigen::VectorXd gn = m_rec_basis.eval_grad(fq.points[q]) * n;
        const Eigen::VectorXd elem_vals = m_rec_basis.eval(fq.points[q], m_ne);
        const Eigen::VectorXd face_vals = fb.eval(fq.points[q]);
        rhs.middleCols(face_offset(lf), m_nf) += fq.weights[q] * gn * face_vals.transpose();
        rhs.leftCols(m_ne) -= fq.weights[q] * gn * elem_vals.transpose();
      }
    }
    // bordered system closing the Neumann problem with the mean-value
    // constraint int_T p(v) = int_T v_T
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m_nrec + 1, m_nrec + 1);
    sys.topLeftCorner(m_nrec, m_nrec) = m_stiff;
    sys.topRightCorner(m_nrec, 1) = ones_moments;
    sys.bottomLeftCorner(1, m_nrec) = ones_moments.transpose();
    Eigen::MatrixXd brhs = Eigen::MatrixXd::Zero(m_nrec + 1, m_nscalar);
    brhs.topRows(m_nrec) = rhs;
    brhs.block(m_nrec, 0, 1, m_ne) = ones_moments.head(m_ne).transpose();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys);
    if (lu.determinant() == 0.0)
      throw std::runtime_error("hho: singular reconstruction system on element " +
                               std::to_string(m_e));
    m_pr = lu.solve(brhs).topRows(m_nrec);
  }
};

/// Full local Stokes blocks of one element in the dof order
/// [U_T | U_F1 .. U_FN | P_T (| P_F1 .. P_FN)] with velocity components
/// contiguous per entity. `mat` carries the viscous block, the momentum
/// pressure columns and the mass rows; `rhs` the data loads.
struct HhoLocalBlocks {
  Eigen::MatrixXd mat;
  Eigen::VectorXd rhs;
  int n_vel = 0;    // total velocity dofs
  int n_press = 0;  // total pressure dofs (element, then faces for hybrid)
  int ne = 0, nf = 0, np = 0, nfp = 0, nfaces = 0;

  int vel_elem(int comp, int m) const { return comp * ne + m; }
  int vel_face(int lf, int comp, int m) const { return 2 * ne + lf * 2 * nf + comp * nf + m; }
  int press_elem(int m) const { return n_vel + m; }
  int press_face(int lf, int m) const { return n_vel + np + lf * nfp + m; }
  int size() const { return n_vel + n_press; }
};

/// Assembles the complete local matrix and load vector of the HHO scheme on
/// one element. `hybrid_pressure` selects the variant with face pressures
/// (element velocity degree k+1); otherwise the equal-order discontinuous
/// pressure variant is produced.
inline HhoLocalBlocks build_hho_local(const HhoElement& he, bool hybrid_pressure, double eta,
                                      const StokesData& data) {
  const Mesh& mesh = he.mesh();
  const int e = he.element();
  HhoLocalBlocks b;
  b.ne = he.n_elem_modes();
  b.nf = he.n_face_modes();
  b.np = dim_P2(he.face_degree());
  b.nfp = hybrid_pressure ? dim_P1(he.face_degree()) : 0;
  b.nfaces = he.n_faces();
  b.n_vel = 2 * (b.ne + b.nfaces * b.nf);
  b.n_press = b.np + b.nfaces * b.nfp;
  const int n = b.n_vel + b.n_press;
  b.mat = Eigen::MatrixXd::Zero(n, n);
  b.rhs = Eigen::VectorXd::Zero(n);

  // viscous block, component by component
  const Eigen::MatrixXd a = he.scalar_viscous_block(eta);
  auto vel_index = [&](int sdof, int comp) {
    return sdof < b.ne ? b.vel_elem(comp, sdof)
                       : b.vel_face((sdof - b.ne) / b.nf, comp, (sdof - b.ne) % b.nf);
  };
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < he.n_scalar_dofs(); ++i)
      for (int j = 0; j < he.n_scalar_dofs(); ++j)
        b.mat(vel_index(i, c), vel_index(j, c)) += a(i, j);

  const ElementBasis& eb = he.rec_basis();
  const QuadratureRule& eq = eb.quadrature();

  // element pressure rows: -int_T div(u_T) q against every pressure mode
  for (int q = 0; q < eq.size(); ++q) {
    const Eigen::VectorXd pv = eb.eval(eq.points[q], b.np);
    const Eigen::MatrixXd g = eb.eval_grad(eq.points[q]);
    for (int c = 0; c < 2; ++c)
      for (int m = 0; m < b.ne; ++m) {
        const double div_cm = g(m, c);
        for (int i = 0; i < b.np; ++i)
          b.mat(b.press_elem(i), b.vel_elem(c, m)) -= eq.weights[q] * div_cm * pv[i];
      }
    // body force load
    const Vec2 fv = data.f(eq.points[q]);
    const Eigen::VectorXd ev = eb.eval(eq.points[q], b.ne);
    for (int c = 0; c < 2; ++c)
      for (int m = 0; m < b.ne; ++m) b.rhs[b.vel_elem(c, m)] += eq.weights[q] * fv[c] * ev[m];
  }

  // face terms of the coupling, the boundary loads, and (hybrid) the face
  // pressure rows
  for (int lf = 0; lf < b.nfaces; ++lf) {
    const int f = mesh.element_faces[e][lf].face;
    const FaceTag tag = mesh.faces[f].tag;
    const FaceBasis& fb = he.face_basis(lf);
    const auto& fq = fb.quadrature();
    const Vec2 n = he.outward_normal(lf);
    const double hF = mesh.face_length(f);
    const Eigen::MatrixXd dn = he.normal_grad_values(lf); // n.grad p(v) values
    for (int q = 0; q < fq.size(); ++q) {
      const double w = fq.weights[q];
      const Eigen::VectorXd pv = eb.eval(fq.points[q], b.np);   // element pressure modes
      const Eigen::VectorXd ev = eb.eval(fq.points[q], b.ne);   // element velocity traces
      const Eigen::VectorXd fv = fb.eval(fq.points[q]);         // face modes

      if (!hybrid_pressure) {
        // -sum_F int_F p (u_F - u_T).n, plus +int_F p (u_F.n) on Dirichlet
        // faces (whose data counterpart is the mass load)
        for (int i = 0; i < b.np; ++i)
          for (int c = 0; c < 2; ++c) {
            for (int m = 0; m < b.ne; ++m)
              b.mat(b.press_elem(i), b.vel_elem(c, m)) += w * pv[i] * ev[m] * n[c];
            if (tag != FaceTag::Dirichlet)
              for (int m = 0; m < b.nf; ++m)
                b.mat(b.press_elem(i), b.vel_face(lf, c, m)) -= w * pv[i] * fv[m] * n[c];
          }
      } else {
        // hybrid face-pressure mass rows: int_F (u_T - u_F).n q_F
        for (int i = 0; i < b.nfp; ++i)
          for (int c = 0; c < 2; ++c) {
            for (int m = 0; m < b.ne; ++m)
              b.mat(b.press_face(lf, i), b.vel_elem(c, m)) += w * fv[i] * ev[m] * n[c];
            for (int m = 0; m < b.nf; ++m)
              b.mat(b.press_face(lf, i), b.vel_face(lf, c, m)) -= w * fv[i] * fv[m] * n[c];
          }
      }

      if (tag == FaceTag::Dirichlet) {
        const Vec2 gd = data.g_d(fq.points[q]);
        // weak Dirichlet loads, symmetric Nitsche pairing: the consistency
        // load -g.(n.grad p(v)) and the penalty load +(eta/h) g.v_F
        for (int c = 0; c < 2; ++c) {
          for (int s = 0; s < he.n_scalar_dofs(); ++s)
            b.rhs[vel_index(s, c)] -= w * gd[c] * dn(q, s);
          for (int m = 0; m < b.nf; ++m)
            b.rhs[b.vel_face(lf, c, m)] += w * (eta / hF) * gd[c] * fv[m];
        }
        if (!hybrid_pressure) {
          // mass-equation Dirichlet load int_F (g.n) q
          for (int i = 0; i < b.np; ++i) b.rhs[b.press_elem(i)] += w * (gd.dot(n)) * pv[i];
        }
      } else if (tag == FaceTag::Neumann) {
        // g_N is the traction -n.grad(u) + p n, so it loads the residual
        // with the opposite sign of the natural boundary term
        const Vec2 gn = data.g_n(fq.points[q], n);
        for (int c = 0; c < 2; ++c)
          for (int m = 0; m < b.nf; ++m) b.rhs[b.vel_face(lf, c, m)] -= w * gn[c] * fv[m];
      }
    }
  }

  // momentum pressure columns: transpose of the mass rows, except that the
  // hybrid variant keeps the face-pressure/face-velocity coupling on
  // Dirichlet faces only in the mass equation
  for (int i = 0; i < b.n_press; ++i)
    for (int j = 0; j < b.n_vel; ++j) b.mat(j, b.n_vel + i) = b.mat(b.n_vel + i, j);
  if (hybrid_pressure) {
    for (int lf = 0; lf < b.nfaces; ++lf) {
      const int f = mesh.element_faces[e][lf].face;
      if (mesh.faces[f].tag != FaceTag::Dirichlet) continue;
      for (int i = 0; i < b.nfp; ++i)
        for (int c = 0; c < 2; ++c)
          for (int m = 0; m < b.nf; ++m)
            b.mat(b.vel_face(lf, c, m), b.press_face(lf, i)) = 0.0;
    }
  }
  return b;
}

} // namespace pstokes

#endif
