// Global assembly: builds the sparsity pattern from the mesh topology and
// the layout's structural rules, condenses each element, and scatters the
// retained blocks. Pressure rows without structural diagonal entries keep an
// explicit zero there so incomplete factorizations can pivot.

#ifndef PSTOKES_ASSEMBLE_HPP
#define PSTOKES_ASSEMBLE_HPP

#include <chrono>
#include <iostream>
#include <memory>
#include <vector>

#include "pstokes/condense.hpp"
#include "pstokes/csr.hpp"
#include "pstokes/dg_local.hpp"
#include "pstokes/dof_layout.hpp"
#include "pstokes/hho_local.hpp"

namespace pstokes {

/// Kind of a retained global dof: velocity component 0/1 or pressure (2).
enum : int { kDofVx = 0, kDofVy = 1, kDofP = 2 };

inline int dof_kind(const DofLayout& l, std::int64_t g) {
  const std::int64_t fsz = std::int64_t(l.n_faces) * l.face_block();
  int within;
  int nvel;
  if (g < fsz) {
    within = static_cast<int>(g % l.face_block());
    nvel = l.face_vel;
  } else {
    within = static_cast<int>((g - fsz) % l.elem_block());
    nvel = l.elem_vel;
  }
  if (within < nvel) return kDofVx;
  if (within < 2 * nvel) return kDofVy;
  return kDofP;
}

inline bool structurally_coupled(const DofLayout& l, int ka, int kb) {
  const bool a_vel = ka != kDofP, b_vel = kb != kDofP;
  if (a_vel && b_vel && ka != kb) return l.couples_components();
  if (!a_vel && !b_vel) return l.couples_pressures();
  return true;
}

struct StokesSystem {
  DofLayout layout;
  CsrMatrix a;
  Eigen::VectorXd rhs;
  std::vector<ElementCondensation> recovery;          // per element
  std::vector<std::vector<std::int64_t>> kept_global; // retained global dof per element
  double t_assembly = 0.0;

  /// Full local dof vectors (build_hho_local / DG per-element order)
  /// recovered from a retained global solution.
  std::vector<Eigen::VectorXd> recover_solution(const Eigen::VectorXd& x) const {
    std::vector<Eigen::VectorXd> sol(recovery.size());
    for (std::size_t e = 0; e < recovery.size(); ++e) {
      Eigen::VectorXd kept(kept_global[e].size());
      for (std::size_t i = 0; i < kept_global[e].size(); ++i) kept[i] = x[kept_global[e][i]];
      sol[e] = recovery[e].recover(kept);
    }
    return sol;
  }
};

namespace detail {

/// Retained global indices of one element in local keep order.
inline std::vector<std::int64_t> hho_kept_global(const Mesh& mesh, const DofLayout& l,
                                                 const HhoLocalBlocks& b, int e,
                                                 const std::vector<int>& keep) {
  // map every full-local dof to its global id (-1 when eliminated)
  std::vector<std::int64_t> full(b.size(), -1);
  const auto& fus = mesh.element_faces[e];
  for (int lf = 0; lf < b.nfaces; ++lf) {
    const std::int64_t base = l.face_offset(fus[lf].face);
    for (int c = 0; c < 2; ++c)
      for (int m = 0; m < b.nf; ++m) full[b.vel_face(lf, c, m)] = base + c * l.face_vel + m;
    for (int m = 0; m < b.nfp; ++m) full[b.press_face(lf, m)] = base + 2 * l.face_vel + m;
  }
  const std::int64_t ebase = l.elem_offset(e);
  for (int c = 0; c < 2; ++c)
    for (int m = 0; m < l.elem_vel; ++m) full[b.vel_elem(c, m)] = ebase + c * l.elem_vel + m;
  for (int m = 0; m < l.elem_press; ++m) full[b.press_elem(m)] = ebase + 2 * l.elem_vel + m;

  std::vector<std::int64_t> kept(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    kept[i] = full[keep[i]];
    if (kept[i] < 0)
      throw std::runtime_error("assemble: retained local dof has no global index");
  }
  return kept;
}

inline void add_pattern_block(std::vector<std::vector<int>>& rows, const DofLayout& l,
                              const std::vector<std::int64_t>& gdofs) {
  std::vector<int> kinds(gdofs.size());
  for (std::size_t i = 0; i < gdofs.size(); ++i) kinds[i] = dof_kind(l, gdofs[i]);
  for (std::size_t i = 0; i < gdofs.size(); ++i)
    for (std::size_t j = 0; j < gdofs.size(); ++j)
      if (gdofs[i] == gdofs[j] || structurally_coupled(l, kinds[i], kinds[j]))
        rows[gdofs[i]].push_back(static_cast<int>(gdofs[j]));
}

inline void add_pattern_cross(std::vector<std::vector<int>>& rows, const DofLayout& l,
                              const std::vector<std::int64_t>& ga,
                              const std::vector<std::int64_t>& gb) {
  for (std::size_t i = 0; i < ga.size(); ++i) {
    const int ki = dof_kind(l, ga[i]);
    for (std::size_t j = 0; j < gb.size(); ++j)
      if (structurally_coupled(l, ki, dof_kind(l, gb[j]))) {
        rows[ga[i]].push_back(static_cast<int>(gb[j]));
        rows[gb[j]].push_back(static_cast<int>(ga[i]));
      }
  }
}

inline void scatter_block(CsrMatrix& a, const DofLayout& l,
                          const std::vector<std::int64_t>& gdofs, const Eigen::MatrixXd& m) {
  std::vector<int> kinds(gdofs.size());
  for (std::size_t i = 0; i < gdofs.size(); ++i) kinds[i] = dof_kind(l, gdofs[i]);
  for (std::size_t i = 0; i < gdofs.size(); ++i)
    for (std::size_t j = 0; j < gdofs.size(); ++j) {
      if (gdofs[i] != gdofs[j] && !structurally_coupled(l, kinds[i], kinds[j])) continue;
      if (m(i, j) != 0.0 || gdofs[i] == gdofs[j])
        a.add(static_cast<int>(gdofs[i]), static_cast<int>(gdofs[j]), m(i, j));
    }
}

} // namespace detail

/// Assembles the HHO global system (either pressure variant, any strategy).
inline StokesSystem assemble_hho(const Mesh& mesh, Scheme scheme, Strategy strategy, int k,
                                 double eta, const StokesData& data) {
  const auto t0 = std::chrono::steady_clock::now();
  StokesSystem sys;
  sys.layout = make_layout(mesh, scheme, strategy, k);
  const DofLayout& l = sys.layout;
  const bool hybrid = scheme == Scheme::HhoHp;
  const int k_elem = element_degree(scheme, k);

  sys.recovery.resize(mesh.n_elements());
  sys.kept_global.resize(mesh.n_elements());
  std::vector<std::vector<int>> pattern(l.dim());
  std::vector<Eigen::VectorXd> reduced_rhs(mesh.n_elements());

  for (int e = 0; e < mesh.n_elements(); ++e) {
    HhoElement he(mesh, e, k, k_elem);
    HhoLocalBlocks b = build_hho_local(he, hybrid, eta, data);
    auto elim = eliminated_dofs(b, scheme, strategy);
    sys.recovery[e] = condense_element(b.mat, b.rhs, elim, e, to_string(strategy));
    sys.kept_global[e] = detail::hho_kept_global(mesh, l, b, e, sys.recovery[e].keep);
    reduced_rhs[e] = sys.recovery[e].reduced_rhs;
    detail::add_pattern_block(pattern, l, sys.kept_global[e]);
  }
  for (std::int64_t i = 0; i < l.dim(); ++i) pattern[i].push_back(static_cast<int>(i));
  sys.a = CsrMatrix::from_pattern(pattern);
  pattern.clear();
  pattern.shrink_to_fit();

  sys.rhs = Eigen::VectorXd::Zero(l.dim());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    detail::scatter_block(sys.a, l, sys.kept_global[e], sys.recovery[e].schur);
    for (std::size_t i = 0; i < sys.kept_global[e].size(); ++i)
      sys.rhs[sys.kept_global[e][i]] += reduced_rhs[e][i];
  }
  sys.t_assembly = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sys;
}

/// Assembles the DG global system: per-element volume terms plus symmetric
/// BR2 viscous coupling, average pressure fluxes, and interior pressure-jump
/// stabilization across faces.
inline StokesSystem assemble_dg(const Mesh& mesh, int k, const StokesData& data,
                                double eta_override = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  StokesSystem sys;
  sys.layout = make_layout(mesh, Scheme::Dg, Strategy::Uncond, k);
  const DofLayout& l = sys.layout;
  const int quad_degree = 2 * (k + 1) + 1;
  const int ne = dim_P2(k);
  const int nloc = 3 * ne;

  std::vector<std::unique_ptr<DgElement>> elems(mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e)
    elems[e] = std::make_unique<DgElement>(mesh, e, k, quad_degree);

  auto gdofs_of = [&](int e) {
    std::vector<std::int64_t> g(nloc);
    const std::int64_t base = l.elem_offset(e);
    for (int i = 0; i < nloc; ++i) g[i] = base + i;
    return g;
  };
  auto vel = [&](int c, int m) { return c * ne + m; };
  auto prs = [&](int m) { return 2 * ne + m; };

  std::vector<std::vector<int>> pattern(l.dim());
  for (int e = 0; e < mesh.n_elements(); ++e) detail::add_pattern_block(pattern, l, gdofs_of(e));
  for (int f = 0; f < mesh.n_faces(); ++f)
    if (!mesh.is_boundary_face(f))
      detail::add_pattern_cross(pattern, l, gdofs_of(mesh.faces[f].left),
                                gdofs_of(mesh.faces[f].right));
  sys.a = CsrMatrix::from_pattern(pattern);
  pattern.clear();
  pattern.shrink_to_fit();
  sys.rhs = Eigen::VectorXd::Zero(l.dim());

  // volume terms: grad-grad per component, -int p div v, -int div(u) q, loads
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const DgElement& de = *elems[e];
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nloc, nloc);
    for (int c = 0; c < 2; ++c) {
      m.block(c * ne, c * ne, ne, ne) += de.stiffness();
      // mass rows are assembled in the classical stabilized orientation,
      // +div(u) flux against the -div(v) momentum coupling, so the
      // pressure-jump stabilization enters positively
      m.block(2 * ne, c * ne, ne, ne) += de.div(c);
      m.block(c * ne, 2 * ne, ne, ne) -= de.div(c).transpose(); // momentum column
    }
    detail::scatter_block(sys.a, l, gdofs_of(e), m);
    const QuadratureRule& eq = de.basis().quadrature();
    for (int q = 0; q < eq.size(); ++q) {
      const Vec2 fv = data.f(eq.points[q]);
      const Eigen::VectorXd v = de.basis().eval(eq.points[q]);
      for (int c = 0; c < 2; ++c)
        for (int i = 0; i < ne; ++i)
          sys.rhs[l.elem_offset(e) + vel(c, i)] += eq.weights[q] * fv[c] * v[i];
    }
  }

  // face terms
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& fc = mesh.faces[f];
    const QuadratureRule fq = make_face_quadrature(mesh, f, quad_degree);
    const int nq = fq.size();
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(fq.weights.data(), nq);
    const Vec2 n = mesh.face_normal(f); // out of fc.left
    const double hF = mesh.face_length(f);
    const double bound = dg_penalty_bound(mesh, f);
    const double eta = eta_override > 0.0 ? eta_override : bound + 1.0;
    if (eta <= bound)
      std::cerr << "dg: warning: penalty " << eta << " on face " << f
                << " does not exceed the stability bound " << bound << "\n";

    const DgElement& d1 = *elems[fc.left];
    const Eigen::MatrixXd psi1 = d1.basis().values_at(fq.points);
    Eigen::MatrixXd dn1(nq, ne);
    for (int q = 0; q < nq; ++q) dn1.row(q) = (d1.basis().eval_grad(fq.points[q]) * n).transpose();
    const Eigen::MatrixXd m1 = 0.5 * psi1.transpose() * w.asDiagonal(); // lifting moments, left

    if (fc.tag == FaceTag::Neumann) {
      for (int q = 0; q < nq; ++q) {
        // traction data -n.grad(u) + p n loads with a minus sign
        const Vec2 gn = data.g_n(fq.points[q], n);
        for (int c = 0; c < 2; ++c)
          for (int i = 0; i < ne; ++i)
            sys.rhs[l.elem_offset(fc.left) + vel(c, i)] -= fq.weights[q] * gn[c] * psi1(q, i);
      }
      continue;
    }

    if (fc.right < 0) {
      // Dirichlet face: the lifted jump is 2(u_T - g), giving unit-factor
      // symmetric consistency terms and a penalty 4 eta <L(u), L(v)>
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nloc, nloc);
      const Eigen::MatrixXd cons = psi1.transpose() * w.asDiagonal() * dn1; // int (n.grad u) v
      const Eigen::MatrixXd lift1 = m1 * psi1; // lifting coefficients of each trace
      const Eigen::MatrixXd pen = 4.0 * eta * lift1.transpose() * lift1;
      const Eigen::MatrixXd pflux = psi1.transpose() * w.asDiagonal() * psi1;
      for (int c = 0; c < 2; ++c) {
        m.block(c * ne, c * ne, ne, ne) += pen - cons - cons.transpose();
        // momentum pressure flux: the boundary average is the trace itself
        m.block(c * ne, 2 * ne, ne, ne) += n[c] * pflux;
      }
      detail::scatter_block(sys.a, l, gdofs_of(fc.left), m);
      for (int c = 0; c < 2; ++c) {
        Eigen::VectorXd gvals(nq);
        for (int q = 0; q < nq; ++q) gvals[q] = data.g_d(fq.points[q])[c];
        // consistency load -int (n.grad v) g plus penalty load 4 eta <L(g), L(v)>
        Eigen::VectorXd load = -(dn1.transpose() * w.asDiagonal() * gvals);
        load += 4.0 * eta * lift1.transpose() * (m1 * gvals);
        for (int i = 0; i < ne; ++i) sys.rhs[l.elem_offset(fc.left) + vel(c, i)] += load[i];
      }
      continue;
    }

    // interior face: scalar jump/average tables over stacked dofs [left|right]
    const DgElement& d2 = *elems[fc.right];
    const Eigen::MatrixXd psi2 = d2.basis().values_at(fq.points);
    Eigen::MatrixXd dn2(nq, ne);
    for (int q = 0; q < nq; ++q) dn2.row(q) = (d2.basis().eval_grad(fq.points[q]) * n).transpose();
    const Eigen::MatrixXd m2 = 0.5 * psi2.transpose() * w.asDiagonal();

    Eigen::MatrixXd jmp(nq, 2 * ne), avg_dn(nq, 2 * ne), avg(nq, 2 * ne), plain(nq, 2 * ne);
    jmp << psi1, -psi2;
    avg_dn << 0.5 * dn1, 0.5 * dn2;
    avg << 0.5 * psi1, 0.5 * psi2;
    plain << psi1, psi2;

    const Eigen::MatrixXd cons = jmp.transpose() * w.asDiagonal() * avg_dn; // rows v, cols u
    const Eigen::MatrixXd pen =
        eta * ((m1 * jmp).transpose() * (m1 * jmp) + (m2 * jmp).transpose() * (m2 * jmp));
    const Eigen::MatrixXd visc = pen - cons - cons.transpose(); // per velocity component

    const Eigen::MatrixXd vmom = jmp.transpose() * w.asDiagonal() * avg;          // {p} v.n flux
    const Eigen::MatrixXd mass = 0.5 * plain.transpose() * w.asDiagonal() * jmp;  // (u_T-{u}).n q
    const Eigen::MatrixXd pjump = hF * (jmp.transpose() * w.asDiagonal() * jmp);  // [p][q]

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * nloc, 2 * nloc);
    auto sdof = [&](int side, int c, int i) { return side * nloc + c * ne + i; };
    auto spr = [&](int side, int i) { return side * nloc + 2 * ne + i; };
    for (int s1 = 0; s1 < 2; ++s1)
      for (int i = 0; i < ne; ++i)
        for (int s2 = 0; s2 < 2; ++s2)
          for (int j = 0; j < ne; ++j) {
            const int a = s1 * ne + i, bcol = s2 * ne + j;
            for (int c = 0; c < 2; ++c) {
              m(sdof(s1, c, i), sdof(s2, c, j)) += visc(a, bcol);
              m(sdof(s1, c, i), spr(s2, j)) += n[c] * vmom(a, bcol);
              m(spr(s1, i), sdof(s2, c, j)) -= n[c] * mass(a, bcol);
            }
            m(spr(s1, i), spr(s2, j)) += pjump(a, bcol);
          }

    std::vector<std::int64_t> g(2 * nloc);
    const auto gl = gdofs_of(fc.left), gr = gdofs_of(fc.right);
    std::copy(gl.begin(), gl.end(), g.begin());
    std::copy(gr.begin(), gr.end(), g.begin() + nloc);
    detail::scatter_block(sys.a, l, g, m);
  }

  sys.recovery.resize(mesh.n_elements());
  sys.kept_global.resize(mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    auto g = gdofs_of(e);
    sys.kept_global[e] = g;
    ElementCondensation c;
    for (int i = 0; i < nloc; ++i) c.keep.push_back(i);
    sys.recovery[e] = std::move(c);
  }
  sys.t_assembly = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sys;
}

inline StokesSystem assemble_stokes(const Mesh& mesh, Scheme scheme, Strategy strategy, int k,
                                    const StokesData& data, double eta = 0.0) {
  if (scheme == Scheme::Dg) return assemble_dg(mesh, k, data, eta);
  return assemble_hho(mesh, scheme, strategy, k, eta > 0.0 ? eta : default_dirichlet_penalty(k),
                      data);
}

} // namespace pstokes

#endif
