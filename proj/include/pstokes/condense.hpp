// Static condensation of element-local Stokes blocks: elimination of element
// velocity unknowns alone (v-cond), together with non-constant pressure
// modes (vp-cond), or of all element unknowns for the hybrid-pressure
// scheme. The recovery data kept per element reconstructs the eliminated
// unknowns exactly from the retained ones.

#ifndef PSTOKES_CONDENSE_HPP
#define PSTOKES_CONDENSE_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "pstokes/dof_layout.hpp"
#include "pstokes/hho_local.hpp"

namespace pstokes {

struct ElementCondensation {
  std::vector<int> keep, elim;    // local dof indices
  Eigen::MatrixXd schur;          // keep x keep
  Eigen::VectorXd reduced_rhs;    // keep
  Eigen::MatrixXd elim_coupling;  // elim x keep, A_ee^{-1} A_ek
  Eigen::VectorXd elim_rhs;       // A_ee^{-1} b_e

  /// Back-substitution: rebuilds the full local vector from retained
  /// values.
  Eigen::VectorXd recover(const Eigen::VectorXd& kept_values) const {
    if (kept_values.size() != static_cast<Eigen::Index>(keep.size()))
      throw std::invalid_argument("recover: retained vector size mismatch");
    Eigen::VectorXd full(keep.size() + elim.size());
    for (std::size_t i = 0; i < keep.size(); ++i) full[keep[i]] = kept_values[i];
    if (!elim.empty()) {
      const Eigen::VectorXd xe = elim_rhs - elim_coupling * kept_values;
      for (std::size_t i = 0; i < elim.size(); ++i) full[elim[i]] = xe[i];
    }
    return full;
  }
};

/// Local dof indices eliminated by a strategy given the block bookkeeping of
/// build_hho_local. The orthonormal modal pressure basis guarantees that
/// mode 0 is the element mean, so vp-cond keeps exactly that mode.
inline std::vector<int> eliminated_dofs(const HhoLocalBlocks& b, Scheme scheme,
                                        Strategy strategy) {
  std::vector<int> elim;
  if (strategy == Strategy::Uncond) return elim;
  for (int c = 0; c < 2; ++c)
    for (int m = 0; m < b.ne; ++m) elim.push_back(b.vel_elem(c, m));
  if (strategy == Strategy::VpCond) {
    const int first = scheme == Scheme::HhoHp ? 0 : 1;
    for (int m = first; m < b.np; ++m) elim.push_back(b.press_elem(m));
  }
  return elim;
}

inline ElementCondensation condense_element(const Eigen::MatrixXd& mat,
                                            const Eigen::VectorXd& rhs,
                                            const std::vector<int>& elim, int element,
                                            const std::string& strategy_name = "") {
  const int n = static_cast<int>(mat.rows());
  ElementCondensation c;
  c.elim = elim;
  std::vector<char> is_elim(n, 0);
  for (int i : elim) is_elim[i] = 1;
  for (int i = 0; i < n; ++i)
    if (!is_elim[i]) c.keep.push_back(i);
  const int nk = static_cast<int>(c.keep.size());
  const int ne = static_cast<int>(c.elim.size());
  if (ne == 0) {
    c.schur = mat;
    c.reduced_rhs = rhs;
    return c;
  }
  Eigen::MatrixXd akk(nk, nk), ake(nk, ne), aek(ne, nk), aee(ne, ne);
  for (int i = 0; i < nk; ++i) {
    for (int j = 0; j < nk; ++j) akk(i, j) = mat(c.keep[i], c.keep[j]);
    for (int j = 0; j < ne; ++j) ake(i, j) = mat(c.keep[i], c.elim[j]);
  }
  for (int i = 0; i < ne; ++i) {
    for (int j = 0; j < nk; ++j) aek(i, j) = mat(c.elim[i], c.keep[j]);
    for (int j = 0; j < ne; ++j) aee(i, j) = mat(c.elim[i], c.elim[j]);
  }
  Eigen::VectorXd bk(nk), be(ne);
  for (int i = 0; i < nk; ++i) bk[i] = rhs[c.keep[i]];
  for (int i = 0; i < ne; ++i) be[i] = rhs[c.elim[i]];

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(aee);
  if (lu.rcond() < 1e-14)
    throw std::runtime_error("condense (" + strategy_name + "): near-singular eliminated block on element " +
                             std::to_string(element));
  c.elim_coupling = lu.solve(aek);
  c.elim_rhs = lu.solve(be);
  c.schur = akk - ake * c.elim_coupling;
  c.reduced_rhs = bk - ake * c.elim_rhs;
  return c;
}

/// Block-pattern report of one condensed element: counts exact nonzeros and
/// verifies whether the pure face-velocity sub-block stayed block-diagonal
/// across components (it does for v-cond, it fills up for vp-cond).
struct SparsitySignature {
  int n_retained = 0;
  int nnz = 0;
  int cross_component_nnz = 0; // within the face-velocity sub-block
};

inline SparsitySignature sparsity_signature(const ElementCondensation& c,
                                            const HhoLocalBlocks& b) {
  SparsitySignature s;
  s.n_retained = static_cast<int>(c.keep.size());
  auto comp_of = [&](int local) -> int {
    for (int lf = 0; lf < b.nfaces; ++lf)
      for (int comp = 0; comp < 2; ++comp)
        for (int m = 0; m < b.nf; ++m)
          if (local == b.vel_face(lf, comp, m)) return comp;
    return -1;
  };
  std::vector<int> comp(c.keep.size());
  for (std::size_t i = 0; i < c.keep.size(); ++i) comp[i] = comp_of(c.keep[i]);
  for (int i = 0; i < s.n_retained; ++i)
    for (int j = 0; j < s.n_retained; ++j) {
      if (c.schur(i, j) == 0.0) continue;
      ++s.nnz;
      if (comp[i] >= 0 && comp[j] >= 0 && comp[i] != comp[j]) ++s.cross_component_nnz;
    }
  return s;
}

} // namespace pstokes

#endif
