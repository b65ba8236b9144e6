// Convergence-rate and solver-performance studies over the mesh families:
// runs a refinement sequence at fixed scheme/strategy/degree, computes rates
// between consecutive meshes, and renders CSV / aligned-markdown tables.

#ifndef PSTOKES_STUDY_HPP
#define PSTOKES_STUDY_HPP

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pstokes/errors.hpp"
#include "pstokes/plevels.hpp"

namespace pstokes {

inline Mesh make_family_mesh(const std::string& family, int n, std::uint64_t seed,
                             Side neumann_side) {
  Mesh m;
  if (family == "trapz") m = gen_quad_family(n, 0.1, QuadKind::Trapezoidal);
  else if (family == "quad") m = gen_quad_family(n, 0.0, QuadKind::Uniform);
  else if (family == "tri") m = gen_tri_family(n, TriStyle::SplitQuad);
  else if (family == "delaunay") m = gen_tri_family(n, TriStyle::DelaunayLike, seed);
  else if (family == "graded-quad") m = gen_graded_quad(n, seed);
  else if (family == "graded-tri") m = gen_graded_tri(n, seed);
  else throw std::invalid_argument("unknown mesh family '" + family + "'");
  classify_boundary(m, neumann_side);
  return m;
}

inline bool family_is_graded(const std::string& family) {
  return family.rfind("graded", 0) == 0;
}

struct StudyConfig {
  std::string family = "trapz";
  std::vector<int> ns = {2, 4, 8, 16, 32};
  Scheme scheme = Scheme::HhoDp;
  Strategy strategy = Strategy::VCond;
  int k = 3;
  LevelConfig levels = LevelConfig::defaults_for(3);
  double eta = 0.0; // 0 = scheme default
  std::uint64_t seed = 1;
  Side neumann_side = Side::Right;
};

struct StudyRow {
  int n = 0;
  int cells = 0;
  double h = 0.0; // max h_T, or card(T_h)^{-1/2} on graded families
  ErrorNorms err;
  double rate_u = std::numeric_limits<double>::quiet_NaN();
  double rate_gu = std::numeric_limits<double>::quiet_NaN();
  double rate_p = std::numeric_limits<double>::quiet_NaN();
  int its = 0;
  double its_coarse = 0.0; // coarse iterations per V-cycle (1 = direct)
  bool converged = true;
  std::int64_t dofs = 0, mnzs = 0;
  double t_asm = 0.0, t_sol = 0.0;
};

struct StudyReport {
  StudyConfig config;
  std::vector<StudyRow> rows;

  std::string csv(bool with_timings = true) const;
  std::string markdown() const;
};

/// Rates are suppressed when either error sits at roundoff level relative to
/// the solution scale (the manufactured fields are O(1) on this domain).
inline double rate_between(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  const double floor = 1e2 * std::numeric_limits<double>::epsilon();
  if (!(e_coarse > floor) || !(e_fine > floor)) return std::numeric_limits<double>::quiet_NaN();
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

inline StudyReport convergence_study(const StudyConfig& cfg) {
  StudyReport report;
  report.config = cfg;
  const StokesData data = ManufacturedCase::data();
  const ExactFields exact{ManufacturedCase::velocity, ManufacturedCase::velocity_gradient,
                          ManufacturedCase::pressure};
  for (int n : cfg.ns) {
    StudyRow row;
    row.n = n;
    const Mesh mesh = make_family_mesh(cfg.family, n, cfg.seed, cfg.neumann_side);
    row.cells = mesh.n_elements();
    if (family_is_graded(cfg.family)) {
      row.h = 1.0 / std::sqrt(static_cast<double>(mesh.n_elements()));
    } else {
      for (int e = 0; e < mesh.n_elements(); ++e)
        row.h = std::max(row.h, mesh.element_diameter(e));
    }
    try {
      const StokesSystem sys =
          assemble_stokes(mesh, cfg.scheme, cfg.strategy, cfg.k, data, cfg.eta);
      row.dofs = sys.layout.dim();
      row.mnzs = sys.a.nnz();
      const StokesSolution sol = solve_system(mesh, sys, cfg.levels);
      row.its = sol.report.outer_its;
      row.converged = sol.report.converged;
      row.its_coarse =
          sol.report.vcycles > 0 ? double(sol.report.coarse_its) / sol.report.vcycles : 0.0;
      row.t_asm = sol.report.t_assembly;
      row.t_sol = sol.report.t_solve;
      row.err = error_norms(mesh, cfg.scheme, cfg.k, sol.local, exact);
    } catch (const std::exception& e) {
      // record the failure in-row and continue the sweep
      row.converged = false;
      row.err = {std::numeric_limits<double>::quiet_NaN(),
                 std::numeric_limits<double>::quiet_NaN(),
                 std::numeric_limits<double>::quiet_NaN(),
                 std::numeric_limits<double>::quiet_NaN()};
    }
    if (!report.rows.empty()) {
      const StudyRow& prev = report.rows.back();
      row.rate_u = rate_between(prev.err.u, row.err.u, prev.h, row.h);
      row.rate_gu = rate_between(prev.err.grad_u, row.err.grad_u, prev.h, row.h);
      row.rate_p = rate_between(prev.err.p, row.err.p, prev.h, row.h);
    }
    report.rows.push_back(row);
  }
  return report;
}

namespace detail {

inline std::string fmt_sci(double v) {
  if (std::isnan(v)) return "-";
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

inline std::string fmt_rate(double v) {
  if (std::isnan(v)) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

} // namespace detail

inline std::string StudyReport::csv(bool with_timings) const {
  std::ostringstream os;
  os << "cells,e_u,e_Gu,e_p,e_Du,rate_u,rate_Gu,rate_p,its,its_coarse,dofs,mnzs";
  if (with_timings) os << ",t_asm_s,t_sol_s";
  os << "\n";
  for (const auto& r : rows) {
    os << r.cells << ',' << detail::fmt_sci(r.err.u) << ',' << detail::fmt_sci(r.err.grad_u)
       << ',' << detail::fmt_sci(r.err.p) << ',' << detail::fmt_sci(r.err.div_u) << ','
       << detail::fmt_rate(r.rate_u) << ',' << detail::fmt_rate(r.rate_gu) << ','
       << detail::fmt_rate(r.rate_p) << ',' << r.its << (r.converged ? "" : "*") << ','
       << detail::fmt_rate(r.its_coarse) << ',' << r.dofs << ',' << r.mnzs;
    if (with_timings) {
      std::ostringstream ts;
      ts << std::scientific << std::setprecision(3) << r.t_asm << ',' << r.t_sol;
      os << ',' << ts.str();
    }
    os << "\n";
  }
  return os.str();
}

inline std::string StudyReport::markdown() const {
  const std::vector<std::string> hdr = {"cells", "e_u",   "e_Gu",       "e_p",  "e_Du",
                                        "rate_u", "rate_Gu", "rate_p", "ITs",  "ITs_L",
                                        "DOFs",  "MNZs"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows)
    cells.push_back({std::to_string(r.cells), detail::fmt_sci(r.err.u),
                     detail::fmt_sci(r.err.grad_u), detail::fmt_sci(r.err.p),
                     detail::fmt_sci(r.err.div_u), detail::fmt_rate(r.rate_u),
                     detail::fmt_rate(r.rate_gu), detail::fmt_rate(r.rate_p),
                     std::to_string(r.its) + (r.converged ? "" : "*"),
                     detail::fmt_rate(r.its_coarse), std::to_string(r.dofs),
                     std::to_string(r.mnzs)});
  std::vector<std::size_t> w(hdr.size());
  for (std::size_t c = 0; c < hdr.size(); ++c) {
    w[c] = hdr[c].size();
    for (const auto& row : cells) w[c] = std::max(w[c], row[c].size());
  }
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& row) {
    os << "|";
    for (std::size_t c = 0; c < row.size(); ++c)
      os << ' ' << std::setw(static_cast<int>(w[c])) << row[c] << " |";
    os << "\n";
  };
  os << std::left;
  line(hdr);
  os << "|";
  for (std::size_t c = 0; c < hdr.size(); ++c) os << std::string(w[c] + 2, '-') << "|";
  os << "\n";
  os << std::right;
  for (const auto& row : cells) line(row);
  return os.str();
}

} // namespace pstokes

#endif
