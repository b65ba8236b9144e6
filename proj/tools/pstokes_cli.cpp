// Command-line driver: mesh generation, DOF/MNZ accounting, single solves,
// convergence studies, and matrix export for the Stokes toolkit.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "pstokes/study.hpp"

namespace {

using namespace pstokes;

struct MeshSpec {
  std::string family = "trapz";
  int n = 8;
  std::string file; // overrides family:n when set
};

// accepts "family:n" (for example trapz:128)
MeshSpec parse_mesh_spec(const std::string& s) {
  MeshSpec spec;
  const auto colon = s.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("--mesh", "expected family:n, e.g. trapz:128");
  spec.family = s.substr(0, colon);
  spec.n = std::stoi(s.substr(colon + 1));
  return spec;
}

Mesh load_mesh(const MeshSpec& spec, std::uint64_t seed, Side neumann) {
  if (!spec.file.empty()) {
    Mesh m = read_mesh(spec.file);
    classify_boundary(m, neumann);
    return m;
  }
  return make_family_mesh(spec.family, spec.n, seed, neumann);
}

struct SolveOptions {
  std::string scheme = "hho-dp";
  std::string strategy = "v-cond";
  int k = 3;
  std::vector<int> levels;
  int smoother_iters = 2;
  std::string coarse_kind = "lu";
  double coarse_rtol = 1e-3;
  double outer_rtol = 0.0; // 0 = pick 1e-13 / 1e-14 from k
  int outer_maxit = 1000;
  double eta = 0.0;
  std::uint64_t seed = 1;
  std::string neumann = "right";

  LevelConfig level_config() const {
    LevelConfig cfg = LevelConfig::defaults_for(k);
    if (!levels.empty()) cfg.degrees = levels;
    cfg.smoother_iters = smoother_iters;
    if (coarse_kind == "lu") cfg.coarse = CoarseSolver::Lu;
    else if (coarse_kind == "gmres-ilu") cfg.coarse = CoarseSolver::IluGmres;
    else throw CLI::ValidationError("--coarse-kind", "expected lu or gmres-ilu");
    cfg.coarse_rtol = coarse_rtol;
    cfg.outer_rtol = outer_rtol > 0.0 ? outer_rtol : (k >= 6 ? 1e-14 : 1e-13);
    cfg.outer_maxit = outer_maxit;
    return cfg;
  }
};

// Solver knobs shared by every subcommand; dash spellings are the canonical
// (config-file friendly) names, dotted spellings stay as flag aliases.
void add_solver_options(CLI::App& app, SolveOptions& o) {
  app.add_option("--scheme", o.scheme, "hho-dp | hho-hp | dg")->capture_default_str();
  app.add_option("--strategy", o.strategy, "uncond | v-cond | vp-cond")->capture_default_str();
  app.add_option("--k", o.k, "face polynomial degree")->capture_default_str();
  app.add_option("--levels", o.levels, "level degrees, finest first (default 3,2,1 style)")
      ->delimiter(',');
  app.add_option("--smoother-iters,--smoother.iters", o.smoother_iters,
                 "GMRES smoothing iterations per sweep")
      ->capture_default_str();
  app.add_option("--coarse-kind,--coarse.kind", o.coarse_kind, "coarse solver: lu | gmres-ilu")
      ->capture_default_str();
  app.add_option("--coarse-rtol,--coarse.rtol", o.coarse_rtol, "coarse GMRES relative tolerance")
      ->capture_default_str();
  app.add_option("--outer-rtol,--outer.rtol", o.outer_rtol,
                 "outer FGMRES tolerance (default 1e-13, or 1e-14 for k >= 6)");
  app.add_option("--outer-maxit,--outer.maxit", o.outer_maxit, "outer iteration cap")
      ->capture_default_str();
  app.add_option("--eta", o.eta, "Dirichlet/BR2 penalty override (0 = scheme default)");
  app.add_option("--seed", o.seed, "mesh generation seed")->capture_default_str();
  app.add_option("--neumann-side", o.neumann, "left | right | top | bottom")
      ->capture_default_str();
}

int cmd_mesh_gen(const std::string& family, int n, double distortion, std::uint64_t seed,
                 const std::string& out) {
  Mesh m;
  if (family == "trapz") m = gen_quad_family(n, distortion, QuadKind::Trapezoidal);
  else if (family == "quad") m = gen_quad_family(n, 0.0, QuadKind::Uniform);
  else if (family == "tri") m = gen_tri_family(n, TriStyle::SplitQuad);
  else if (family == "delaunay") m = gen_tri_family(n, TriStyle::DelaunayLike, seed);
  else if (family == "graded-quad") m = gen_graded_quad(n, seed);
  else if (family == "graded-tri") m = gen_graded_tri(n, seed);
  else throw CLI::ValidationError("--family", "unknown family " + family);
  if (out.empty()) write_mesh(m, std::cout);
  else write_mesh(m, out);
  std::cerr << "mesh: " << m.n_vertices() << " vertices, " << m.n_elements() << " elements, "
            << m.n_faces() << " faces\n";
  return 0;
}

int cmd_count(const MeshSpec& spec, const SolveOptions& o, bool with_pattern) {
  const Mesh mesh = load_mesh(spec, o.seed, side_from_string(o.neumann));
  const Scheme scheme = scheme_from_string(o.scheme);
  const Strategy strategy = strategy_from_string(o.strategy);
  const DofLayout layout = make_layout(mesh, scheme, strategy, o.k);
  CountReport r = count_dofs(mesh, layout);
  if (with_pattern) {
    const StokesSystem sys =
        assemble_stokes(mesh, scheme, strategy, o.k, StokesData::zero(), o.eta);
    r.mnzs_actual = sys.a.nnz();
  }
  std::cout << "scheme " << o.scheme << " strategy " << o.strategy << " k " << o.k << "\n";
  std::cout << "elements " << mesh.n_elements() << " faces " << mesh.n_faces() << "\n";
  std::cout << "dofs " << r.dofs_actual << " (formula " << r.dofs_formula << ")\n";
  if (r.mnzs_actual >= 0) std::cout << "mnzs " << r.mnzs_actual;
  else std::cout << "mnzs not-assembled";
  std::cout << " (formula " << r.mnzs_formula << ")\n";
  std::cout << "face/elem ratio " << r.face_elem_ratio << " vs (k+d)/d = " << r.dof_threshold
            << (r.face_elem_ratio < r.dof_threshold ? "  -> face variables have fewer DOFs"
                                                    : "  -> element variables have fewer DOFs")
            << "\n";
  std::cout << "mnz ratio " << r.mnz_lhs << " vs ((k+d)/d)^2 = " << r.mnz_threshold << "\n";
  return 0;
}

int cmd_run(const MeshSpec& spec, const SolveOptions& o) {
  const Mesh mesh = load_mesh(spec, o.seed, side_from_string(o.neumann));
  const Scheme scheme = scheme_from_string(o.scheme);
  const Strategy strategy = strategy_from_string(o.strategy);
  const LevelConfig cfg = o.level_config();
  const StokesSystem sys =
      assemble_stokes(mesh, scheme, strategy, o.k, ManufacturedCase::data(), o.eta);
  const StokesSolution sol = solve_system(mesh, sys, cfg);
  const ExactFields exact{ManufacturedCase::velocity, ManufacturedCase::velocity_gradient,
                          ManufacturedCase::pressure};
  const ErrorNorms err = error_norms(mesh, scheme, o.k, sol.local, exact);
  std::cout << "cells " << mesh.n_elements() << " dofs " << sys.layout.dim() << " mnzs "
            << sys.a.nnz() << "\n";
  std::cout << "its " << sol.report.outer_its << (sol.report.converged ? "" : "*")
            << " its_coarse/vcycle "
            << (sol.report.vcycles ? double(sol.report.coarse_its) / sol.report.vcycles : 0.0)
            << " rel_residual " << sol.report.rel_residual << "\n";
  std::cout << "e_u " << err.u << " e_Gu " << err.grad_u << " e_p " << err.p << " e_Du "
            << err.div_u << "\n";
  std::cout << "t_asm_s " << sol.report.t_assembly << " t_sol_s " << sol.report.t_solve << "\n";
  return sol.report.converged ? 0 : 3;
}

int cmd_study(const std::string& family, const std::vector<int>& ns, const SolveOptions& o,
              const std::string& csv_path, bool no_timings) {
  StudyConfig cfg;
  cfg.family = family;
  if (!ns.empty()) cfg.ns = ns;
  cfg.scheme = scheme_from_string(o.scheme);
  cfg.strategy = strategy_from_string(o.strategy);
  cfg.k = o.k;
  cfg.levels = o.level_config();
  cfg.eta = o.eta;
  cfg.seed = o.seed;
  cfg.neumann_side = side_from_string(o.neumann);
  const StudyReport report = convergence_study(cfg);
  std::cout << report.markdown();
  if (!csv_path.empty()) {
    std::ofstream os(csv_path);
    os << report.csv(!no_timings);
    std::cerr << "csv written to " << csv_path << "\n";
  }
  return 0;
}

int cmd_export(const MeshSpec& spec, const SolveOptions& o, const std::string& out,
               const std::string& rhs_out) {
  const Mesh mesh = load_mesh(spec, o.seed, side_from_string(o.neumann));
  const StokesSystem sys = assemble_stokes(mesh, scheme_from_string(o.scheme),
                                           strategy_from_string(o.strategy), o.k,
                                           ManufacturedCase::data(), o.eta);
  write_matrix_market(sys.a, out);
  if (!rhs_out.empty()) {
    std::ofstream os(rhs_out);
    os.precision(17);
    for (int i = 0; i < sys.rhs.size(); ++i) os << sys.rhs[i] << "\n";
  }
  std::cerr << "matrix " << sys.a.n << "x" << sys.a.n << " with " << sys.a.nnz()
            << " nonzeros written to " << out << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D polytopal Stokes toolkit: HHO / DG discretizations with "
               "static condensation and p-multilevel preconditioned FGMRES"};
  app.set_config("--config", "", "key = value configuration file; flags override");
  app.fallthrough();
  app.require_subcommand(1);

  SolveOptions opt;
  add_solver_options(app, opt);

  // mesh gen
  auto* mesh_cmd = app.add_subcommand("mesh", "mesh utilities");
  auto* gen = mesh_cmd->add_subcommand("gen", "generate a mesh and write the pmesh2 format");
  std::string gen_family = "trapz", gen_out;
  int gen_n = 8;
  double gen_distortion = 0.1;
  gen->add_option("--family", gen_family, "trapz | quad | tri | delaunay | graded-quad | graded-tri")
      ->capture_default_str();
  gen->add_option("--n", gen_n, "cells per side")->capture_default_str();
  gen->add_option("--distortion", gen_distortion, "trapezoidal slant fraction")
      ->capture_default_str();
  gen->add_option("-o,--out", gen_out, "output path (stdout when omitted)");

  // count
  auto* count = app.add_subcommand("count", "DOF and nonzero accounting");
  std::string count_mesh = "trapz:128", count_mesh_file;
  bool count_pattern = false;
  count->add_option("--mesh", count_mesh, "family:n")->capture_default_str();
  count->add_option("--mesh-file", count_mesh_file, "read a pmesh2 file instead");
  count->add_flag("--pattern", count_pattern, "assemble the pattern for the measured MNZ count");

  // run
  auto* run = app.add_subcommand("run", "single manufactured-solution solve");
  std::string run_mesh = "trapz:8", run_mesh_file;
  run->add_option("--mesh", run_mesh, "family:n")->capture_default_str();
  run->add_option("--mesh-file", run_mesh_file, "read a pmesh2 file instead");

  // study
  auto* study = app.add_subcommand("study", "refinement sweep with rates and solver counters");
  std::string study_family = "trapz", study_csv;
  std::vector<int> study_ns;
  bool study_no_timings = false;
  study->add_option("--family", study_family, "mesh family")->capture_default_str();
  study->add_option("--ns", study_ns, "cells-per-side sequence, e.g. 2,4,8,16,32")
      ->delimiter(',');
  study->add_option("--csv", study_csv, "also write the table as CSV");
  study->add_flag("--no-timings", study_no_timings, "omit timing columns from the CSV");

  // export-matrix
  auto* exp = app.add_subcommand("export-matrix", "assemble and export in coordinate format");
  std::string exp_mesh = "trapz:8", exp_mesh_file, exp_out = "matrix.mtx", exp_rhs;
  exp->add_option("--mesh", exp_mesh, "family:n")->capture_default_str();
  exp->add_option("--mesh-file", exp_mesh_file, "read a pmesh2 file instead");
  exp->add_option("-o,--out", exp_out, "matrix output path")->capture_default_str();
  exp->add_option("--rhs", exp_rhs, "also write the right-hand side");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_mesh_gen(gen_family, gen_n, gen_distortion, opt.seed, gen_out);
    if (count->parsed()) {
      MeshSpec spec = parse_mesh_spec(count_mesh);
      spec.file = count_mesh_file;
      return cmd_count(spec, opt, count_pattern);
    }
    if (run->parsed()) {
      MeshSpec spec = parse_mesh_spec(run_mesh);
      spec.file = run_mesh_file;
      return cmd_run(spec, opt);
    }
    if (study->parsed())
      return cmd_study(study_family, study_ns, opt, study_csv, study_no_timings);
    if (exp->parsed()) {
      MeshSpec spec = parse_mesh_spec(exp_mesh);
      spec.file = exp_mesh_file;
      return cmd_export(spec, opt, exp_rhs.empty() && exp_out.empty() ? "matrix.mtx" : exp_out,
                        exp_rhs);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << app.help();
  return 1;
}
