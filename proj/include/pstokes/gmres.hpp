// Right-preconditioned GMRES without restarts and its flexible variant.
// GMRES keeps a fixed preconditioner and stops on the Arnoldi residual
// estimate; FGMRES admits a preconditioner that changes between iterations
// (one multigrid V-cycle here) and declares convergence only on the true
// unpreconditioned relative residual.

#ifndef PSTOKES_GMRES_HPP
#define PSTOKES_GMRES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace pstokes {

using ApplyFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct SolverReport {
  int outer_its = 0;
  long long coarse_its = 0; // summed over all V-cycle applications
  int vcycles = 0;
  double rel_residual = 0.0;
  bool converged = false;
  double t_assembly = 0.0;
  double t_solve = 0.0;
};

struct KrylovResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

namespace detail {

struct ArnoldiWorkspace {
  std::vector<Eigen::VectorXd> v, z;
  Eigen::MatrixXd h;
  Eigen::VectorXd g, cs, sn;
  double last_subdiag = 0.0; // pre-rotation h(j+1,j), flags happy breakdown

  void init(int n, int m, const Eigen::VectorXd& r0, double beta) {
    v.clear();
    z.clear();
    v.reserve(m + 1);
    z.reserve(m);
    v.push_back(r0 / beta);
    h = Eigen::MatrixXd::Zero(m + 1, m);
    g = Eigen::VectorXd::Zero(m + 1);
    g[0] = beta;
    cs = Eigen::VectorXd::Zero(m);
    sn = Eigen::VectorXd::Zero(m);
  }

  /// One Arnoldi step with w = A z_j already computed; returns the residual
  /// estimate |g_{j+1}| after the Givens update.
  double step(int j, Eigen::VectorXd w) {
    for (int i = 0; i <= j; ++i) {
      h(i, j) = w.dot(v[i]);
      w -= h(i, j) * v[i];
    }
    h(j + 1, j) = w.norm();
    last_subdiag = h(j + 1, j);
    if (h(j + 1, j) > 0.0) v.push_back(w / h(j + 1, j));
    else v.push_back(Eigen::VectorXd::Zero(w.size())); // happy breakdown
    for (int i = 0; i < j; ++i) {
      const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
      h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
      h(i, j) = t;
    }
    const double denom = std::hypot(h(j, j), h(j + 1, j));
    cs[j] = denom == 0.0 ? 1.0 : h(j, j) / denom;
    sn[j] = denom == 0.0 ? 0.0 : h(j + 1, j) / denom;
    h(j, j) = denom;
    h(j + 1, j) = 0.0;
    g[j + 1] = -sn[j] * g[j];
    g[j] = cs[j] * g[j];
    return std::abs(g[j + 1]);
  }

  /// x0 + Z y with y from the triangular solve over the first `m` columns.
  Eigen::VectorXd solution(const Eigen::VectorXd& x0, int m) const {
    Eigen::VectorXd y = h.topLeftCorner(m, m)
                            .triangularView<Eigen::Upper>()
                            .solve(g.head(m));
    Eigen::VectorXd x = x0;
    for (int i = 0; i < m; ++i) x += y[i] * z[i];
    return x;
  }
};

} // namespace detail

enum class PrecondSide { Right, Left };

/// Preconditioned GMRES, Krylov dimension bounded by max_it (no restart).
/// Right preconditioning (the default) stops on the Arnoldi estimate of the
/// true residual; the left-preconditioned variant runs on M^{-1}A and its
/// estimate tracks the preconditioned residual instead. rtol = 0 runs
/// exactly max_it iterations, which is the fixed-iteration smoother mode.
inline KrylovResult gmres(const ApplyFn& op, const ApplyFn& precond,
                          const Eigen::VectorXd& rhs, const Eigen::VectorXd& x0,
                          int max_it, double rtol,
                          PrecondSide side = PrecondSide::Right) {
  if (side == PrecondSide::Left && precond) {
    ApplyFn left_op = [&op, &precond](const Eigen::VectorXd& x) { return precond(op(x)); };
    return gmres(left_op, nullptr, precond(rhs), x0, max_it, rtol);
  }
  KrylovResult res;
  const Eigen::VectorXd r0 = rhs - op(x0);
  const double beta = r0.norm();
  if (beta == 0.0) {
    res.x = x0;
    res.converged = true;
    return res;
  }
  detail::ArnoldiWorkspace ws;
  ws.init(static_cast<int>(rhs.size()), max_it, r0, beta);
  int m = 0;
  for (int j = 0; j < max_it; ++j) {
    ws.z.push_back(precond ? precond(ws.v[j]) : ws.v[j]);
    const double est = ws.step(j, op(ws.z[j]));
    m = j + 1;
    res.rel_residual = est / beta;
    if (est <= rtol * beta) {
      res.converged = true;
      break;
    }
    if (ws.last_subdiag == 0.0) { // happy breakdown: the solution is exact
      res.converged = true;
      break;
    }
  }
  res.iterations = m;
  res.x = ws.solution(x0, m);
  return res;
}

/// Flexible GMRES: the preconditioner may differ at every iteration, so the
/// Z basis is always stored. Convergence requires the explicitly computed
/// true relative residual ||b - Ax|| / ||b|| to reach rtol; the Arnoldi
/// estimate only triggers the check.
inline KrylovResult fgmres(const ApplyFn& op, const ApplyFn& variable_precond,
                           const Eigen::VectorXd& rhs, int max_it, double rtol) {
  KrylovResult res;
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    res.x = Eigen::VectorXd::Zero(rhs.size());
    res.converged = true;
    return res;
  }
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(rhs.size());
  detail::ArnoldiWorkspace ws;
  ws.init(static_cast<int>(rhs.size()), max_it, rhs, bnorm);
  for (int j = 0; j < max_it; ++j) {
    ws.z.push_back(variable_precond(ws.v[j]));
    const double est = ws.step(j, op(ws.z[j]));
    const int m = j + 1;
    if (est <= rtol * bnorm || ws.last_subdiag == 0.0 || j + 1 == max_it) {
      res.x = ws.solution(x0, m);
      res.rel_residual = (rhs - op(res.x)).norm() / bnorm;
      res.iterations = m;
      if (res.rel_residual <= rtol) {
        res.converged = true;
        return res;
      }
      if (j + 1 == max_it) return res; // max_it reached, reported unconverged
    }
  }
  return res;
}

} // namespace pstokes

#endif
