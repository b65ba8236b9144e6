#include <catch2/catch.hpp>

#include <cmath>

#include "pstokes/study.hpp"

using namespace pstokes;

namespace {

const ExactFields kExact{ManufacturedCase::velocity, ManufacturedCase::velocity_gradient,
                         ManufacturedCase::pressure};

} // namespace

TEST_CASE("manufactured solution spot values") {
  const Vec2 origin(0, 0);
  CHECK(ManufacturedCase::velocity(origin).norm() == 0.0);
  CHECK(ManufacturedCase::pressure(origin) == 0.0);

  const Vec2 q(1.0, M_PI / 2.0);
  const Vec2 u = ManufacturedCase::velocity(q);
  CHECK(u.x() == Approx(-std::exp(1.0)).epsilon(1e-14));
  CHECK(u.y() == Approx(std::exp(1.0) * M_PI / 2.0).epsilon(1e-14));
  CHECK(ManufacturedCase::pressure(q) == Approx(2.0 * std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("manufactured fields are divergence free with zero body force") {
  SplitMix64 rng(13);
  const double h = 1e-4; // balances truncation against roundoff in the FD oracle
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec2 p(rng.sym() * 0.99, rng.sym() * 0.99);
    const Eigen::Matrix2d g = ManufacturedCase::velocity_gradient(p);
    CHECK(std::abs(g(0, 0) + g(1, 1)) < 1e-12); // div u = 0 from the closed form
    if (trial < 50) {
      // finite-difference cross-check of the gradient and of -lap(u) + grad(p)
      for (int c = 0; c < 2; ++c) {
        const Vec2 ex = Vec2::Unit(0), ey = Vec2::Unit(1);
        const double dxu =
            (ManufacturedCase::velocity(p + h * ex)[c] - ManufacturedCase::velocity(p - h * ex)[c]) /
            (2 * h);
        const double dyu =
            (ManufacturedCase::velocity(p + h * ey)[c] - ManufacturedCase::velocity(p - h * ey)[c]) /
            (2 * h);
        CHECK(dxu == Approx(g(0, c)).margin(1e-6));
        CHECK(dyu == Approx(g(1, c)).margin(1e-6));
        const double lap =
            (ManufacturedCase::velocity(p + h * ex)[c] + ManufacturedCase::velocity(p - h * ex)[c] +
             ManufacturedCase::velocity(p + h * ey)[c] + ManufacturedCase::velocity(p - h * ey)[c] -
             4 * ManufacturedCase::velocity(p)[c]) /
            (h * h);
        const double dp =
            c == 0 ? (ManufacturedCase::pressure(p + h * ex) - ManufacturedCase::pressure(p - h * ex)) /
                         (2 * h)
                   : (ManufacturedCase::pressure(p + h * ey) - ManufacturedCase::pressure(p - h * ey)) /
                         (2 * h);
        CHECK(std::abs(-lap + dp) < 1e-5); // f = 0
      }
    }
  }
}

TEST_CASE("zero solution measures the norm of the exact fields") {
  Mesh m = gen_quad_family(3, 0.1, QuadKind::Trapezoidal);
  classify_boundary(m, Side::Right);
  const int k = 2;
  // zero local vectors in the dp layout
  std::vector<Eigen::VectorXd> zero_local;
  for (int e = 0; e < m.n_elements(); ++e) {
    const HhoElement he(m, e, k, k);
    const int n = 2 * (he.n_elem_modes() + he.n_faces() * he.n_face_modes()) + dim_P2(k);
    zero_local.push_back(Eigen::VectorXd::Zero(n));
  }
  const ErrorNorms err = error_norms(m, Scheme::HhoDp, k, zero_local, kExact);
  // oracle: ||u|| by an independent fine quadrature
  double norm2 = 0.0, pnorm2 = 0.0;
  for (int e = 0; e < m.n_elements(); ++e) {
    const QuadratureRule q = make_element_quadrature(m, e, 21);
    for (int i = 0; i < q.size(); ++i) {
      norm2 += q.weights[i] * ManufacturedCase::velocity(q.points[i]).squaredNorm();
      pnorm2 += q.weights[i] * std::pow(ManufacturedCase::pressure(q.points[i]), 2);
    }
  }
  CHECK(err.u == Approx(std::sqrt(norm2)).epsilon(1e-10));
  CHECK(err.p == Approx(std::sqrt(pnorm2)).epsilon(1e-10));
}

TEST_CASE("interpolation errors bound the solve errors from below") {
  Mesh m = gen_quad_family(2, 0.1, QuadKind::Trapezoidal);
  classify_boundary(m, Side::Right);
  const int k = 2;
  const StokesData data = ManufacturedCase::data();
  // hp solve
  LevelConfig cfg = LevelConfig::defaults_for(k);
  const StokesSolution sol = solve_stokes(m, Scheme::HhoHp, Strategy::VpCond, k, data, cfg);
  REQUIRE(sol.report.converged);
  const ErrorNorms solve_err = error_norms(m, Scheme::HhoHp, k, sol.local, kExact);
  // interpolant in the same local layout
  std::vector<Eigen::VectorXd> interp;
  for (int e = 0; e < m.n_elements(); ++e) {
    const HhoElement he(m, e, k, k + 1);
    HhoLocalBlocks b = build_hho_local(he, true, default_dirichlet_penalty(k), data);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
    for (int c = 0; c < 2; ++c) {
      const Eigen::VectorXd ce =
          he.rec_basis().project([&](const Vec2& p) { return ManufacturedCase::velocity(p)[c]; }, k + 1);
      for (int mm = 0; mm < b.ne; ++mm) x[b.vel_elem(c, mm)] = ce[mm];
      for (int lf = 0; lf < b.nfaces; ++lf) {
        const Eigen::VectorXd cf = he.face_basis(lf).project(
            [&](const Vec2& p) { return ManufacturedCase::velocity(p)[c]; }, k);
        for (int mm = 0; mm < b.nf; ++mm) x[b.vel_face(lf, c, mm)] = cf[mm];
      }
    }
    const Eigen::VectorXd cp = he.rec_basis().project(ManufacturedCase::pressure, k);
    for (int mm = 0; mm < b.np; ++mm) x[b.press_elem(mm)] = cp[mm];
    for (int lf = 0; lf < b.nfaces; ++lf) {
      const Eigen::VectorXd cf = he.face_basis(lf).project(ManufacturedCase::pressure, k);
      for (int mm = 0; mm < b.nfp; ++mm) x[b.press_face(lf, mm)] = cf[mm];
    }
    interp.push_back(x);
  }
  const ErrorNorms interp_err = error_norms(m, Scheme::HhoHp, k, interp, kExact);
  // the element L2 projection is optimal, so the interpolant cannot lose
  CHECK(interp_err.u <= solve_err.u * (1.0 + 1e-12));
  CHECK(interp_err.p <= solve_err.p * (1.0 + 1e-12));
}

TEST_CASE("hybrid pressure solves are pointwise divergence free") {
  for (const char* family : {"trapz", "tri"}) {
    StudyConfig cfg;
    cfg.family = family;
    cfg.ns = {2, 4};
    cfg.scheme = Scheme::HhoHp;
    cfg.strategy = Strategy::VpCond;
    cfg.k = 2;
    cfg.levels = LevelConfig::defaults_for(2);
    const StudyReport rep = convergence_study(cfg);
    for (const auto& row : rep.rows) {
      REQUIRE(row.converged);
      CHECK(row.err.div_u <= 1e-10);
    }
  }
}

TEST_CASE("study rates approach theory on the trapezoidal family") {
  StudyConfig cfg;
  cfg.k = 2;
  cfg.ns = {2, 4, 8, 16};
  cfg.levels = LevelConfig::defaults_for(2);
  const StudyReport rep = convergence_study(cfg);
  const StudyRow& last = rep.rows.back();
  CHECK(last.rate_u == Approx(cfg.k + 2).margin(0.4));
  CHECK(last.rate_gu == Approx(cfg.k + 1).margin(0.4));
  CHECK(last.rate_p == Approx(cfg.k + 1).margin(0.4));
  for (const auto& row : rep.rows) CHECK(row.its <= 10);
}

TEST_CASE("superconvergence smoke test with polynomial data") {
  // data from a polynomial solution of degree <= k: the discrete solution
  // reproduces it to solver precision on a single mesh
  Mesh m = gen_quad_family(2, 0.1, QuadKind::Trapezoidal);
  classify_boundary(m, Side::Right);
  const int k = 3;
  // stream function psi = x^3 y - x y^3: u = (x^3 - 3 x y^2, -3 x^2 y + y^3), degree 3 = k
  auto uex = [](const Vec2& p) {
    return Vec2(p.x() * p.x() * p.x() - 3.0 * p.x() * p.y() * p.y(),
                -3.0 * p.x() * p.x() * p.y() + p.y() * p.y() * p.y());
  };
  auto grad = [](const Vec2& p) {
    Eigen::Matrix2d g;
    g(0, 0) = 3.0 * p.x() * p.x() - 3.0 * p.y() * p.y();
    g(1, 0) = -6.0 * p.x() * p.y();
    g(0, 1) = -6.0 * p.x() * p.y();
    g(1, 1) = -3.0 * p.x() * p.x() + 3.0 * p.y() * p.y();
    return g;
  };
  auto pex = [](const Vec2& p) { return p.x() * p.y(); }; // degree 2 <= k
  StokesData data;
  // -lap u = (-6x + 6x, 6y - 6y) = 0, so f = grad p
  data.f = [](const Vec2& p) { return Vec2(p.y(), p.x()); };
  data.g_d = uex;
  data.g_n = [&](const Vec2& p, const Vec2& n) {
    const Eigen::Matrix2d g = grad(p);
    return Vec2(-(n.x() * g(0, 0) + n.y() * g(1, 0)) + pex(p) * n.x(),
                -(n.x() * g(0, 1) + n.y() * g(1, 1)) + pex(p) * n.y());
  };
  const ExactFields exact{uex, grad, pex};
  LevelConfig cfg = LevelConfig::defaults_for(k);
  cfg.outer_rtol = 1e-13;
  for (auto sc : {std::pair{Scheme::HhoDp, Strategy::VCond},
                  std::pair{Scheme::HhoHp, Strategy::VpCond},
                  std::pair{Scheme::Dg, Strategy::Uncond}}) {
    const StokesSolution sol = solve_stokes(m, sc.first, sc.second, k, data, cfg);
    REQUIRE(sol.report.converged);
    const ErrorNorms err = error_norms(m, sc.first, k, sol.local, exact);
    CHECK(err.u <= 1e-9);
    CHECK(err.grad_u <= 1e-9);
    CHECK(err.p <= 1e-9);
  }
}

TEST_CASE("csv format and determinism") {
  StudyConfig cfg;
  cfg.k = 1;
  cfg.ns = {2, 4};
  cfg.levels = LevelConfig::defaults_for(1);
  const StudyReport a = convergence_study(cfg);
  const StudyReport b = convergence_study(cfg);
  const std::string csv_a = a.csv(false), csv_b = b.csv(false);
  CHECK(csv_a == csv_b); // byte-identical without the timing columns
  CHECK(csv_a.rfind("cells,e_u,e_Gu,e_p,e_Du,rate_u,rate_Gu,rate_p,its,its_coarse,dofs,mnzs",
                    0) == 0);
  // with timings the header gains exactly the two timing columns
  CHECK(a.csv(true).substr(0, a.csv(true).find('\n')) ==
        "cells,e_u,e_Gu,e_p,e_Du,rate_u,rate_Gu,rate_p,its,its_coarse,dofs,mnzs,t_asm_s,t_sol_s");
  // markdown carries the ITs column
  CHECK(a.markdown().find("ITs") != std::string::npos);
  // first row has no rates
  CHECK(a.csv(false).find("\n4,") != std::string::npos);
  CHECK(std::isnan(a.rows[0].rate_u));
}

TEST_CASE("graded families use the cell-count mesh size convention") {
  StudyConfig cfg;
  cfg.family = "graded-tri";
  cfg.k = 1;
  cfg.ns = {2, 4};
  cfg.levels = LevelConfig::defaults_for(1);
  cfg.seed = 7;
  const StudyReport rep = convergence_study(cfg);
  CHECK(rep.rows[0].h == Approx(1.0 / std::sqrt(8.0)));
  CHECK(rep.rows[1].h == Approx(1.0 / std::sqrt(32.0)));
}

TEST_CASE("layout dimensions on hand-counted cases") {
  Mesh one = gen_quad_family(1, 0.0, QuadKind::Uniform);
  classify_boundary(one, Side::Right);
  // one quad at k=0: 2 element velocity + 4 faces x 2 + 1 pressure
  CHECK(make_layout(one, Scheme::HhoDp, Strategy::Uncond, 0).dim() == 11);
  // DG k=1: three fields of dimension 3
  CHECK(make_layout(one, Scheme::Dg, Strategy::Uncond, 1).dim() == 9);

  // at k=0 the two condensation strategies retain the same unknowns
  Mesh m = gen_quad_family(3, 0.1, QuadKind::Trapezoidal);
  classify_boundary(m, Side::Right);
  CHECK(make_layout(m, Scheme::HhoDp, Strategy::VCond, 0).dim() ==
        make_layout(m, Scheme::HhoDp, Strategy::VpCond, 0).dim());
}
