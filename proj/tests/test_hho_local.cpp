#include <catch2/catch.hpp>

#include <cmath>

#include "pstokes/assemble.hpp"
#include "pstokes/hho_local.hpp"

using namespace pstokes;

namespace {

Mesh one_trapezoid() {
  Mesh m;
  m.vertices = {{-1, -1}, {1, -0.8}, {1, 0.9}, {-1, 1}};
  m.elements = {{0, 1, 2, 3}};
  m.finalize();
  return m;
}

// scalar polynomial with monomial coefficients, plus gradient
struct Poly {
  int degree;
  std::vector<double> c;
  static Poly random(int degree, SplitMix64& rng) {
    Poly p;
    p.degree = degree;
    p.c.resize(dim_P2(degree));
    for (auto& v : p.c) v = rng.sym();
    return p;
  }
  double operator()(const Vec2& pt) const {
    double s = 0.0;
    int idx = 0;
    for (int d = 0; d <= degree; ++d)
      for (int ay = 0; ay <= d; ++ay)
        s += c[idx++] * std::pow(pt.x(), d - ay) * std::pow(pt.y(), ay);
    return s;
  }
  Vec2 grad(const Vec2& pt) const {
    Vec2 g = Vec2::Zero();
    int idx = 0;
    for (int d = 0; d <= degree; ++d)
      for (int ay = 0; ay <= d; ++ay) {
        const int ax = d - ay;
        if (ax > 0) g.x() += c[idx] * ax * std::pow(pt.x(), ax - 1) * std::pow(pt.y(), ay);
        if (ay > 0) g.y() += c[idx] * ay * std::pow(pt.x(), ax) * std::pow(pt.y(), ay - 1);
        ++idx;
      }
    return g;
  }
};

// interpolate a scalar function into the hybrid local space (element + faces)
Eigen::VectorXd interpolate_scalar(const HhoElement& he,
                                   const std::function<double(const Vec2&)>& f) {
  Eigen::VectorXd dofs = Eigen::VectorXd::Zero(he.n_scalar_dofs());
  dofs.head(he.n_elem_modes()) = he.rec_basis().project(f, he.element_degree());
  for (int lf = 0; lf < he.n_faces(); ++lf)
    dofs.segment(he.face_offset(lf), he.n_face_modes()) =
        he.face_basis(lf).project(f, he.face_degree());
  return dofs;
}

double eval_reconstruction(const HhoElement& he, const Eigen::VectorXd& dofs, const Vec2& p) {
  return he.rec_basis().eval(p).dot(he.reconstruction() * dofs);
}

} // namespace

TEST_CASE("potential reconstruction reproduces polynomials") {
  const Mesh m = one_trapezoid();
  SplitMix64 rng(19);
  for (int k : {0, 1, 3}) {
    for (int k_elem : {k, k + 1}) {
      const HhoElement he(m, 0, k, k_elem);
      SECTION("constant, k=" + std::to_string(k) + " k_elem=" + std::to_string(k_elem)) {
        const double c = -1.25;
        const Eigen::VectorXd dofs = interpolate_scalar(he, [&](const Vec2&) { return c; });
        CHECK(eval_reconstruction(he, dofs, Vec2(0.3, 0.2)) == Approx(c).epsilon(1e-12));
      }
      SECTION("random degree k+1 polynomial, k=" + std::to_string(k) +
              " k_elem=" + std::to_string(k_elem)) {
        for (int trial = 0; trial < 3; ++trial) {
          const Poly q = Poly::random(k + 1, rng);
          const Eigen::VectorXd dofs = interpolate_scalar(he, [&](const Vec2& p) { return q(p); });
          const Eigen::VectorXd rec = he.reconstruction() * dofs;
          // oracle: the exact projection of q onto the reconstruction basis
          const Eigen::VectorXd exact = he.rec_basis().project([&](const Vec2& p) { return q(p); }, k + 1);
          CHECK((rec - exact).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + exact.cwiseAbs().maxCoeff()));
        }
      }
    }
  }
}

TEST_CASE("affine reconstruction at k=0") {
  const Mesh m = one_trapezoid();
  const HhoElement he(m, 0, 0, 0);
  const Eigen::VectorXd dofs =
      interpolate_scalar(he, [](const Vec2& p) { return 2.0 * p.x() - 0.5 * p.y() + 0.25; });
  const Vec2 pt(0.1, -0.3);
  CHECK(eval_reconstruction(he, dofs, pt) == Approx(2.0 * pt.x() - 0.5 * pt.y() + 0.25).epsilon(1e-11));
}

TEST_CASE("face residuals vanish on interpolated polynomials") {
  const Mesh m = one_trapezoid();
  SplitMix64 rng(23);
  for (int k : {0, 2}) {
    for (int k_elem : {k, k + 1}) {
      const HhoElement he(m, 0, k, k_elem);
      const Poly q = Poly::random(k + 1, rng);
      const Eigen::VectorXd dofs = interpolate_scalar(he, [&](const Vec2& p) { return q(p); });
      const Eigen::VectorXd cdofs = interpolate_scalar(he, [](const Vec2&) { return 3.0; });
      for (int lf = 0; lf < he.n_faces(); ++lf) {
        const Eigen::MatrixXd r = he.face_residual_values(lf);
        CHECK((r * dofs).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + dofs.cwiseAbs().maxCoeff()));
        CHECK((r * cdofs).cwiseAbs().maxCoeff() < 1e-11);
      }
    }
  }
}

TEST_CASE("face residual matches a direct quadrature evaluation") {
  // state with zero element part and a single face mode on
  const Mesh m = one_trapezoid();
  const int k = 2;
  const HhoElement he(m, 0, k, k);
  const int lf = 1;
  Eigen::VectorXd dofs = Eigen::VectorXd::Zero(he.n_scalar_dofs());
  dofs[he.face_offset(lf) + 1] = 1.0; // second face mode
  const Eigen::VectorXd rec = he.reconstruction() * dofs;

  const FaceBasis& fb = he.face_basis(lf);
  const auto& fq = fb.quadrature();
  // oracle: pi_F^k(phi - p) - pi_T^k(-p) evaluated pointwise by quadrature
  auto p_of = [&](const Vec2& x) { return he.rec_basis().eval(x).dot(rec); };
  Eigen::VectorXd coef_f = fb.project([&](const Vec2& x) { return fb.eval(x)[1] - p_of(x); }, k);
  const Eigen::VectorXd coef_t =
      -(he.reconstruction() * dofs).head(he.n_elem_modes()); // pi_T^k(-p), truncation
  const Eigen::MatrixXd rvals = he.face_residual_values(lf);
  for (int q = 0; q < fq.size(); ++q) {
    const double oracle =
        fb.eval(fq.points[q]).dot(coef_f) -
        he.rec_basis().eval(fq.points[q], he.n_elem_modes()).dot(coef_t);
    CHECK((rvals * dofs)[q] == Approx(oracle).margin(1e-11));
  }
}

TEST_CASE("viscous block energy on an interior-like element") {
  // all faces tagged Neumann so no weak-Dirichlet terms enter
  Mesh m = one_trapezoid();
  for (auto& f : m.faces) f.tag = FaceTag::Neumann;
  for (int k : {0, 1, 2}) {
    const HhoElement he(m, 0, k, k);
    const Eigen::MatrixXd a = he.scalar_viscous_block(default_dirichlet_penalty(k));
    const Poly u{1, {0.25, 1.5, -0.75}}; // affine
    const Eigen::VectorXd dofs = interpolate_scalar(he, [&](const Vec2& p) { return u(p); });
    const double energy = dofs.dot(a * dofs);
    // oracle: int_T |grad u|^2 over the element by quadrature
    const QuadratureRule& q = he.rec_basis().quadrature();
    double exact = 0.0;
    for (int i = 0; i < q.size(); ++i) exact += q.weights[i] * u.grad(q.points[i]).squaredNorm();
    CHECK(energy == Approx(exact).epsilon(1e-10));
    // constant fields carry no energy
    const Eigen::VectorXd cd = interpolate_scalar(he, [](const Vec2&) { return 4.0; });
    CHECK(cd.dot(a * cd) < 1e-12);
  }
}

TEST_CASE("viscous blocks are symmetric on random trapezoids") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    Mesh m;
    m.vertices = {{-1, -1 + 0.3 * rng.sym()},
                  {1, -1 + 0.3 * rng.sym()},
                  {1, 1 + 0.3 * rng.sym()},
                  {-1, 1 + 0.3 * rng.sym()}};
    m.elements = {{0, 1, 2, 3}};
    m.finalize();
    m.faces[trial % 4].tag = FaceTag::Dirichlet;
    for (int k = 0; k <= 3; ++k) {
      const HhoElement he(m, 0, k, k);
      const Eigen::MatrixXd a = he.scalar_viscous_block(default_dirichlet_penalty(k));
      CHECK((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * a.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("rejects non-positive penalty") {
  const Mesh m = one_trapezoid();
  const HhoElement he(m, 0, 1, 1);
  CHECK_THROWS_AS(he.scalar_viscous_block(0.0), std::invalid_argument);
}

TEST_CASE("coupling rows against divergence oracles") {
  Mesh m = one_trapezoid();
  for (auto& f : m.faces) f.tag = FaceTag::Neumann; // interior-like: no Dirichlet exceptions
  const int k = 2;
  const HhoElement he(m, 0, k, k);
  const HhoLocalBlocks b = build_hho_local(he, false, default_dirichlet_penalty(k), StokesData::zero());

  SECTION("divergence-free affine velocity annihilates the mass rows") {
    // u = (y, x) interpolated componentwise
    Eigen::VectorXd vel = Eigen::VectorXd::Zero(b.size());
    const Eigen::VectorXd ux = interpolate_scalar(he, [](const Vec2& p) { return p.y(); });
    const Eigen::VectorXd uy = interpolate_scalar(he, [](const Vec2& p) { return p.x(); });
    for (int mno = 0; mno < b.ne; ++mno) {
      vel[b.vel_elem(0, mno)] = ux[mno];
      vel[b.vel_elem(1, mno)] = uy[mno];
    }
    for (int lf = 0; lf < b.nfaces; ++lf)
      for (int mno = 0; mno < b.nf; ++mno) {
        vel[b.vel_face(lf, 0, mno)] = ux[he.face_offset(lf) + mno];
        vel[b.vel_face(lf, 1, mno)] = uy[he.face_offset(lf) + mno];
      }
    const Eigen::VectorXd mass = b.mat.bottomRows(b.n_press) * vel;
    CHECK(mass.cwiseAbs().maxCoeff() < 1e-10);
  }

  SECTION("zero data gives a zero load vector") { CHECK(b.rhs.cwiseAbs().maxCoeff() == 0.0); }

  SECTION("constant pressure row equals the boundary flux") {
    // row of the constant pressure mode applied to a velocity state equals
    // -sum_F int_F u_F . n  (divergence theorem form), scaled by 1/sqrt|T|
    SplitMix64 rng(7);
    Eigen::VectorXd vel = Eigen::VectorXd::Zero(b.size());
    for (int i = 0; i < b.n_vel; ++i) vel[i] = rng.sym();
    const double row0 = b.mat.row(b.press_elem(0)).dot(vel);
    double oracle = 0.0;
    for (int lf = 0; lf < b.nfaces; ++lf) {
      const FaceBasis& fb = he.face_basis(lf);
      const auto& fq = fb.quadrature();
      const Vec2 n = he.outward_normal(lf);
      for (int q = 0; q < fq.size(); ++q) {
        Vec2 uf = Vec2::Zero();
        for (int c = 0; c < 2; ++c)
          for (int mno = 0; mno < b.nf; ++mno)
            uf[c] += vel[b.vel_face(lf, c, mno)] * fb.eval(fq.points[q])[mno];
        oracle -= fq.weights[q] * uf.dot(n);
      }
    }
    oracle /= std::sqrt(m.element_area(0)); // constant pressure mode is 1/sqrt|T|
    CHECK(row0 == Approx(oracle).margin(1e-12));
  }
}

TEST_CASE("local operators are linear") {
  const Mesh m = one_trapezoid();
  const HhoElement he(m, 0, 1, 1);
  SplitMix64 rng(3);
  Eigen::VectorXd x(he.n_scalar_dofs()), y(he.n_scalar_dofs());
  for (int i = 0; i < x.size(); ++i) {
    x[i] = rng.sym();
    y[i] = rng.sym();
  }
  const double al = 0.7, be = -1.3;
  const Eigen::MatrixXd pr = he.reconstruction();
  CHECK(((pr * (al * x + be * y)) - (al * (pr * x) + be * (pr * y))).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::MatrixXd r0 = he.face_residual_values(0);
  CHECK(((r0 * (al * x + be * y)) - (al * (r0 * x) + be * (r0 * y))).cwiseAbs().maxCoeff() < 1e-12);
}

namespace {

// Assembles a full uncondensed global system for a polynomial exact solution
// (stream-function velocity, so it is divergence-free) and returns the
// residual norm at the interpolated solution.
double polynomial_residual(Scheme scheme, int k, int n) {
  Mesh mesh = gen_quad_family(n, 0.15, QuadKind::Trapezoidal);
  classify_boundary(mesh, Side::Right);
  SplitMix64 rng(101 + k);
  // the divergence-free exact velocity must lie in the discrete space:
  // degree k+1 for the HHO reconstructions, degree k for DG
  const int stream_degree = scheme == Scheme::Dg ? k + 1 : k + 2;
  const Poly psi = Poly::random(stream_degree, rng);
  const Poly pres = Poly::random(k, rng);
  auto uex = [&](const Vec2& p) { return Vec2(psi.grad(p).y(), -psi.grad(p).x()); };
  // -laplace(u) + grad p via finite differences would lose digits; use exact
  // polynomial differentiation through the monomial table instead
  auto lap = [&](const Vec2& p, int comp) {
    // second derivatives of psi by differentiating twice numerically exactly:
    // assemble from monomials
    double s = 0.0;
    int idx = 0;
    for (int d = 0; d <= psi.degree; ++d)
      for (int ay = 0; ay <= d; ++ay) {
        const int ax = d - ay;
        const double c = psi.c[idx++];
        auto mono = [&](int a, int b) {
          return (a < 0 || b < 0) ? 0.0 : std::pow(p.x(), a) * std::pow(p.y(), b);
        };
        if (comp == 0) {
          // u1 = d psi / dy ; laplace u1 = psi_yxx + psi_yyy
          s += c * (ay * ax * (ax - 1) * mono(ax - 2, ay - 1) +
                    ay * (ay - 1) * (ay - 2) * mono(ax, ay - 3));
        } else {
          // u2 = -d psi / dx ; laplace u2 = -(psi_xxx + psi_xyy)
          s -= c * (ax * (ax - 1) * (ax - 2) * mono(ax - 3, ay) +
                    ax * ay * (ay - 1) * mono(ax - 1, ay - 2));
        }
      }
    return s;
  };
  StokesData data;
  data.f = [&](const Vec2& p) {
    return Vec2(-lap(p, 0) + pres.grad(p).x(), -lap(p, 1) + pres.grad(p).y());
  };
  data.g_d = uex;
  data.g_n = [&](const Vec2& p, const Vec2& nrm) {
    const Vec2 u1g = Vec2(0, 0);
    (void)u1g;
    // traction: -n.grad u + p n, with grad u from the stream function
    Eigen::Matrix2d g;
    // g(i,j) = d u_j / d x_i; u = (psi_y, -psi_x)
    double pxx = 0, pxy = 0, pyy = 0;
    int idx = 0;
    for (int d = 0; d <= psi.degree; ++d)
      for (int ay = 0; ay <= d; ++ay) {
        const int ax = d - ay;
        const double c = psi.c[idx++];
        auto mono = [&](int a, int b) {
          return (a < 0 || b < 0) ? 0.0 : std::pow(p.x(), a) * std::pow(p.y(), b);
        };
        pxx += c * ax * (ax - 1) * mono(ax - 2, ay);
        pxy += c * ax * ay * mono(ax - 1, ay - 1);
        pyy += c * ay * (ay - 1) * mono(ax, ay - 2);
      }
    g(0, 0) = pxy;  // d u1 / dx = psi_yx
    g(1, 0) = pyy;  // d u1 / dy
    g(0, 1) = -pxx; // d u2 / dx
    g(1, 1) = -pxy; // d u2 / dy
    const Vec2 ngrad(nrm.x() * g(0, 0) + nrm.y() * g(1, 0), nrm.x() * g(0, 1) + nrm.y() * g(1, 1));
    return Vec2(-ngrad + pres(p) * nrm);
  };

  const StokesSystem sys = assemble_stokes(mesh, scheme, Strategy::Uncond, k, data);

  // interpolate the exact solution into the retained (uncondensed) dofs
  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.layout.dim());
  const int k_elem = element_degree(scheme, k);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    if (scheme == Scheme::Dg) {
      ElementBasis eb(mesh, e, k, 2 * (k + 1) + 1);
      const int ne = dim_P2(k);
      for (int c = 0; c < 2; ++c)
        x.segment(sys.layout.elem_offset(e) + c * ne, ne) =
            eb.project([&](const Vec2& p) { return uex(p)[c]; }, k);
      x.segment(sys.layout.elem_offset(e) + 2 * ne, ne) =
          eb.project([&](const Vec2& p) { return pres(p); }, k);
    } else {
      HhoElement he(mesh, e, k, k_elem);
      const int ne = he.n_elem_modes();
      for (int c = 0; c < 2; ++c)
        x.segment(sys.layout.elem_offset(e) + c * ne, ne) =
            he.rec_basis().project([&](const Vec2& p) { return uex(p)[c]; }, k_elem);
      x.segment(sys.layout.elem_offset(e) + 2 * ne, dim_P2(k)) =
          he.rec_basis().project([&](const Vec2& p) { return pres(p); }, k);
    }
  }
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (sys.layout.face_block() == 0) break;
    FaceBasis fb(mesh, f, k, 2 * (k + 1) + 1);
    const std::int64_t base = sys.layout.face_offset(f);
    for (int c = 0; c < 2; ++c)
      x.segment(base + c * sys.layout.face_vel, sys.layout.face_vel) =
          fb.project([&](const Vec2& p) { return uex(p)[c]; }, k);
    if (sys.layout.face_press > 0)
      x.segment(base + 2 * sys.layout.face_vel, sys.layout.face_press) =
          fb.project([&](const Vec2& p) { return pres(p); }, k);
  }
  const Eigen::VectorXd r = sys.a.multiply(x) - sys.rhs;
  return r.cwiseAbs().maxCoeff() / (1.0 + x.cwiseAbs().maxCoeff());
}

} // namespace

TEST_CASE("global residual vanishes for polynomial exact solutions") {
  CHECK(polynomial_residual(Scheme::HhoDp, 1, 2) < 1e-9);
  CHECK(polynomial_residual(Scheme::HhoDp, 3, 2) < 1e-9);
  CHECK(polynomial_residual(Scheme::HhoHp, 2, 2) < 1e-9);
  CHECK(polynomial_residual(Scheme::Dg, 2, 2) < 1e-9);
}
