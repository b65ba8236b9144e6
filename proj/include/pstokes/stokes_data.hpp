// Problem data for the Stokes solvers: body force, Dirichlet velocity and
// Neumann traction, plus the manufactured solution the studies run against.

#ifndef PSTOKES_STOKES_DATA_HPP
#define PSTOKES_STOKES_DATA_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "pstokes/mesh.hpp"

namespace pstokes {

using VecFn = std::function<Vec2(const Vec2&)>;
using BdryFn = std::function<Vec2(const Vec2&, const Vec2&)>; // (point, outward normal)

struct StokesData {
  VecFn f;    // body force
  VecFn g_d;  // velocity on the Dirichlet boundary
  BdryFn g_n; // traction -n.grad(u) + p n on the Neumann boundary

  static StokesData zero() {
    return {[](const Vec2&) { return Vec2::Zero(); }, [](const Vec2&) { return Vec2::Zero(); },
            [](const Vec2&, const Vec2&) { return Vec2::Zero(); }};
  }
};

/// Smooth divergence-free reference solution on (-1,1)^2 with zero body
/// force: u = (-e^x (y cos y + sin y), e^x y sin y), p = 2 e^x sin y.
struct ManufacturedCase {
  static Vec2 velocity(const Vec2& p) {
    const double ex = std::exp(p.x());
    return Vec2(-ex * (p.y() * std::cos(p.y()) + std::sin(p.y())), ex * p.y() * std::sin(p.y()));
  }

  /// grad(i,j) = d u_j / d x_i
  static Eigen::Matrix2d velocity_gradient(const Vec2& p) {
    const double ex = std::exp(p.x());
    const double sy = std::sin(p.y()), cy = std::cos(p.y());
    Eigen::Matrix2d g;
    g(0, 0) = -ex * (p.y() * cy + sy);      // du1/dx
    g(1, 0) = -ex * (2.0 * cy - p.y() * sy); // du1/dy
    g(0, 1) = ex * p.y() * sy;              // du2/dx
    g(1, 1) = ex * (sy + p.y() * cy);       // du2/dy
    return g;
  }

  static double pressure(const Vec2& p) { return 2.0 * std::exp(p.x()) * std::sin(p.y()); }

  /// -laplace(u) + grad(p) vanishes identically for this pair.
  static Vec2 body_force(const Vec2&) { return Vec2::Zero(); }

  /// Traction datum on a boundary with outward normal n.
  static Vec2 traction(const Vec2& p, const Vec2& n) {
    const Eigen::Matrix2d g = velocity_gradient(p);
    // n . grad u has components sum_i n_i d u_j / d x_i
    Vec2 ngrad(n.x() * g(0, 0) + n.y() * g(1, 0), n.x() * g(0, 1) + n.y() * g(1, 1));
    return -ngrad + pressure(p) * n;
  }

  static StokesData data() {
    return {body_force, velocity, traction};
  }
};

} // namespace pstokes

#endif
