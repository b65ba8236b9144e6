// Polygonal 2D meshes on (-1,1)^2: structured quad/trapezoidal and triangular
// families, Gauss-Lobatto graded variants with seeded jitter, element/face
// topology with outward normals, boundary tagging, and a plain-text format.

#ifndef PSTOKES_MESH_HPP
#define PSTOKES_MESH_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pstokes {

using Vec2 = Eigen::Vector2d;

enum class FaceTag { Interior, Dirichlet, Neumann };

struct Face {
  int a = -1, b = -1;        // endpoint vertex indices, a->b is CCW for `left`
  int left = -1, right = -1; // right = -1 on boundary faces
  FaceTag tag = FaceTag::Interior;
};

/// Face index plus the sign of the outward normal seen from an element
/// (+1 when the element is `left`, -1 when it is `right`).
struct FaceUse {
  int face;
  int sign;
};

class Mesh {
public:
  std::vector<Vec2> vertices;
  std::vector<std::vector<int>> elements; // CCW vertex loops
  std::vector<Face> faces;
  std::vector<std::vector<FaceUse>> element_faces;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int n_faces() const { return static_cast<int>(faces.size()); }

  double element_area(int e) const { return m_area[e]; }
  double element_diameter(int e) const { return m_hT[e]; }
  Vec2 element_centroid(int e) const { return m_centroid[e]; }
  double face_length(int f) const { return m_hF[f]; }
  Vec2 face_midpoint(int f) const {
    return 0.5 * (vertices[faces[f].a] + vertices[faces[f].b]);
  }
  Vec2 face_tangent(int f) const {
    return (vertices[faces[f].b] - vertices[faces[f].a]) / m_hF[f];
  }
  /// Unit normal out of the `left` element.
  Vec2 face_normal(int f) const {
    const Vec2 t = face_tangent(f);
    return Vec2(t.y(), -t.x());
  }

  bool is_boundary_face(int f) const { return faces[f].right < 0; }

  /// Builds faces from element loops, then caches measures. Throws on
  /// non-manifold input (an edge shared by more than two elements).
  void finalize() {
    build_faces();
    compute_measures();
    check_invariants();
  }

  /// Re-derives the cached measures without touching topology (used by
  /// the reader when faces are listed explicitly).
  void finalize_with_faces() {
    link_element_faces();
    compute_measures();
    check_invariants();
  }

private:
  std::vector<double> m_area, m_hT, m_hF;
  std::vector<Vec2> m_centroid;

  void build_faces() {
    faces.clear();
    std::map<std::pair<int, int>, int> edge_to_face;
    for (int e = 0; e < n_elements(); ++e) {
      const auto& loop = elements[e];
      const int nv = static_cast<int>(loop.size());
      if (nv < 3) throw std::runtime_error("mesh: element with fewer than 3 vertices");
      for (int i = 0; i < nv; ++i) {
        const int a = loop[i];
        const int b = loop[(i + 1) % nv];
        const auto key = std::minmax(a, b);
        auto it = edge_to_face.find(key);
        if (it == edge_to_face.end()) {
          Face f;
          f.a = a;
          f.b = b;
          f.left = e;
          edge_to_face.emplace(key, n_faces());
          faces.push_back(f);
        } else {
          Face& f = faces[it->second];
          if (f.right >= 0)
            throw std::runtime_error("mesh: non-manifold edge (three incident elements)");
          if (f.a != b || f.b != a)
            throw std::runtime_error("mesh: inconsistent edge orientation between elements");
          f.right = e;
        }
      }
    }
    for (auto& f : faces)
      if (f.right < 0 && f.tag == FaceTag::Interior) f.tag = FaceTag::Dirichlet;
    link_element_faces();
  }

  void link_element_faces() {
    std::map<std::pair<int, int>, int> edge_to_face;
    for (int f = 0; f < n_faces(); ++f)
      edge_to_face.emplace(std::minmax(faces[f].a, faces[f].b), f);
    element_faces.assign(n_elements(), {});
    for (int e = 0; e < n_elements(); ++e) {
      const auto& loop = elements[e];
      const int nv = static_cast<int>(loop.size());
      for (int i = 0; i < nv; ++i) {
        const int a = loop[i];
        const int b = loop[(i + 1) % nv];
        auto it = edge_to_face.find(std::minmax(a, b));
        if (it == edge_to_face.end())
          throw std::runtime_error("mesh: element edge without a face record");
        const Face& f = faces[it->second];
        const int sign = (f.left == e) ? 1 : -1;
        if (sign < 0 && f.right != e)
          throw std::runtime_error("mesh: face incidence does not match element loop");
        element_faces[e].push_back({it->second, sign});
      }
    }
  }

  void compute_measures() {
    const int ne = n_elements();
    m_area.assign(ne, 0.0);
    m_hT.assign(ne, 0.0);
    m_centroid.assign(ne, Vec2::Zero());
    for (int e = 0; e < ne; ++e) {
      const auto& loop = elements[e];
      const int nv = static_cast<int>(loop.size());
      double area2 = 0.0;
      Vec2 c = Vec2::Zero();
      for (int i = 0; i < nv; ++i) {
        const Vec2& p = vertices[loop[i]];
        const Vec2& q = vertices[loop[(i + 1) % nv]];
        const double cr = p.x() * q.y() - q.x() * p.y();
        area2 += cr;
        c += cr * (p + q);
      }
      m_area[e] = 0.5 * area2;
      if (m_area[e] <= 0.0)
        throw std::runtime_error("mesh: element " + std::to_string(e) +
                                 " has non-positive signed area (not CCW or degenerate)");
      m_centroid[e] = c / (6.0 * m_area[e]);
      for (int i = 0; i < nv; ++i)
        for (int j = i + 1; j < nv; ++j)
          m_hT[e] = std::max(m_hT[e], (vertices[loop[i]] - vertices[loop[j]]).norm());
    }
    m_hF.assign(n_faces(), 0.0);
    for (int f = 0; f < n_faces(); ++f)
      m_hF[f] = (vertices[faces[f].b] - vertices[faces[f].a]).norm();
  }

  void check_invariants() const {
    for (int e = 0; e < n_elements(); ++e) {
      // closed-boundary check: sum of |F| n_TF vanishes on each element
      Vec2 s = Vec2::Zero();
      double perim = 0.0;
      for (const auto& fu : element_faces[e]) {
        s += fu.sign * m_hF[fu.face] * face_normal(fu.face);
        perim += m_hF[fu.face];
      }
      if (s.norm() > 1e-12 * perim)
        throw std::runtime_error("mesh: element " + std::to_string(e) +
                                 " boundary does not close");
    }
  }
};

// ---------------------------------------------------------------------------
// seeded RNG (splitmix64), kept local so meshes are bit-reproducible
// ---------------------------------------------------------------------------

class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : m_state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (m_state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  /// uniform in [-1, 1]
  double sym() { return 2.0 * (next() >> 11) * 0x1.0p-53 - 1.0; }
  /// uniform in [0, 1)
  double unit() { return (next() >> 11) * 0x1.0p-53; }

private:
  std::uint64_t m_state;
};

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

enum class QuadKind { Uniform, Trapezoidal };
enum class TriStyle { SplitQuad, DelaunayLike };

namespace detail {

inline int grid_vertex(int i, int j, int n) { return j * (n + 1) + i; }

/// Gauss-Lobatto nodes on [-1,1] with n+1 points (endpoints included):
/// +-1 together with the roots of P_n', found by Newton iteration.
inline std::vector<double> gauss_lobatto_nodes(int n) {
  const int np = n + 1;
  std::vector<double> x(np);
  x.front() = -1.0;
  x.back() = 1.0;
  for (int i = 1; i < np - 1; ++i) {
    // Chebyshev-Gauss-Lobatto initial guess
    double t = -std::cos(M_PI * i / n);
    for (int it = 0; it < 100; ++it) {
      // evaluate P_n and P_n' by recurrence
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double d2p = (2.0 * t * dp - n * (n + 1) * p1) / (1.0 - t * t);
      const double dt = dp / d2p;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = t;
  }
  return x;
}

struct NodeGrid {
  int n;
  std::vector<Vec2> pts; // (n+1)^2 tensor grid, row-major in j
  Vec2 at(int i, int j) const { return pts[grid_vertex(i, j, n)]; }
};

inline NodeGrid uniform_grid(int n) {
  NodeGrid g;
  g.n = n;
  g.pts.resize((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      g.pts[grid_vertex(i, j, n)] = Vec2(-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n);
  return g;
}

/// Gauss-Lobatto spaced grid with interior nodes displaced by a seeded
/// uniform amount of at most `frac` times the nearest-neighbour distance.
inline NodeGrid graded_grid(int n, std::uint64_t seed, double frac = 0.2) {
  NodeGrid g;
  g.n = n;
  g.pts.resize((n + 1) * (n + 1));
  const auto nodes = gauss_lobatto_nodes(n);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      g.pts[grid_vertex(i, j, n)] = Vec2(nodes[i], nodes[j]);
  SplitMix64 rng(seed);
  for (int j = 1; j < n; ++j) {
    for (int i = 1; i < n; ++i) {
      double dmin = std::min(std::min(nodes[i] - nodes[i - 1], nodes[i + 1] - nodes[i]),
                             std::min(nodes[j] - nodes[j - 1], nodes[j + 1] - nodes[j]));
      Vec2& p = g.pts[grid_vertex(i, j, n)];
      p.x() += frac * dmin * rng.sym();
      p.y() += frac * dmin * rng.sym();
    }
  }
  return g;
}

inline Mesh quads_from_grid(const NodeGrid& g) {
  Mesh m;
  m.vertices = g.pts;
  const int n = g.n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      m.elements.push_back({grid_vertex(i, j, n), grid_vertex(i + 1, j, n),
                            grid_vertex(i + 1, j + 1, n), grid_vertex(i, j + 1, n)});
  m.finalize();
  return m;
}

inline double tri_area2(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
}

/// Splits each grid quad along a diagonal. `fixed` keeps the same diagonal
/// everywhere; otherwise the shorter valid diagonal is used (needed once
/// jitter makes some quads non-convex).
inline Mesh tris_from_grid(const NodeGrid& g, bool fixed) {
  Mesh m;
  m.vertices = g.pts;
  const int n = g.n;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = grid_vertex(i, j, n), v10 = grid_vertex(i + 1, j, n);
      const int v11 = grid_vertex(i + 1, j + 1, n), v01 = grid_vertex(i, j + 1, n);
      bool diag00_11;
      if (fixed) {
        diag00_11 = true;
      } else {
        const bool ok00 = tri_area2(g.pts[v00], g.pts[v10], g.pts[v11]) > 0 &&
                          tri_area2(g.pts[v00], g.pts[v11], g.pts[v01]) > 0;
        const bool ok10 = tri_area2(g.pts[v00], g.pts[v10], g.pts[v01]) > 0 &&
                          tri_area2(g.pts[v10], g.pts[v11], g.pts[v01]) > 0;
        const double d0 = (g.pts[v11] - g.pts[v00]).norm();
        const double d1 = (g.pts[v01] - g.pts[v10]).norm();
        diag00_11 = ok00 && (!ok10 || d0 <= d1);
      }
      if (diag00_11) {
        m.elements.push_back({v00, v10, v11});
        m.elements.push_back({v00, v11, v01});
      } else {
        m.elements.push_back({v00, v10, v01});
        m.elements.push_back({v10, v11, v01});
      }
    }
  }
  m.finalize();
  return m;
}

} // namespace detail

/// Structured quadrilateral family on (-1,1)^2 with n x n cells. The
/// trapezoidal kind slants the interior horizontal vertex rows up and down
/// alternately by `distortion` of the cell height.
inline Mesh gen_quad_family(int n, double distortion = 0.1,
                            QuadKind kind = QuadKind::Trapezoidal) {
  if (n < 1) throw std::invalid_argument("gen_quad_family: n must be >= 1");
  if (distortion < 0.0 || distortion >= 0.5)
    throw std::invalid_argument("gen_quad_family: distortion must be in [0, 0.5)");
  detail::NodeGrid g = detail::uniform_grid(n);
  if (kind == QuadKind::Trapezoidal) {
    const double dy = 2.0 / n;
    for (int j = 1; j < n; ++j)
      for (int i = 0; i <= n; ++i)
        g.pts[detail::grid_vertex(i, j, n)].y() += (i % 2 == 0 ? 1.0 : -1.0) * distortion * dy;
  }
  return detail::quads_from_grid(g);
}

/// Graded quadrilateral family: Gauss-Lobatto node spacing plus seeded jitter.
inline Mesh gen_graded_quad(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_graded_quad: n must be >= 1");
  for (int attempt = 0; attempt < 10; ++attempt) {
    try {
      return detail::quads_from_grid(detail::graded_grid(n, seed + attempt));
    } catch (const std::runtime_error&) {
      // jitter produced a tangled quad, redraw
    }
  }
  throw std::runtime_error("gen_graded_quad: failed to produce a valid mesh in 10 attempts");
}

namespace detail {

/// Bowyer-Watson Delaunay triangulation. Point sets come from jittered
/// grids, so near-degenerate configurations are rare; incircle tests are
/// done in long double.
inline std::vector<std::array<int, 3>> delaunay(const std::vector<Vec2>& pts) {
  struct Tri {
    int v[3];
    bool alive = true;
  };
  double lo = 1e300, hi = -1e300;
  for (const auto& p : pts) {
    lo = std::min(lo, std::min(p.x(), p.y()));
    hi = std::max(hi, std::max(p.x(), p.y()));
  }
  const double span = hi - lo;
  const int n = static_cast<int>(pts.size());
  std::vector<Vec2> q = pts;
  q.emplace_back(lo - 10 * span, lo - 9 * span);
  q.emplace_back(hi + 10 * span, lo - 9 * span);
  q.emplace_back(lo + 0.5 * span, hi + 10 * span);
  std::vector<Tri> tris;
  tris.push_back({{n, n + 1, n + 2}, true});

  auto in_circumcircle = [&q](const Tri& t, const Vec2& p) {
    const long double ax = q[t.v[0]].x() - p.x(), ay = q[t.v[0]].y() - p.y();
    const long double bx = q[t.v[1]].x() - p.x(), by = q[t.v[1]].y() - p.y();
    const long double cx = q[t.v[2]].x() - p.x(), cy = q[t.v[2]].y() - p.y();
    const long double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                            (bx * bx + by * by) * (ax * cy - cx * ay) +
                            (cx * cx + cy * cy) * (ax * by - bx * ay);
    return det > 0;
  };

  for (int ip = 0; ip < n; ++ip) {
    std::map<std::pair<int, int>, int> boundary; // edge -> count
    for (auto& t : tris) {
      if (!t.alive) continue;
      if (in_circumcircle(t, q[ip])) {
        t.alive = false;
        for (int e = 0; e < 3; ++e) {
          auto key = std::minmax(t.v[e], t.v[(e + 1) % 3]);
          boundary[key]++;
        }
      }
    }
    std::vector<std::pair<int, int>> hole;
    for (auto& [edge, cnt] : boundary)
      if (cnt == 1) hole.push_back(edge);
    if (hole.empty()) throw std::runtime_error("delaunay: point insertion failed");
    for (auto [a, b] : hole) {
      Tri t;
      t.v[0] = a;
      t.v[1] = b;
      t.v[2] = ip;
      if (tri_area2(q[a], q[b], q[ip]) < 0) std::swap(t.v[0], t.v[1]);
      if (tri_area2(q[t.v[0]], q[t.v[1]], q[t.v[2]]) <= 0)
        throw std::runtime_error("delaunay: degenerate triangle");
      tris.push_back(t);
    }
    tris.erase(std::remove_if(tris.begin(), tris.end(),
                              [](const Tri& t) { return !t.alive; }),
               tris.end());
  }
  std::vector<std::array<int, 3>> out;
  for (const auto& t : tris)
    if (t.v[0] < n && t.v[1] < n && t.v[2] < n) out.push_back({t.v[0], t.v[1], t.v[2]});
  return out;
}

} // namespace detail

/// Triangular family: either each quad of the uniform grid cut by a fixed
/// diagonal, or a Delaunay triangulation of a jittered grid (seeded; the
/// element count is then mesh-dependent).
inline Mesh gen_tri_family(int n, TriStyle style = TriStyle::SplitQuad,
                           std::uint64_t seed = 0) {
  if (n < 1) throw std::invalid_argument("gen_tri_family: n must be >= 1");
  if (style == TriStyle::SplitQuad)
    return detail::tris_from_grid(detail::uniform_grid(n), true);

  for (int attempt = 0; attempt < 10; ++attempt) {
    try {
      detail::NodeGrid g = detail::uniform_grid(n);
      SplitMix64 rng(seed + attempt);
      const double d = 2.0 / n;
      for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i) {
          Vec2& p = g.pts[detail::grid_vertex(i, j, n)];
          p.x() += 0.25 * d * rng.sym();
          p.y() += 0.25 * d * rng.sym();
        }
      auto tris = detail::delaunay(g.pts);
      Mesh m;
      m.vertices = g.pts;
      for (const auto& t : tris) m.elements.push_back({t[0], t[1], t[2]});
      m.finalize();
      return m;
    } catch (const std::runtime_error&) {
      // redraw with a shifted seed
    }
  }
  throw std::runtime_error("gen_tri_family: triangulation failed in 10 attempts");
}

/// Graded triangular family: Gauss-Lobatto grid with seeded jitter, each
/// quad cut along its shorter valid diagonal.
inline Mesh gen_graded_tri(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_graded_tri: n must be >= 1");
  for (int attempt = 0; attempt < 10; ++attempt) {
    try {
      return detail::tris_from_grid(detail::graded_grid(n, seed + attempt), false);
    } catch (const std::runtime_error&) {
    }
  }
  throw std::runtime_error("gen_graded_tri: failed to produce a valid mesh in 10 attempts");
}

enum class Side { Left, Right, Top, Bottom };

inline Side side_from_string(const std::string& s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  if (s == "top") return Side::Top;
  if (s == "bottom") return Side::Bottom;
  throw std::invalid_argument("unknown side '" + s +
                              "'; a Neumann side is required (left|right|top|bottom)");
}

/// Tags boundary faces on the chosen side as Neumann and every other
/// boundary face as Dirichlet. Faces straddling a corner are classified by
/// midpoint. A Neumann side is mandatory: with Dirichlet data everywhere the
/// pressure constant would be left undetermined.
inline void classify_boundary(Mesh& mesh, Side neumann_side) {
  int n_neu = 0;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (!mesh.is_boundary_face(f)) {
      mesh.faces[f].tag = FaceTag::Interior;
      continue;
    }
    const Vec2 mid = mesh.face_midpoint(f);
    const double tol = 1e-12;
    bool neumann = false;
    switch (neumann_side) {
      case Side::Left: neumann = std::abs(mid.x() + 1.0) < tol; break;
      case Side::Right: neumann = std::abs(mid.x() - 1.0) < tol; break;
      case Side::Top: neumann = std::abs(mid.y() - 1.0) < tol; break;
      case Side::Bottom: neumann = std::abs(mid.y() + 1.0) < tol; break;
    }
    mesh.faces[f].tag = neumann ? FaceTag::Neumann : FaceTag::Dirichlet;
    if (neumann) ++n_neu;
  }
  if (n_neu == 0)
    throw std::runtime_error("classify_boundary: no face found on the requested Neumann side");
}

// ---------------------------------------------------------------------------
// plain-text format: `pmesh2 v1 <nv> <ne> <nf>` header, `v x y` vertices,
// `e i0 i1 ... ik` CCW elements, optional `f a b left right tag` faces with
// tag in {i,d,n} and right=-1 on the boundary. nf=0 lets the reader derive
// the faces (boundary tagged Dirichlet).
// ---------------------------------------------------------------------------

inline void write_mesh(const Mesh& mesh, std::ostream& os) {
  os.precision(17);
  os << "pmesh2 v1 " << mesh.n_vertices() << ' ' << mesh.n_elements() << ' '
     << mesh.n_faces() << '\n';
  for (const auto& v : mesh.vertices) os << "v " << v.x() << ' ' << v.y() << '\n';
  for (const auto& e : mesh.elements) {
    os << 'e';
    for (int i : e) os << ' ' << i;
    os << '\n';
  }
  for (const auto& f : mesh.faces) {
    const char tag = f.tag == FaceTag::Interior ? 'i' : (f.tag == FaceTag::Dirichlet ? 'd' : 'n');
    os << "f " << f.a << ' ' << f.b << ' ' << f.left << ' ' << f.right << ' ' << tag << '\n';
  }
}

inline void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_mesh: cannot open '" + path + "'");
  write_mesh(mesh, os);
}

inline Mesh read_mesh(std::istream& is) {
  auto fail = [](int line, const std::string& what) {
    throw std::runtime_error("read_mesh: line " + std::to_string(line) + ": " + what);
  };
  std::string line;
  int lineno = 0;
  if (!std::getline(is, line)) fail(1, "empty file");
  ++lineno;
  std::istringstream hs(line);
  std::string magic, version;
  int nv = 0, ne = 0, nf = 0;
  if (!(hs >> magic >> version >> nv >> ne >> nf) || magic != "pmesh2" || version != "v1")
    fail(lineno, "malformed header, expected 'pmesh2 v1 <nv> <ne> <nf>'");
  if (ne == 0) fail(lineno, "no elements");

  Mesh mesh;
  mesh.vertices.reserve(nv);
  mesh.elements.reserve(ne);
  auto next_record = [&](char want) -> std::istringstream {
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string kind;
      ls >> kind;
      if (kind.size() != 1 || kind[0] != want)
        fail(lineno, std::string("expected a '") + want + "' record");
      return ls;
    }
    fail(lineno + 1, std::string("unexpected end of file, wanted a '") + want + "' record");
    return std::istringstream();
  };

  for (int i = 0; i < nv; ++i) {
    auto ls = next_record('v');
    double x, y;
    if (!(ls >> x >> y)) fail(lineno, "malformed vertex");
    mesh.vertices.emplace_back(x, y);
  }
  for (int i = 0; i < ne; ++i) {
    auto ls = next_record('e');
    std::vector<int> loop;
    int v;
    while (ls >> v) {
      if (v < 0 || v >= nv) fail(lineno, "vertex index " + std::to_string(v) + " out of range");
      loop.push_back(v);
    }
    if (loop.size() < 3) fail(lineno, "element with fewer than 3 vertices");
    mesh.elements.push_back(std::move(loop));
  }
  if (nf == 0) {
    mesh.finalize();
    return mesh;
  }
  for (int i = 0; i < nf; ++i) {
    auto ls = next_record('f');
    Face f;
    std::string tag;
    if (!(ls >> f.a >> f.b >> f.left >> f.right >> tag)) fail(lineno, "malformed face");
    if (f.a < 0 || f.a >= nv || f.b < 0 || f.b >= nv) fail(lineno, "face vertex out of range");
    if (f.left < 0 || f.left >= ne)
      fail(lineno, "face references element " + std::to_string(f.left) + " of " +
                       std::to_string(ne));
    if (f.right >= ne)
      fail(lineno, "face references element " + std::to_string(f.right) + " of " +
                       std::to_string(ne));
    if (tag == "i") f.tag = FaceTag::Interior;
    else if (tag == "d") f.tag = FaceTag::Dirichlet;
    else if (tag == "n") f.tag = FaceTag::Neumann;
    else fail(lineno, "unknown face tag '" + tag + "'");
    if (f.right < 0 && f.tag == FaceTag::Interior)
      fail(lineno, "boundary face tagged interior");
    if (f.right >= 0 && f.tag != FaceTag::Interior) fail(lineno, "interior face carries a boundary tag");
    mesh.faces.push_back(f);
  }
  mesh.finalize_with_faces();
  return mesh;
}

inline Mesh read_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_mesh: cannot open '" + path + "'");
  return read_mesh(is);
}

} // namespace pstokes

#endif
