#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "concord/errors.hpp"

namespace concord {

using Vec2 = Eigen::Vector2d;

struct QualityReport {
  double min_angle_deg = 0.0;
  double max_angle_deg = 0.0;
  double min_edge = 0.0;
  double max_aspect = 0.0;  // longest edge / shortest edge over all triangles
};

/// Triangulation of the closed unit disk with an explicitly ordered,
/// counterclockwise boundary loop. Immutable after construction; generation
/// is deterministic, so equal refinement levels yield bit-identical meshes.
///
/// Level 0 is a hexagonal fan (center vertex + 6 boundary vertices); each
/// refinement performs uniform 1->4 subdivision and projects new boundary
/// midpoints radially onto the unit circle. Vertices of level L keep their
/// indices and coordinates in level L+1.
class DiskMesh {
public:
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<int> boundary_loop;             // counterclockwise closed cycle
  int refinement_level = 0;

  // Derived connectivity, filled by finalize().
  std::vector<char> on_boundary;                    // per vertex
  std::vector<std::array<int, 3>> tri_neighbors;    // neighbor[k] shares the edge opposite vertex k; -1 on boundary
  std::vector<std::vector<int>> vertex_tris;        // incident triangles per vertex
  std::vector<int> boundary_pos;                    // vertex -> index in boundary_loop, -1 if interior

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_boundary() const { return static_cast<int>(boundary_loop.size()); }

  int num_edges() const {
    std::map<std::pair<int, int>, int> edges;
    for (const auto& t : triangles)
      for (int k = 0; k < 3; ++k) {
        int a = t[k], b = t[(k + 1) % 3];
        edges[{std::min(a, b), std::max(a, b)}]++;
      }
    return static_cast<int>(edges.size());
  }

  double signed_area(int t) const {
    const Vec2& a = vertices[triangles[t][0]];
    const Vec2& b = vertices[triangles[t][1]];
    const Vec2& c = vertices[triangles[t][2]];
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
  }

  /// Consecutive boundary vertex pairs, counterclockwise.
  std::vector<std::pair<int, int>> boundary_edges() const {
    std::vector<std::pair<int, int>> out;
    int nb = num_boundary();
    out.reserve(nb);
    for (int i = 0; i < nb; ++i) out.emplace_back(boundary_loop[i], boundary_loop[(i + 1) % nb]);
    return out;
  }

  void finalize();
  void validate() const;
};

inline void DiskMesh::finalize() {
  const int nv = num_vertices();
  const int nt = num_triangles();

  // Edge -> incident triangles.
  std::map<std::pair<int, int>, std::array<int, 2>> edge_tris;
  for (int t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) {
      int a = triangles[t][(k + 1) % 3], b = triangles[t][(k + 2) % 3];
      auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = edge_tris.find(key);
      if (it == edge_tris.end())
        edge_tris[key] = {t, -1};
      else
        it->second[1] = t;
    }

  tri_neighbors.assign(nt, {-1, -1, -1});
  for (int t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) {
      int a = triangles[t][(k + 1) % 3], b = triangles[t][(k + 2) % 3];
      auto& inc = edge_tris[{std::min(a, b), std::max(a, b)}];
      tri_neighbors[t][k] = (inc[0] == t) ? inc[1] : inc[0];
    }

  on_boundary.assign(nv, 0);
  // Directed boundary edges: each appears in exactly one triangle, with the
  // interior on its left, so following them walks the loop counterclockwise.
  std::map<int, int> succ;
  for (int t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) {
      int a = triangles[t][(k + 1) % 3], b = triangles[t][(k + 2) % 3];
      if (edge_tris[{std::min(a, b), std::max(a, b)}][1] == -1) {
        succ[a] = b;
        on_boundary[a] = 1;
        on_boundary[b] = 1;
      }
    }

  boundary_loop.clear();
  if (!succ.empty()) {
    int start = succ.begin()->first;  // smallest boundary vertex index
    int v = start;
    do {
      boundary_loop.push_back(v);
      auto it = succ.find(v);
      require(it != succ.end(), errc::invalid_mesh, "boundary loop is not a single cycle");
      v = it->second;
    } while (v != start && boundary_loop.size() <= succ.size());
    require(v == start && boundary_loop.size() == succ.size(), errc::invalid_mesh,
            "boundary loop is not a single closed cycle");
  }

  boundary_pos.assign(nv, -1);
  for (int i = 0; i < num_boundary(); ++i) boundary_pos[boundary_loop[i]] = i;

  vertex_tris.assign(nv, {});
  for (int t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) vertex_tris[triangles[t][k]].push_back(t);
}

inline void DiskMesh::validate() const {
  for (int v : boundary_loop)
    require(std::abs(vertices[v].norm() - 1.0) <= 1e-12, errc::invalid_mesh,
            "boundary vertex off the unit circle");
  for (int t = 0; t < num_triangles(); ++t)
    require(signed_area(t) > 0.0, errc::invalid_mesh, "non-positive triangle area");
  int V = num_vertices(), E = num_edges(), F = num_triangles();
  require(V - E + F == 1, errc::invalid_mesh, "Euler characteristic is not 1");
}

namespace detail {

inline DiskMesh subdivide(const DiskMesh& m) {
  DiskMesh out;
  out.vertices = m.vertices;
  out.refinement_level = m.refinement_level + 1;

  // Boundary edges of the parent mesh (unordered keys).
  std::map<std::pair<int, int>, char> is_bedge;
  for (auto [a, b] : m.boundary_edges()) is_bedge[{std::min(a, b), std::max(a, b)}] = 1;

  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = std::make_pair(std::min(a, b), std::max(a, b));
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec2 p = 0.5 * (m.vertices[a] + m.vertices[b]);
    if (is_bedge.count(key)) p.normalize();  // radial projection of boundary midpoints
    int idx = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p);
    midpoint[key] = idx;
    return idx;
  };

  for (const auto& t : m.triangles) {
    int a = t[0], b = t[1], c = t[2];
    int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
    out.triangles.push_back({a, ab, ca});
    out.triangles.push_back({b, bc, ab});
    out.triangles.push_back({c, ca, bc});
    out.triangles.push_back({ab, bc, ca});
  }
  out.finalize();
  return out;
}

}  // namespace detail

/// Build the structured disk mesh at the given refinement level.
inline std::shared_ptr<const DiskMesh> generate_disk_mesh(int refinement_level) {
  require(refinement_level >= 0 && refinement_level <= 10, errc::bounds,
          "refinement_level must be in [0, 10]");
  DiskMesh m;
  m.refinement_level = 0;
  m.vertices.push_back(Vec2(0.0, 0.0));
  for (int k = 0; k < 6; ++k) {
    double th = 2.0 * M_PI * k / 6.0;
    m.vertices.push_back(Vec2(std::cos(th), std::sin(th)));
  }
  for (int k = 0; k < 6; ++k) m.triangles.push_back({0, 1 + k, 1 + (k + 1) % 6});
  m.finalize();
  for (int l = 0; l < refinement_level; ++l) m = detail::subdivide(m);
  m.validate();
  return std::make_shared<const DiskMesh>(std::move(m));
}

inline QualityReport mesh_quality_report(const DiskMesh& m) {
  QualityReport q;
  q.min_angle_deg = 180.0;
  q.max_angle_deg = 0.0;
  q.min_edge = std::numeric_limits<double>::infinity();
  q.max_aspect = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    require(m.signed_area(t) > 0.0, errc::invalid_mesh, "degenerate triangle");
    double e[3];
    double emin = std::numeric_limits<double>::infinity(), emax = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Vec2& a = m.vertices[m.triangles[t][(k + 1) % 3]];
      const Vec2& b = m.vertices[m.triangles[t][(k + 2) % 3]];
      e[k] = (a - b).norm();
      emin = std::min(emin, e[k]);
      emax = std::max(emax, e[k]);
    }
    for (int k = 0; k < 3; ++k) {
      // angle at vertex k is opposite edge e[k]
      double c = (e[(k + 1) % 3] * e[(k + 1) % 3] + e[(k + 2) % 3] * e[(k + 2) % 3] - e[k] * e[k]) /
                 (2.0 * e[(k + 1) % 3] * e[(k + 2) % 3]);
      double ang = std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI;
      q.min_angle_deg = std::min(q.min_angle_deg, ang);
      q.max_angle_deg = std::max(q.max_angle_deg, ang);
    }
    q.min_edge = std::min(q.min_edge, emin);
    q.max_aspect = std::max(q.max_aspect, emax / emin);
  }
  return q;
}

/// Point location by triangle walking plus P1 evaluation. Points slightly
/// outside the polygonal boundary (advected boundary points sit on the true
/// circle, outside the inscribed polygon) are handled by P1 extrapolation
/// from the nearest boundary triangle.
class P1Locator {
public:
  explicit P1Locator(const DiskMesh& m) : mesh_(m) {}

  struct Hit {
    int tri = -1;
    std::array<double, 3> bary{};
  };

  Hit locate(const Vec2& p, int hint = 0) const {
    int t = (hint >= 0 && hint < mesh_.num_triangles()) ? hint : 0;
    const int max_steps = 4 * mesh_.num_triangles() + 8;
    int last = -1;
    for (int step = 0; step < max_steps; ++step) {
      auto b = barycentric(t, p);
      int worst = 0;
      for (int k = 1; k < 3; ++k)
        if (b[k] < b[worst]) worst = k;
      if (b[worst] >= -1e-12) return {t, b};
      int next = mesh_.tri_neighbors[t][worst];
      if (next < 0 || next == last) return {t, b};  // boundary reached: extrapolate
      last = t;
      t = next;
    }
    return {t, barycentric(t, p)};
  }

  double eval(const Eigen::VectorXd& nodal, const Vec2& p, int* hint = nullptr) const {
    Hit h = locate(p, hint ? *hint : 0);
    if (hint) *hint = h.tri;
    const auto& tri = mesh_.triangles[h.tri];
    return h.bary[0] * nodal[tri[0]] + h.bary[1] * nodal[tri[1]] + h.bary[2] * nodal[tri[2]];
  }

  Vec2 eval2(const std::vector<Vec2>& nodal, const Vec2& p, int* hint = nullptr) const {
    Hit h = locate(p, hint ? *hint : 0);
    if (hint) *hint = h.tri;
    const auto& tri = mesh_.triangles[h.tri];
    return h.bary[0] * nodal[tri[0]] + h.bary[1] * nodal[tri[1]] + h.bary[2] * nodal[tri[2]];
  }

private:
  std::array<double, 3> barycentric(int t, const Vec2& p) const {
    const Vec2& a = mesh_.vertices[mesh_.triangles[t][0]];
    const Vec2& b = mesh_.vertices[mesh_.triangles[t][1]];
    const Vec2& c = mesh_.vertices[mesh_.triangles[t][2]];
    double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    double l1 = ((b.x() - p.x()) * (c.y() - p.y()) - (c.x() - p.x()) * (b.y() - p.y())) / det;
    double l2 = ((c.x() - p.x()) * (a.y() - p.y()) - (a.x() - p.x()) * (c.y() - p.y())) / det;
    return {l1, l2, 1.0 - l1 - l2};
  }

  const DiskMesh& mesh_;
};

}  // namespace concord
