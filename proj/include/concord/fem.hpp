#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <set>
#include <vector>

#include "concord/mesh.hpp"

namespace concord {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

namespace fem {

struct TriGeom {
  double area;
  Eigen::Matrix<double, 2, 3> grad;  // P1 basis gradients, one column per vertex
};

inline TriGeom tri_geom(const DiskMesh& m, int t) {
  const Vec2& p0 = m.vertices[m.triangles[t][0]];
  const Vec2& p1 = m.vertices[m.triangles[t][1]];
  const Vec2& p2 = m.vertices[m.triangles[t][2]];
  double two_a = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
  TriGeom g;
  g.area = 0.5 * two_a;
  auto rot = [](const Vec2& v) { return Vec2(-v.y(), v.x()); };
  g.grad.col(0) = rot(p2 - p1) / two_a;
  g.grad.col(1) = rot(p0 - p2) / two_a;
  g.grad.col(2) = rot(p1 - p0) / two_a;
  return g;
}

/// Gradient of a P1 field on triangle t, written so that adding a constant to
/// the field leaves the result bit-identical.
inline Vec2 field_gradient(const TriGeom& g, double f0, double f1, double f2) {
  return (f1 - f0) * g.grad.col(1) + (f2 - f0) * g.grad.col(2);
}

/// Flat stiffness matrix: L_ab = sum_T area * grad(phi_a) . grad(phi_b).
inline SpMat stiffness_matrix(const DiskMesh& m) {
  std::vector<Triplet> trips;
  trips.reserve(9 * m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    TriGeom g = tri_geom(m, t);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        trips.emplace_back(m.triangles[t][a], m.triangles[t][b],
                           g.area * g.grad.col(a).dot(g.grad.col(b)));
  }
  SpMat L(m.num_vertices(), m.num_vertices());
  L.setFromTriplets(trips.begin(), trips.end());
  L.makeCompressed();
  return L;
}

/// Flat lumped vertex mass: |T|/3 to each corner.
inline Eigen::VectorXd lumped_mass(const DiskMesh& m) {
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(m.num_vertices());
  for (int t = 0; t < m.num_triangles(); ++t) {
    double a3 = tri_geom(m, t).area / 3.0;
    for (int k = 0; k < 3; ++k) mass[m.triangles[t][k]] += a3;
  }
  return mass;
}

/// Consistent mass matrix with a P1-interpolated weight rho:
/// M_ab = sum_T sum_c rho_c int_T phi_a phi_b phi_c (exact for cubics).
inline SpMat weighted_mass_matrix(const DiskMesh& m, const Eigen::VectorXd& rho) {
  std::vector<Triplet> trips;
  trips.reserve(9 * m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    double A = tri_geom(m, t).area;
    double r[3] = {rho[tri[0]], rho[tri[1]], rho[tri[2]]};
    for (int a = 0; a < 3; ++a) {
      int b1 = (a + 1) % 3, b2 = (a + 2) % 3;
      trips.emplace_back(tri[a], tri[a], A * (r[a] / 10.0 + (r[b1] + r[b2]) / 30.0));
      trips.emplace_back(tri[a], tri[b1], A * ((r[a] + r[b1]) / 30.0 + r[b2] / 60.0));
      trips.emplace_back(tri[a], tri[b2], A * ((r[a] + r[b2]) / 30.0 + r[b1] / 60.0));
    }
  }
  SpMat M(m.num_vertices(), m.num_vertices());
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

/// Weak form of the conformal curvature term: C(u,v) = int grad(w) . grad(uv).
/// Exact for P1 u, v, w; symmetric; annihilates constants in w by construction.
inline SpMat curvature_form_matrix(const DiskMesh& m, const Eigen::VectorXd& w) {
  std::vector<Triplet> trips;
  trips.reserve(9 * m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    TriGeom g = tri_geom(m, t);
    Vec2 gw = field_gradient(g, w[tri[0]], w[tri[1]], w[tri[2]]);
    double ga[3];
    for (int a = 0; a < 3; ++a) ga[a] = gw.dot(g.grad.col(a));
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        trips.emplace_back(tri[a], tri[b], g.area / 3.0 * (ga[a] + ga[b]));
  }
  SpMat C(m.num_vertices(), m.num_vertices());
  C.setFromTriplets(trips.begin(), trips.end());
  C.makeCompressed();
  return C;
}

/// Flat boundary mass matrix over the polygonal boundary edges.
inline SpMat boundary_mass_matrix(const DiskMesh& m) {
  std::vector<Triplet> trips;
  for (auto [i, j] : m.boundary_edges()) {
    double len = (m.vertices[i] - m.vertices[j]).norm();
    trips.emplace_back(i, i, len / 3.0);
    trips.emplace_back(j, j, len / 3.0);
    trips.emplace_back(i, j, len / 6.0);
    trips.emplace_back(j, i, len / 6.0);
  }
  SpMat S(m.num_vertices(), m.num_vertices());
  S.setFromTriplets(trips.begin(), trips.end());
  S.makeCompressed();
  return S;
}

/// Lumped boundary length per vertex (half of each incident boundary edge);
/// zero at interior vertices.
inline Eigen::VectorXd lumped_boundary_length(const DiskMesh& m) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m.num_vertices());
  for (auto [i, j] : m.boundary_edges()) {
    double half = 0.5 * (m.vertices[i] - m.vertices[j]).norm();
    s[i] += half;
    s[j] += half;
  }
  return s;
}

/// Area-weighted fan average of per-triangle P1 gradients at every vertex.
inline std::vector<Vec2> vertex_gradients(const DiskMesh& m, const Eigen::VectorXd& f) {
  std::vector<Vec2> g(m.num_vertices(), Vec2::Zero());
  Eigen::VectorXd wsum = Eigen::VectorXd::Zero(m.num_vertices());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    TriGeom tg = tri_geom(m, t);
    Vec2 gf = field_gradient(tg, f[tri[0]], f[tri[1]], f[tri[2]]);
    for (int k = 0; k < 3; ++k) {
      g[tri[k]] += tg.area * gf;
      wsum[tri[k]] += tg.area;
    }
  }
  for (int v = 0; v < m.num_vertices(); ++v)
    if (wsum[v] > 0.0) g[v] /= wsum[v];
  return g;
}

/// Superconvergent vertex gradients: least-squares quadratic fit of the
/// field over the two-ring of each vertex, differentiated at the vertex.
/// Unlike the fan average this stays second-order on distorted patches, so
/// it is the right field for flow integration. The fitting weights depend
/// only on the mesh and are precomputed.
class GradientRecovery {
public:
  explicit GradientRecovery(const DiskMesh& m) : mesh_(m) {
    const int n = m.num_vertices();
    std::vector<std::vector<int>> ring(n);
    {
      std::vector<std::set<int>> adj(n);
      for (const auto& t : m.triangles)
        for (int k = 0; k < 3; ++k) {
          adj[t[k]].insert(t[(k + 1) % 3]);
          adj[t[k]].insert(t[(k + 2) % 3]);
        }
      for (int v = 0; v < n; ++v) ring[v].assign(adj[v].begin(), adj[v].end());
    }
    patch_.resize(n);
    wx_.resize(n);
    wy_.resize(n);
    std::set<int> patch;
    for (int v = 0; v < n; ++v) {
      patch.clear();
      patch.insert(ring[v].begin(), ring[v].end());
      for (int u : ring[v]) patch.insert(ring[u].begin(), ring[u].end());
      patch.erase(v);
      patch_[v].assign(patch.begin(), patch.end());
      double hs = 0.0;
      for (int u : ring[v]) hs = std::max(hs, (m.vertices[u] - m.vertices[v]).norm());
      const int np = static_cast<int>(patch_[v].size());
      Eigen::MatrixXd A(np, 5);
      for (int r = 0; r < np; ++r) {
        Vec2 d = (m.vertices[patch_[v][r]] - m.vertices[v]) / hs;
        A.row(r) << d.x(), d.y(), 0.5 * d.x() * d.x(), d.x() * d.y(), 0.5 * d.y() * d.y();
      }
      Eigen::MatrixXd pinv =
          (A.transpose() * A).ldlt().solve(Eigen::MatrixXd(A.transpose()));
      wx_[v] = pinv.row(0) / hs;
      wy_[v] = pinv.row(1) / hs;
    }
  }

  std::vector<Vec2> operator()(const Eigen::VectorXd& f) const {
    std::vector<Vec2> g(mesh_.num_vertices());
    for (int v = 0; v < mesh_.num_vertices(); ++v) {
      double gx = 0.0, gy = 0.0;
      for (size_t r = 0; r < patch_[v].size(); ++r) {
        double df = f[patch_[v][r]] - f[v];
        gx += wx_[v][r] * df;
        gy += wy_[v][r] * df;
      }
      g[v] = Vec2(gx, gy);
    }
    return g;
  }

private:
  const DiskMesh& mesh_;
  std::vector<std::vector<int>> patch_;
  std::vector<Eigen::RowVectorXd> wx_, wy_;
};

/// Pointwise flat Laplacian by the same two-ring least-squares recovery,
/// cubic at interior vertices and quadratic at boundary vertices (the
/// one-sided cubic is ill-conditioned). The weak lumped-mass rows are
/// second-order only on translation-invariant patches; this mesh family
/// freezes an O(1) patch distortion into the annulus between the inner
/// lattice and the projected boundary, where those rows stagnate near 4%
/// for smooth data, while the recovery stays second-order in the interior.
class LaplacianRecovery {
public:
  explicit LaplacianRecovery(const DiskMesh& m) : mesh_(m) {
    const int n = m.num_vertices();
    std::vector<std::vector<int>> ring(n);
    {
      std::vector<std::set<int>> adj(n);
      for (const auto& t : m.triangles)
        for (int k = 0; k < 3; ++k) {
          adj[t[k]].insert(t[(k + 1) % 3]);
          adj[t[k]].insert(t[(k + 2) % 3]);
        }
      for (int v = 0; v < n; ++v) ring[v].assign(adj[v].begin(), adj[v].end());
    }
    patch_.resize(n);
    wl_.resize(n);
    std::set<int> patch;
    for (int v = 0; v < n; ++v) {
      patch.clear();
      patch.insert(ring[v].begin(), ring[v].end());
      for (int u : ring[v]) patch.insert(ring[u].begin(), ring[u].end());
      patch.erase(v);
      patch_[v].assign(patch.begin(), patch.end());
      double hs = 0.0;
      for (int u : ring[v]) hs = std::max(hs, (m.vertices[u] - m.vertices[v]).norm());
      const bool cubic = !m.on_boundary[v];
      const int nc = cubic ? 9 : 5;
      const int np = static_cast<int>(patch_[v].size());
      Eigen::MatrixXd A(np, nc);
      for (int r = 0; r < np; ++r) {
        Vec2 d = (m.vertices[patch_[v][r]] - m.vertices[v]) / hs;
        double x = d.x(), y = d.y();
        A(r, 0) = x;
        A(r, 1) = y;
        A(r, 2) = 0.5 * x * x;
        A(r, 3) = x * y;
        A(r, 4) = 0.5 * y * y;
        if (cubic) {
          A(r, 5) = x * x * x;
          A(r, 6) = x * x * y;
          A(r, 7) = x * y * y;
          A(r, 8) = y * y * y;
        }
      }
      Eigen::MatrixXd pinv = (A.transpose() * A).ldlt().solve(Eigen::MatrixXd(A.transpose()));
      wl_[v] = (pinv.row(2) + pinv.row(4)) / (hs * hs);  // f_xx + f_yy
    }
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& f) const {
    Eigen::VectorXd lap(mesh_.num_vertices());
    for (int v = 0; v < mesh_.num_vertices(); ++v) {
      double acc = 0.0;
      for (size_t r = 0; r < patch_[v].size(); ++r)
        acc += wl_[v][r] * (f[patch_[v][r]] - f[v]);
      lap[v] = acc;
    }
    return lap;
  }

private:
  const DiskMesh& mesh_;
  std::vector<std::vector<int>> patch_;
  std::vector<Eigen::RowVectorXd> wl_;
};

/// Outward radial derivative of a P1 field at each boundary vertex, in
/// boundary_loop order. This is the project-wide normal-derivative
/// convention: P1 gradients on the adjacent fan, area-averaged, dotted with
/// the radial direction.
inline Eigen::VectorXd boundary_radial_derivative(const DiskMesh& m, const Eigen::VectorXd& f) {
  auto g = vertex_gradients(m, f);
  Eigen::VectorXd d(m.num_boundary());
  for (int i = 0; i < m.num_boundary(); ++i) {
    int v = m.boundary_loop[i];
    d[i] = g[v].dot(m.vertices[v].normalized());
  }
  return d;
}

/// Load vector of a P1 boundary field against the vertex hats:
/// out_i = sum_{boundary edges e} int_e (P1 d) phi_i ds. Input d is indexed
/// like boundary_loop; output is a full vertex vector.
inline Eigen::VectorXd boundary_flux_load(const DiskMesh& m, const Eigen::VectorXd& d) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.num_vertices());
  int nb = m.num_boundary();
  for (int i = 0; i < nb; ++i) {
    int a = m.boundary_loop[i], b = m.boundary_loop[(i + 1) % nb];
    double len = (m.vertices[a] - m.vertices[b]).norm();
    out[a] += len * (2.0 * d[i] + d[(i + 1) % nb]) / 6.0;
    out[b] += len * (d[i] + 2.0 * d[(i + 1) % nb]) / 6.0;
  }
  return out;
}

}  // namespace fem
}  // namespace concord
