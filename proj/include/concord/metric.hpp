#pragma once

#include <cmath>
#include <memory>
#include <set>
#include <string>
#include <utility>

#include "concord/fem.hpp"
#include "concord/mesh.hpp"

namespace concord {

struct ScalarField {
  std::shared_ptr<const DiskMesh> mesh;
  Eigen::VectorXd values;  // one value per vertex
};

struct BoundaryField {
  std::shared_ptr<const DiskMesh> mesh;
  Eigen::VectorXd values;  // one value per boundary_loop entry
};

/// Conformal metric h = e^{2w} delta on a disk mesh, stored through the
/// per-vertex factor w. Immutable after creation; all operations are pure.
struct ConformalMetric {
  std::shared_ptr<const DiskMesh> mesh;
  Eigen::VectorXd w;
  std::string label;

  int level() const { return mesh->refinement_level; }

  void check() const {
    require(static_cast<int>(w.size()) == mesh->num_vertices(), errc::incompatible_input,
            "conformal factor length does not match vertex count");
    require(w.allFinite(), errc::invalid_mesh, "non-finite conformal factor");
  }

  Eigen::VectorXd area_density() const { return (2.0 * w.array()).exp(); }
};

inline ConformalMetric flat_metric(std::shared_ptr<const DiskMesh> mesh) {
  return {mesh, Eigen::VectorXd::Zero(mesh->num_vertices()), "flat"};
}

/// Stereographic pullback of the round upper hemisphere: w = log(2/(1+|x|^2)).
inline ConformalMetric hemisphere_metric(std::shared_ptr<const DiskMesh> mesh) {
  Eigen::VectorXd w(mesh->num_vertices());
  for (int v = 0; v < mesh->num_vertices(); ++v)
    w[v] = std::log(2.0 / (1.0 + mesh->vertices[v].squaredNorm()));
  return {std::move(mesh), std::move(w), "hemisphere"};
}

inline ConformalMetric scaled_flat_metric(std::shared_ptr<const DiskMesh> mesh, double c) {
  require(std::isfinite(c) && c > 0.0, errc::config, "scaled_flat needs c > 0");
  Eigen::VectorXd w = Eigen::VectorXd::Constant(mesh->num_vertices(), std::log(c));
  return {std::move(mesh), std::move(w), "scaled_flat"};
}

/// Gaussian bump w = a exp(-|x-x0|^2/s^2) with x0 = (r0, 0), faded out by a
/// C^2 smoothstep between distances 2s and 3s so the support is compact.
inline ConformalMetric bump_metric(std::shared_ptr<const DiskMesh> mesh, double a, double r0,
                                   double s) {
  require(std::isfinite(a) && std::isfinite(r0) && std::isfinite(s) && s > 0.0, errc::config,
          "bump needs finite parameters, s > 0");
  Eigen::VectorXd w(mesh->num_vertices());
  for (int v = 0; v < mesh->num_vertices(); ++v) {
    double d = (mesh->vertices[v] - Vec2(r0, 0.0)).norm();
    double cut = 1.0;
    if (d >= 3.0 * s) {
      cut = 0.0;
    } else if (d > 2.0 * s) {
      double x = 1.0 - (d - 2.0 * s) / s;  // 1 at d=2s, 0 at d=3s
      cut = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
    }
    w[v] = a * std::exp(-d * d / (s * s)) * cut;
  }
  return {std::move(mesh), std::move(w), "bump"};
}

/// Parse "flat", "hemisphere", "scaled_flat:<c|sqrt2>", "bump:a,r0,s".
inline ConformalMetric named_metric(std::shared_ptr<const DiskMesh> mesh, const std::string& spec) {
  auto colon = spec.find(':');
  std::string name = spec.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto parse_num = [&](const std::string& s) {
    if (s == "sqrt2") return std::sqrt(2.0);
    try {
      size_t pos = 0;
      double v = std::stod(s, &pos);
      require(pos == s.size(), errc::config, "trailing characters in metric parameter");
      return v;
    } catch (const Error&) {
      throw;
    } catch (...) {
      fail(errc::config, "bad metric parameter '" + s + "'");
    }
  };
  if (name == "flat") return flat_metric(std::move(mesh));
  if (name == "hemisphere") return hemisphere_metric(std::move(mesh));
  if (name == "scaled_flat") return scaled_flat_metric(std::move(mesh), parse_num(args));
  if (name == "bump") {
    double p[3];
    int n = 0;
    size_t start = 0;
    while (n < 3) {
      size_t comma = args.find(',', start);
      p[n++] = parse_num(args.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    require(n == 3, errc::config, "bump needs three parameters a,r0,s");
    return bump_metric(std::move(mesh), p[0], p[1], p[2]);
  }
  fail(errc::config, "unknown metric name '" + name + "'");
}

/// Total area sum_T area_T * mean(e^{2w} over corners); equals the integral
/// of the P1 interpolant of the area density.
inline double total_area(const ConformalMetric& h) {
  h.check();
  const DiskMesh& m = *h.mesh;
  Eigen::VectorXd rho = h.area_density();
  double A = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    A += fem::tri_geom(m, t).area * (rho[tri[0]] + rho[tri[1]] + rho[tri[2]]) / 3.0;
  }
  return A;
}

/// Pointwise flat Laplacian of a nodal field (see fem::LaplacianRecovery).
inline Eigen::VectorXd laplacian_field(const DiskMesh& m, const Eigen::VectorXd& f) {
  return fem::LaplacianRecovery(m)(f);
}

/// Gauss curvature K = -e^{-2w} Laplace_flat(w); scalar curvature is R = 2K.
inline ScalarField gauss_curvature(const ConformalMetric& h) {
  h.check();
  Eigen::VectorXd lap = laplacian_field(*h.mesh, h.w);
  Eigen::VectorXd K = (-2.0 * h.w.array()).exp() * (-lap.array());
  return {h.mesh, std::move(K)};
}

/// Geodesic curvature of the boundary: kappa = e^{-w} (1 + d_eta w), with the
/// unit circle's curvature 1 imposed analytically and d_eta w from the shared
/// fan-gradient convention. For n = 2 this is the boundary mean curvature.
inline BoundaryField geodesic_curvature(const ConformalMetric& h) {
  h.check();
  const DiskMesh& m = *h.mesh;
  Eigen::VectorXd d = fem::boundary_radial_derivative(m, h.w);
  Eigen::VectorXd kappa(m.num_boundary());
  for (int i = 0; i < m.num_boundary(); ++i)
    kappa[i] = std::exp(-h.w[m.boundary_loop[i]]) * (1.0 + d[i]);
  return {h.mesh, std::move(kappa)};
}

/// Integral of the Gauss curvature plus the boundary integral of the geodesic
/// curvature, using the natural lumped/trapezoid quadratures (for testing the
/// closed-form total of 2*pi).
inline double gauss_bonnet_total(const ConformalMetric& h) {
  const DiskMesh& m = *h.mesh;
  ScalarField K = gauss_curvature(h);
  Eigen::VectorXd massh = fem::lumped_mass(m).array() * h.area_density().array();
  double total = K.values.dot(massh);
  BoundaryField kappa = geodesic_curvature(h);
  Eigen::VectorXd s = fem::lumped_boundary_length(m);
  for (int i = 0; i < m.num_boundary(); ++i) {
    int v = m.boundary_loop[i];
    total += kappa.values[i] * std::exp(h.w[v]) * s[v];
  }
  return total;
}

}  // namespace concord
