#pragma once

#include <optional>
#include <sstream>

#include "concord/moser.hpp"

namespace concord {

enum class WarpKind { eigen, unit };

inline const char* warp_kind_name(WarpKind k) { return k == WarpKind::eigen ? "eigen" : "unit"; }

/// Warped cylinder metric g = (A u_t)^2 dt^2 + (1 + eps t^2) sigma_t h_t on
/// the product of the disk with [0, 1]. The slice metrics are carried by the
/// path; the lapse is A u_t with u_t either the per-sample principal
/// eigenfunction of sigma_t h_t (eigen) or identically one (unit).
struct CylinderMetric {
  MetricPath path;
  WarpKind warp_kind = WarpKind::eigen;
  std::vector<Eigen::VectorXd> warp;  // u_t per sample, positive
  Eigen::VectorXd lambda;             // per-sample eigenvalue of sigma_t h_t (eigen warps)
  double A = 1.0;
  double epsilon = 0.0;
  std::map<std::string, std::string> provenance;

  int samples() const { return path.samples(); }

  void check() const {
    path.check();
    require(static_cast<int>(warp.size()) == samples(), errc::incompatible_input,
            "warp has wrong number of samples");
    for (const auto& u : warp) {
      require(static_cast<int>(u.size()) == path.mesh->num_vertices(), errc::incompatible_input,
              "warp sample length does not match mesh");
      require(u.minCoeff() > 0.0, errc::invalid_warp, "warp must be positive");
    }
    if (warp_kind == WarpKind::eigen)
      require(lambda.size() == samples(), errc::incompatible_input,
              "eigen warp needs one eigenvalue per sample");
    require(A > 0.0, errc::precondition, "A must be positive");
    require(epsilon >= 0.0, errc::precondition, "epsilon must be non-negative");
  }

  double bend(int i) const { return 1.0 + epsilon * path.times[i] * path.times[i]; }

  /// Conformal factor of the slice metric (1 + eps t^2) sigma_t h_t.
  Eigen::VectorXd slice_factor(int i) const {
    return path.effective_factor(i).array() + 0.5 * std::log(bend(i));
  }
};

struct SliceGeometry {
  int t_index = 0;
  ScalarField II_norm_sq;  // |II_t|^2 = H_t^2 / 2 (pure-trace in 2d)
  ScalarField H_slice;     // H_t = 2 * d(omega)/dt / (A u_t)
  ScalarField dH_dt;
};

/// All certificate fields of a cylinder, with the lapse scale split off:
///   R_g = spatial - time_coeff / A^2,   H_slice = H1 / A,   |II|^2 = H^2/2.
/// spatial and H_cyl do not depend on A.
struct CylinderFields {
  Eigen::VectorXd times;
  std::vector<Eigen::VectorXd> spatial;     // per sample, per vertex
  std::vector<Eigen::VectorXd> time_coeff;  // per sample, per vertex
  std::vector<Eigen::VectorXd> H1;          // slice H at A = 1
  std::vector<Eigen::VectorXd> H_cyl;       // per sample, boundary_loop order

  double min_R(double A, int* at_sample = nullptr, int* at_vertex = nullptr) const {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < spatial.size(); ++i)
      for (int v = 0; v < spatial[i].size(); ++v) {
        double r = spatial[i][v] - time_coeff[i][v] / (A * A);
        if (r < best) {
          best = r;
          if (at_sample) *at_sample = static_cast<int>(i);
          if (at_vertex) *at_vertex = v;
        }
      }
    return best;
  }

  double max_abs_H_cyl() const {
    double m = 0.0;
    for (const auto& h : H_cyl) m = std::max(m, h.cwiseAbs().maxCoeff());
    return m;
  }

  double min_H_cyl() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& h : H_cyl) m = std::min(m, h.minCoeff());
    return m;
  }

  double max_time_term(double A) const {
    double m = 0.0;
    for (const auto& t : time_coeff) m = std::max(m, t.cwiseAbs().maxCoeff() / (A * A));
    return m;
  }

  /// min over vertices of H_slice at sample i, for lapse scale A
  double slice_H_min(int i, double A) const { return H1[i].minCoeff() / A; }
  double slice_H_max_abs(int i, double A) const { return H1[i].cwiseAbs().maxCoeff() / A; }
};

namespace detail {

/// Central time differences, second-order one-sided at the ends.
inline std::vector<Eigen::VectorXd> time_derivative(const std::vector<Eigen::VectorXd>& f,
                                                    double dt) {
  const int n = static_cast<int>(f.size());
  std::vector<Eigen::VectorXd> d(n);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
  for (int i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dt);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
  return d;
}

}  // namespace detail

/// Evaluate the slicing quantities of a cylinder.
///
/// Slices: in conformal gauge the second fundamental form is pure trace,
/// II = (omega_dot / v) k, so H = 2 omega_dot / v and |II|^2 = H^2/2, with
/// omega_dot by time differences of the full slice factor (sigma and the
/// bending term included).
///
/// Scalar curvature: R_g combines the spatial term 2 v^{-1}(-Lap_k v +
/// (1/2) R_k v) with -2 v^{-1} dH/dt - H^2 - |II|^2. For eigen warps the
/// spatial term is evaluated through the variationally consistent rows
/// lambda (M u)_i, normalized by the local weighted mass and the warp value
/// at the row's weighted centroid (second-order up to the boundary). For
/// unit/generic warps it uses the pointwise recovery operators.
///
/// Cylindrical boundary: H_g = bend^{-1/2} e^{-omega} u^{-1} ((1 + d_eta
/// omega) u + d_eta u). Eigen warps evaluate the parenthesis through the
/// eigenproblem's residual rows (the discrete flux of the discrete
/// eigenfunction), so H_cyl inherits solver tolerance; unit warps use the
/// fan-gradient normal derivative.
inline CylinderFields evaluate_cylinder(const CylinderMetric& cyl) {
  cyl.check();
  const DiskMesh& m = *cyl.path.mesh;
  const int n = cyl.samples();
  const int nv = m.num_vertices();
  CylinderFields out;
  out.times = cyl.path.times;

  std::vector<Eigen::VectorXd> omega(n);
  for (int i = 0; i < n; ++i) omega[i] = cyl.slice_factor(i);
  auto omega_dot = detail::time_derivative(omega, cyl.path.dt());

  out.H1.resize(n);
  for (int i = 0; i < n; ++i)
    out.H1[i] = 2.0 * omega_dot[i].array() / cyl.warp[i].array();
  auto H1_dot = detail::time_derivative(out.H1, cyl.path.dt());

  out.time_coeff.resize(n);
  for (int i = 0; i < n; ++i)
    out.time_coeff[i] = 2.0 * H1_dot[i].array() / cyl.warp[i].array() +
                        1.5 * out.H1[i].array() * out.H1[i].array();

  out.spatial.resize(n);
  out.H_cyl.resize(n);
  const Eigen::VectorXd s_lumped = fem::lumped_boundary_length(m);
  const int nb = m.num_boundary();

  if (cyl.warp_kind == WarpKind::eigen) {
    SpMat L = fem::stiffness_matrix(m);
    SpMat S = fem::boundary_mass_matrix(m);
    P1Locator locator(m);
    Eigen::VectorXd X(nv), Y(nv);
    for (int v = 0; v < nv; ++v) {
      X[v] = m.vertices[v].x();
      Y[v] = m.vertices[v].y();
    }
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd& u = cyl.warp[i];
      SpMat B = L + fem::curvature_form_matrix(m, cyl.path.w[i]) + S;
      SpMat M = fem::weighted_mass_matrix(m, (2.0 * cyl.path.w[i].array()).exp());
      Eigen::VectorXd Mu = M * u;
      Eigen::VectorXd M1 = M * Eigen::VectorXd::Ones(nv);
      Eigen::VectorXd MX = M * X, MY = M * Y;
      Eigen::VectorXd sp(nv);
      int hint = 0;
      for (int v = 0; v < nv; ++v) {
        Vec2 centroid(MX[v] / M1[v], MY[v] / M1[v]);
        double u_cen = locator.eval(u, centroid, &hint);
        sp[v] = 2.0 * cyl.lambda[i] / cyl.bend(i) * Mu[v] / (M1[v] * u_cen);
      }
      out.spatial[i] = std::move(sp);

      // residual rows: B u - lambda * sigma * M u (lambda is the effective
      // eigenvalue, whose mass form carries the sigma weight)
      Eigen::VectorXd res = B * u - cyl.lambda[i] * cyl.path.sigma[i] * Mu;
      Eigen::VectorXd omega_b = cyl.path.effective_factor(i);
      Eigen::VectorXd hc(nb);
      double bend_root = std::sqrt(cyl.bend(i));
      for (int b = 0; b < nb; ++b) {
        int v = m.boundary_loop[b];
        hc[b] = std::exp(-omega_b[v]) / bend_root * res[v] / (s_lumped[v] * u[v]);
      }
      out.H_cyl[i] = std::move(hc);
    }
  } else {
    fem::LaplacianRecovery lap(m);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd& u = cyl.warp[i];
      Eigen::VectorXd omega_b = cyl.path.effective_factor(i);
      Eigen::VectorXd lap_u = lap(u);
      Eigen::VectorXd lap_w = lap(cyl.path.w[i]);
      Eigen::VectorXd sp(nv);
      for (int v = 0; v < nv; ++v)
        sp[v] = 2.0 * std::exp(-2.0 * omega_b[v]) / cyl.bend(i) *
                (-lap_u[v] - lap_w[v] * u[v]) / u[v];
      out.spatial[i] = std::move(sp);

      Eigen::VectorXd d_w = fem::boundary_radial_derivative(m, cyl.path.w[i]);
      Eigen::VectorXd d_u = fem::boundary_radial_derivative(m, u);
      Eigen::VectorXd hc(nb);
      double bend_root = std::sqrt(cyl.bend(i));
      for (int b = 0; b < nb; ++b) {
        int v = m.boundary_loop[b];
        hc[b] = std::exp(-omega_b[v]) / bend_root * ((1.0 + d_w[b]) * u[v] + d_u[b]) / u[v];
      }
      out.H_cyl[i] = std::move(hc);
    }
  }
  return out;
}

inline SliceGeometry slice_geometry(const CylinderMetric& cyl, int t_index) {
  require(t_index >= 0 && t_index < cyl.samples(), errc::bounds, "t_index out of range");
  CylinderFields f = evaluate_cylinder(cyl);
  auto H_dot = detail::time_derivative(f.H1, cyl.path.dt());
  SliceGeometry s;
  s.t_index = t_index;
  Eigen::VectorXd H = f.H1[t_index] / cyl.A;
  s.H_slice = {cyl.path.mesh, H};
  s.II_norm_sq = {cyl.path.mesh, Eigen::VectorXd(0.5 * H.array() * H.array())};
  s.dH_dt = {cyl.path.mesh, Eigen::VectorXd(H_dot[t_index] / cyl.A)};
  return s;
}

struct CylinderCurvatures {
  std::vector<Eigen::VectorXd> R;      // per sample, per vertex
  std::vector<Eigen::VectorXd> H_cyl;  // per sample, boundary_loop order
};

inline CylinderCurvatures cylinder_curvatures(const CylinderMetric& cyl) {
  CylinderFields f = evaluate_cylinder(cyl);
  CylinderCurvatures out;
  out.R.resize(cyl.samples());
  for (int i = 0; i < cyl.samples(); ++i)
    out.R[i] = f.spatial[i] - f.time_coeff[i] / (cyl.A * cyl.A);
  out.H_cyl = std::move(f.H_cyl);
  return out;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// Constant-in-time warped cylinder over a single metric with positive
/// principal eigenvalue: u_t the principal eigenfunction, A = 1. All slices
/// are totally geodesic, the scalar curvature is twice the eigenvalue, and
/// the cylindrical boundary is minimal.
inline CylinderMetric build_warped_cylinder(const ConformalMetric& h, int N = 8,
                                            double tol = 1e-10) {
  auto rep = spectral_positivity(h, 0.0, tol);
  require(rep.verdict == Verdict::yes, errc::precondition,
          "metric does not have a certified positive principal eigenvalue");
  CylinderMetric cyl;
  cyl.path = conformal_segment(h, h, N);
  cyl.path.provenance["kind"] = "constant";
  SpectralResult r = principal_eigenpair(h, tol);
  cyl.warp_kind = WarpKind::eigen;
  cyl.warp.assign(N + 1, r.u.values);
  cyl.lambda = Eigen::VectorXd::Constant(N + 1, r.lambda1);
  cyl.A = 1.0;
  cyl.epsilon = 0.0;
  cyl.provenance["builder"] = "warped_cylinder";
  cyl.provenance["label"] = h.label;
  return cyl;
}

struct BuildOptions {
  int A_max_exponent = 20;  // doubling search stops at 2^A_max_exponent
  double tol = 1e-10;       // eigensolver tolerance
  int max_continuation_refinements = 3;
};

namespace detail {

inline MetricPath resample(const MetricPath& p, int N) {
  MetricPath out;
  out.mesh = p.mesh;
  out.times = Eigen::VectorXd::LinSpaced(N + 1, 0.0, 1.0);
  out.sigma = Eigen::VectorXd(N + 1);
  out.w.resize(N + 1);
  for (int i = 0; i <= N; ++i) sample_path_at(p, out.times[i], out.w[i], out.sigma[i]);
  out.provenance = p.provenance;
  return out;
}

inline double doubling_search(const CylinderFields& fields, double threshold, int max_exp) {
  double A = 1.0;
  for (int e = 0; e <= max_exp; ++e) {
    if (fields.min_R(A) > threshold) return A;
    A *= 2.0;
  }
  fail(errc::search_failure, "no lapse scale up to 2^" + std::to_string(max_exp) +
                                 " makes the scalar curvature clear the threshold");
}

}  // namespace detail

/// Product cylinder g = A^2 dt^2 + sigma_t h_t over a clamped path with
/// positive scalar curvature and mean-convex boundary at every sample
/// (verified pointwise with a two-level error bar). A grows by doubling
/// until min R_g exceeds half of the pointwise curvature floor.
inline CylinderMetric build_product_concordance(const MetricPath& path,
                                                const BuildOptions& opt = {}) {
  path.check();
  require(is_clamped(path), errc::precondition,
          "product concordance needs a clamped path (constant on the outer thirds)");
  require(path.mesh->refinement_level >= 1, errc::precondition,
          "need refinement level >= 1 for the two-level error bar");
  const int n = path.samples();

  auto coarse_mesh = generate_disk_mesh(path.mesh->refinement_level - 1);
  fem::LaplacianRecovery lap_f(*path.mesh), lap_c(*coarse_mesh);
  for (int i = 0; i < n; ++i) {
    ConformalMetric h = path.metric_at(i);
    Eigen::VectorXd Rf =
        2.0 * (-2.0 * h.w.array()).exp() * (-lap_f(h.w).array()) / path.sigma[i];
    Eigen::VectorXd wc = h.w.head(coarse_mesh->num_vertices());
    Eigen::VectorXd Rc = 2.0 * (-2.0 * wc.array()).exp() * (-lap_c(wc).array()) / path.sigma[i];
    double err_R = std::abs(Rf.minCoeff() - Rc.minCoeff());
    require(Rf.minCoeff() - err_R > 0.0, errc::precondition,
            "path leaves the positive-curvature class at sample " + std::to_string(i));
    BoundaryField kf = geodesic_curvature(h);
    ConformalMetric hc{coarse_mesh, wc, ""};
    BoundaryField kc = geodesic_curvature(hc);
    // H >= 0 admits equality (geodesic boundary), so the check is one-sided
    // within the usual ten-error-bar tolerance.
    double err_k = std::abs(kf.values.minCoeff() - kc.values.minCoeff());
    require(kf.values.minCoeff() >= -std::max(10.0 * err_k, 1e-12), errc::precondition,
            "path leaves the mean-convex class at sample " + std::to_string(i));
  }

  CylinderMetric cyl;
  cyl.path = path;
  cyl.warp_kind = WarpKind::unit;
  cyl.warp.assign(n, Eigen::VectorXd::Ones(path.mesh->num_vertices()));
  cyl.epsilon = 0.0;
  CylinderFields fields = evaluate_cylinder(cyl);
  double rho = std::numeric_limits<double>::infinity();
  for (const auto& sp : fields.spatial) rho = std::min(rho, sp.minCoeff());
  cyl.A = detail::doubling_search(fields, 0.5 * rho, opt.A_max_exponent);
  cyl.provenance["builder"] = "product_concordance";
  cyl.provenance["rho"] = std::to_string(rho);
  return cyl;
}

/// Warped cylinder g = A^2 u_t^2 dt^2 + sigma_t h_t over a clamped path with
/// positive principal eigenvalue everywhere: u_t the per-sample principal
/// eigenfunctions (time grid refined if consecutive eigenfunctions jump), A
/// doubled until min R_g exceeds the eigenvalue floor lambda_*.
inline CylinderMetric build_warped_concordance(const MetricPath& path,
                                               const BuildOptions& opt = {}) {
  path.check();
  require(is_clamped(path), errc::precondition,
          "warped concordance needs a clamped path (constant on the outer thirds)");

  MetricPath work = path;
  SweepReport sweep;
  for (int attempt = 0;; ++attempt) {
    sweep = spectral_sweep(work, opt.tol, /*two_level_errors=*/false);
    require(sweep.failed_at < 0, errc::precondition,
            "eigensolve failed along the path: " + sweep.failure_message);
    require(sweep.lambda_star > 0.0, errc::precondition,
            "path leaves the positive-eigenvalue class (lambda_* <= 0)");
    double max_norm = 0.0;
    for (const auto& u : sweep.eigenfunctions) max_norm = std::max(max_norm, u.cwiseAbs().maxCoeff());
    if (sweep.max_eigenfunction_jump <= 0.1 * max_norm) break;
    require(attempt < opt.max_continuation_refinements, errc::continuation,
            "eigenfunction continuation failed after time-grid refinement");
    work = detail::resample(work, 2 * (work.samples() - 1));
  }

  CylinderMetric cyl;
  cyl.path = work;
  cyl.warp_kind = WarpKind::eigen;
  cyl.warp = sweep.eigenfunctions;
  cyl.lambda = sweep.lambda;
  cyl.epsilon = 0.0;
  CylinderFields fields = evaluate_cylinder(cyl);
  cyl.A = detail::doubling_search(fields, sweep.lambda_star, opt.A_max_exponent);
  cyl.provenance["builder"] = "warped_concordance";
  cyl.provenance["lambda_star"] = std::to_string(sweep.lambda_star);
  return cyl;
}

/// Outward-bent cylinder g = A^2 u_t^2 dt^2 + (1 + eps t^2) sigma_t h_t over
/// a volume-matched path in the positive-eigenvalue class, with u_t the
/// eigenfunctions of the unbent slice metrics. eps = 0 reduces exactly to
/// the plain warped concordance.
inline CylinderMetric build_outward_bent(const MetricPath& path, double epsilon,
                                         const BuildOptions& opt = {}) {
  require(epsilon >= 0.0, errc::precondition, "epsilon must be non-negative");
  if (epsilon == 0.0) return build_warped_concordance(path, opt);
  path.check();
  require(is_clamped(path), errc::precondition, "outward bending needs a clamped path");
  {
    double a0 = path.sigma[0] * total_area(path.metric_at(0));
    for (int i = 0; i < path.samples(); ++i)
      require(std::abs(path.sigma[i] * total_area(path.metric_at(i)) - a0) <= 1e-9 * a0,
              errc::precondition, "outward bending needs a volume-matched path");
  }

  SweepReport sweep = spectral_sweep(path, opt.tol, /*two_level_errors=*/false);
  require(sweep.failed_at < 0, errc::precondition,
          "eigensolve failed along the path: " + sweep.failure_message);
  require(sweep.lambda_star > 0.0, errc::precondition,
          "path leaves the positive-eigenvalue class (lambda_* <= 0)");

  CylinderMetric cyl;
  cyl.path = path;
  cyl.warp_kind = WarpKind::eigen;
  cyl.warp = sweep.eigenfunctions;
  cyl.lambda = sweep.lambda;
  cyl.epsilon = epsilon;
  CylinderFields fields = evaluate_cylinder(cyl);
  cyl.A = detail::doubling_search(fields, 0.0, opt.A_max_exponent);
  cyl.provenance["builder"] = "outward_bent";
  cyl.provenance["lambda_star"] = std::to_string(sweep.lambda_star);
  return cyl;
}

// ---------------------------------------------------------------------------
// Certification
// ---------------------------------------------------------------------------

enum class ConcordanceMode { weak_min, weak_mc, strong_min, outward_bent };

inline const char* mode_name(ConcordanceMode m) {
  switch (m) {
    case ConcordanceMode::weak_min: return "weak-min";
    case ConcordanceMode::weak_mc: return "weak-mc";
    case ConcordanceMode::strong_min: return "strong-min";
    case ConcordanceMode::outward_bent: return "outward-bent";
  }
  return "?";
}

inline ConcordanceMode mode_from_name(const std::string& s) {
  if (s == "weak-min") return ConcordanceMode::weak_min;
  if (s == "weak-mc") return ConcordanceMode::weak_mc;
  if (s == "strong-min") return ConcordanceMode::strong_min;
  if (s == "outward-bent") return ConcordanceMode::outward_bent;
  fail(errc::config, "unknown concordance mode '" + s + "'");
}

/// One certified inequality: the measured value, its two-level
/// discretization error estimate, the tolerance derived from it, and the
/// verdict of this single check.
struct CertCheck {
  double value = 0.0;
  double error_estimate = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ConcordanceCertificate {
  ConcordanceMode mode = ConcordanceMode::weak_min;
  bool pass = false;
  double A = 1.0;
  double epsilon = 0.0;
  double lambda_star = 0.0;  // min eigenvalue along the path (eigen warps)

  CertCheck min_R;           // pass: value - error > 0
  int min_R_sample = 0, min_R_vertex = 0;
  CertCheck max_abs_H_cyl;   // pass: value <= tolerance (weak-mc: min >= -tol)
  CertCheck base_H0;         // sup |H_slice(0)|
  CertCheck base_H1;         // sup |H_slice(1)| (skipped in outward-bent mode)
  CertCheck endpoint0;       // |log sigma_0| / 2 : restriction to the first endpoint
  CertCheck endpoint1;       // |log sigma_1| / 2 : restriction to the second endpoint
  bool collars_ok = true;    // strong-min: exact product collars on the outer thirds
  CertCheck ladder_c;        // outward-bent: min_t min_x H_slice/(eps t), pass: value - error > 0
  Eigen::VectorXd slice_H_min;  // per sample (at the certificate's A)

  std::map<std::string, std::string> provenance;
};

namespace detail {

/// Coarse companion of a cylinder for two-level error estimates: path data
/// restricted to the nested coarse mesh, eigen warps re-solved there.
inline CylinderMetric coarsen_cylinder(const CylinderMetric& cyl, double tol) {
  auto coarse = generate_disk_mesh(cyl.path.mesh->refinement_level - 1);
  const int nvc = coarse->num_vertices();
  CylinderMetric out;
  out.path.mesh = coarse;
  out.path.times = cyl.path.times;
  out.path.sigma = cyl.path.sigma;
  out.path.w.reserve(cyl.samples());
  for (const auto& w : cyl.path.w) out.path.w.push_back(w.head(nvc));
  out.path.provenance = cyl.path.provenance;
  out.warp_kind = cyl.warp_kind;
  out.A = cyl.A;
  out.epsilon = cyl.epsilon;
  if (cyl.warp_kind == WarpKind::eigen) {
    out.lambda = Eigen::VectorXd(cyl.samples());
    for (int i = 0; i < cyl.samples(); ++i) {
      SpectralResult r = principal_eigenpair(out.path.metric_at(i), tol);
      out.lambda[i] = r.lambda1 / cyl.path.sigma[i];
      out.warp.push_back(r.u.values / std::sqrt(cyl.path.sigma[i]));
    }
  } else {
    out.warp.assign(cyl.samples(), Eigen::VectorXd::Ones(nvc));
  }
  return out;
}

inline CertCheck make_check(double fine, double coarse_mesh, double coarse_time,
                            double floor = 1e-12) {
  CertCheck c;
  c.value = fine;
  c.error_estimate = std::abs(fine - coarse_mesh) + std::abs(fine - coarse_time);
  c.tolerance = std::max(10.0 * c.error_estimate, floor);
  return c;
}

/// Restriction to every other time sample: the time-axis companion of the
/// two-level mesh estimate, needed because time-difference artifacts are
/// invisible to mesh refinement. Eigen warps restrict directly (the sample
/// metrics are unchanged).
inline CylinderMetric time_coarsen_cylinder(const CylinderMetric& cyl) {
  const int N = cyl.samples() - 1;
  require(N % 2 == 0 && N >= 4, errc::precondition,
          "certification needs an even number of path intervals, at least 4");
  CylinderMetric out;
  out.path.mesh = cyl.path.mesh;
  out.path.times = Eigen::VectorXd::LinSpaced(N / 2 + 1, 0.0, 1.0);
  out.path.sigma = Eigen::VectorXd(N / 2 + 1);
  out.warp_kind = cyl.warp_kind;
  out.A = cyl.A;
  out.epsilon = cyl.epsilon;
  if (cyl.warp_kind == WarpKind::eigen) out.lambda = Eigen::VectorXd(N / 2 + 1);
  for (int i = 0; i <= N / 2; ++i) {
    out.path.w.push_back(cyl.path.w[2 * i]);
    out.path.sigma[i] = cyl.path.sigma[2 * i];
    out.warp.push_back(cyl.warp[2 * i]);
    if (cyl.warp_kind == WarpKind::eigen) out.lambda[i] = cyl.lambda[2 * i];
  }
  return out;
}

}  // namespace detail

/// Certify a cylinder against a concordance definition. Every inequality is
/// checked with a tolerance of ten times its own two-level discretization
/// error estimate (never an absolute magic number); the verdict is a pass
/// only when all margins clear their error bars. Geometric failure is a
/// fail verdict, not an error.
inline ConcordanceCertificate verify_concordance(const CylinderMetric& cyl, ConcordanceMode mode,
                                                 double tol = 1e-10) {
  cyl.check();
  require(cyl.path.mesh->refinement_level >= 1, errc::precondition,
          "certification needs refinement level >= 1 for the two-level error estimate");
  const int n = cyl.samples();
  const double A = cyl.A;

  CylinderFields fine = evaluate_cylinder(cyl);
  CylinderMetric ccyl = detail::coarsen_cylinder(cyl, tol);
  CylinderFields coarse = evaluate_cylinder(ccyl);
  CylinderMetric tcyl = detail::time_coarsen_cylinder(cyl);
  CylinderFields tfields = evaluate_cylinder(tcyl);
  const int nt = tcyl.samples();

  ConcordanceCertificate cert;
  cert.mode = mode;
  cert.A = A;
  cert.epsilon = cyl.epsilon;
  cert.lambda_star =
      cyl.warp_kind == WarpKind::eigen ? cyl.lambda.minCoeff() : std::numeric_limits<double>::quiet_NaN();
  cert.provenance = cyl.provenance;

  cert.min_R = detail::make_check(fine.min_R(A, &cert.min_R_sample, &cert.min_R_vertex),
                                  coarse.min_R(A), tfields.min_R(A));
  cert.min_R.pass = cert.min_R.value - cert.min_R.error_estimate > 0.0;

  cert.max_abs_H_cyl =
      detail::make_check(fine.max_abs_H_cyl(), coarse.max_abs_H_cyl(), tfields.max_abs_H_cyl());
  if (mode == ConcordanceMode::weak_mc) {
    // mean-convex cylindrical boundary: H_cyl >= -tol
    cert.max_abs_H_cyl = detail::make_check(fine.min_H_cyl(), coarse.min_H_cyl(), tfields.min_H_cyl());
    cert.max_abs_H_cyl.pass = cert.max_abs_H_cyl.value >= -cert.max_abs_H_cyl.tolerance;
  } else {
    cert.max_abs_H_cyl.pass = cert.max_abs_H_cyl.value <= cert.max_abs_H_cyl.tolerance;
  }

  cert.base_H0 = detail::make_check(fine.slice_H_max_abs(0, A), coarse.slice_H_max_abs(0, A),
                                    tfields.slice_H_max_abs(0, A));
  cert.base_H0.pass = cert.base_H0.value <= cert.base_H0.tolerance;
  cert.base_H1 = detail::make_check(fine.slice_H_max_abs(n - 1, A),
                                    coarse.slice_H_max_abs(n - 1, A),
                                    tfields.slice_H_max_abs(nt - 1, A));
  cert.base_H1.pass = cert.base_H1.value <= cert.base_H1.tolerance;

  // Endpoint restriction: the slice at t = 0 (t = 1) is sigma e^{2w} delta
  // against the declared endpoint e^{2w}; the deviation is the sigma drift.
  // Its error bar is the quadrature sensitivity of the matching ratio.
  cert.endpoint0.value = 0.5 * std::abs(std::log(cyl.path.sigma[0]));
  cert.endpoint0.error_estimate = 0.0;
  cert.endpoint0.tolerance = 1e-12;
  cert.endpoint0.pass = cert.endpoint0.value <= cert.endpoint0.tolerance;
  {
    cert.endpoint1.value = 0.5 * std::abs(std::log(cyl.path.sigma[n - 1]));
    double vc0 = total_area(ccyl.path.metric_at(0));
    double vc1 = total_area(ccyl.path.metric_at(n - 1));
    double sigma1_coarse = vc0 / vc1;
    cert.endpoint1.error_estimate =
        std::abs(cert.endpoint1.value - 0.5 * std::abs(std::log(sigma1_coarse)));
    cert.endpoint1.tolerance = std::max(10.0 * cert.endpoint1.error_estimate, 1e-12);
    cert.endpoint1.pass = cert.endpoint1.value <= cert.endpoint1.tolerance;
  }

  cert.slice_H_min = Eigen::VectorXd(n);
  for (int i = 0; i < n; ++i) cert.slice_H_min[i] = fine.slice_H_min(i, A);

  cert.collars_ok = is_clamped(cyl.path, 0.0);

  bool pass = cert.min_R.pass && cert.max_abs_H_cyl.pass && cert.base_H0.pass &&
              cert.endpoint0.pass && cert.endpoint1.pass;
  if (mode != ConcordanceMode::outward_bent) pass = pass && cert.base_H1.pass;
  if (mode == ConcordanceMode::strong_min) pass = pass && cert.collars_ok;
  if (mode == ConcordanceMode::outward_bent) {
    require(cyl.epsilon > 0.0, errc::precondition, "outward-bent mode needs epsilon > 0");
    const double t_lo = 2.0 * cyl.path.dt() - 1e-15;
    auto ladder = [&](const CylinderFields& f, const Eigen::VectorXd& times) {
      double c = std::numeric_limits<double>::infinity();
      for (int i = 0; i < times.size(); ++i)
        if (times[i] >= t_lo) c = std::min(c, f.slice_H_min(i, A) / (cyl.epsilon * times[i]));
      return c;
    };
    cert.ladder_c =
        detail::make_check(ladder(fine, cyl.path.times), ladder(coarse, ccyl.path.times),
                           ladder(tfields, tcyl.path.times));
    cert.ladder_c.pass = cert.ladder_c.value - cert.ladder_c.error_estimate > 0.0;
    pass = pass && cert.ladder_c.pass;
  }
  cert.pass = pass;
  return cert;
}

}  // namespace concord
