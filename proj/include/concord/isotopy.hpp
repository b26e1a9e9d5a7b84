#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "concord/spectral.hpp"

namespace concord {

/// Time-sampled family t -> sigma_t * e^{2 w_t} delta on a uniform grid over
/// [0, 1]. The global scale sigma is kept as a separate channel so that
/// endpoint normalization (sigma_0 = sigma_1 = 1) stays checkable to machine
/// precision. Immutable after construction.
struct MetricPath {
  std::shared_ptr<const DiskMesh> mesh;
  Eigen::VectorXd times;
  std::vector<Eigen::VectorXd> w;
  Eigen::VectorXd sigma;
  std::map<std::string, std::string> provenance;

  int samples() const { return static_cast<int>(times.size()); }
  double dt() const { return times[1] - times[0]; }

  ConformalMetric metric_at(int i) const { return {mesh, w[i], ""}; }

  /// Conformal factor of the effective metric sigma_t h_t.
  Eigen::VectorXd effective_factor(int i) const {
    return w[i].array() + 0.5 * std::log(sigma[i]);
  }

  void check() const {
    require(samples() >= 2, errc::precondition, "path needs at least two samples");
    require(static_cast<int>(w.size()) == samples() && sigma.size() == samples(),
            errc::incompatible_input, "path channels have mismatched lengths");
    require(std::abs(times[0]) <= 1e-15 && std::abs(times[samples() - 1] - 1.0) <= 1e-15,
            errc::precondition, "path times must span [0, 1]");
    double step = dt();
    for (int i = 1; i < samples(); ++i)
      require(std::abs(times[i] - times[i - 1] - step) <= 1e-12, errc::precondition,
              "path time grid must be uniform");
    for (const auto& wi : w)
      require(static_cast<int>(wi.size()) == mesh->num_vertices(), errc::incompatible_input,
              "path sample length does not match mesh");
    require((sigma.array() > 0.0).all(), errc::precondition, "sigma must be positive");
  }
};

inline void require_same_mesh(const std::shared_ptr<const DiskMesh>& a,
                              const std::shared_ptr<const DiskMesh>& b) {
  bool same = a.get() == b.get() ||
              (a->refinement_level == b->refinement_level && a->num_vertices() == b->num_vertices());
  require(same, errc::incompatible_input, "operands live on different meshes");
}

/// Linear segment in the conformal factor: w_t = (1-t) w_0 + t w_1.
inline MetricPath conformal_segment(const ConformalMetric& h0, const ConformalMetric& h1, int N) {
  require_same_mesh(h0.mesh, h1.mesh);
  require(N >= 8, errc::precondition, "segment needs N >= 8 samples");
  h0.check();
  h1.check();
  MetricPath p;
  p.mesh = h0.mesh;
  p.times = Eigen::VectorXd::LinSpaced(N + 1, 0.0, 1.0);
  p.sigma = Eigen::VectorXd::Ones(N + 1);
  p.w.reserve(N + 1);
  for (int i = 0; i <= N; ++i) {
    double t = static_cast<double>(i) / N;
    p.w.push_back((1.0 - t) * h0.w + t * h1.w);
  }
  p.provenance["kind"] = "conformal_segment";
  p.provenance["from"] = h0.label;
  p.provenance["to"] = h1.label;
  return p;
}

/// C^2 profile: 0 on [0,1/3], 1 on [2/3,1], quintic smoothstep between.
inline double clamp_profile(double t) {
  double s = 3.0 * t - 1.0;
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

namespace detail {

inline void sample_path_at(const MetricPath& p, double theta, Eigen::VectorXd& w_out,
                           double& sigma_out) {
  int N = p.samples() - 1;
  double x = theta * N;
  int k = std::min(static_cast<int>(std::floor(x)), N - 1);
  double a = x - k;
  if (a == 0.0) {
    w_out = p.w[k];
    sigma_out = p.sigma[k];
  } else {
    w_out = (1.0 - a) * p.w[k] + a * p.w[k + 1];
    sigma_out = (1.0 - a) * p.sigma[k] + a * p.sigma[k + 1];
  }
}

}  // namespace detail

/// Resample through the clamp profile so the output is constant on the outer
/// thirds of [0, 1] (product collars after cylinder construction).
inline MetricPath clamp_reparametrize(const MetricPath& path) {
  path.check();
  MetricPath out;
  out.mesh = path.mesh;
  out.times = path.times;
  out.sigma = Eigen::VectorXd(path.samples());
  out.w.resize(path.samples());
  for (int i = 0; i < path.samples(); ++i)
    detail::sample_path_at(path, clamp_profile(path.times[i]), out.w[i], out.sigma[i]);
  out.provenance = path.provenance;
  out.provenance["clamped"] = "true";
  return out;
}

inline bool is_clamped(const MetricPath& p, double tol = 0.0) {
  for (int i = 1; i < p.samples(); ++i) {
    bool collar = p.times[i] <= 1.0 / 3.0 + 1e-15 || p.times[i - 1] >= 2.0 / 3.0 - 1e-15;
    if (!collar) continue;
    if ((p.w[i] - p.w[i - 1]).cwiseAbs().maxCoeff() > tol ||
        std::abs(p.sigma[i] - p.sigma[i - 1]) > tol)
      return false;
  }
  return true;
}

/// Fix the sigma channel so the total area of sigma_t h_t is constant in t.
/// Requires endpoints of equal area, so that sigma stays 1 at both ends:
/// exactly at t = 0, and at t = 1 up to the discrete area mismatch of the
/// endpoints. Endpoints with equal continuum area (flat disk scaled by
/// sqrt(2) vs. the hemisphere, say) agree only to quadrature accuracy, so
/// the equal-area precondition is enforced at 1e-3 relative, not at machine
/// precision.
inline MetricPath volume_match(const MetricPath& path) {
  path.check();
  MetricPath out = path;
  int n = path.samples();
  Eigen::VectorXd vols(n);
  for (int i = 0; i < n; ++i) vols[i] = total_area(path.metric_at(i));
  require(std::abs(vols[0] - vols[n - 1]) <= 1e-3 * vols[0], errc::precondition,
          "endpoint areas differ; rescale one endpoint (compose with scaled_flat) first");
  for (int i = 0; i < n; ++i) out.sigma[i] = vols[0] / vols[i];
  out.provenance["volume_matched"] = "true";
  return out;
}

struct SweepReport {
  Eigen::VectorXd times;
  Eigen::VectorXd lambda;          // principal eigenvalue of sigma_t h_t per sample
  Eigen::VectorXd error_estimate;  // two-level gap per sample (empty if not requested)
  double lambda_star = 0.0;
  Verdict path_in_class = Verdict::inconclusive;
  double max_eigenfunction_jump = 0.0;  // max_t ||u_{t+1} - u_t||_inf
  int failed_at = -1;                   // sample index of a failed solve, -1 if none
  std::string failure_message;
  std::vector<Eigen::VectorXd> eigenfunctions;  // normalized for sigma_t h_t
};

/// Solve the eigenproblem along the path. The sigma channel enters through
/// the exact scaling law lambda(sigma h) = lambda(h)/sigma and the matching
/// renormalization of the eigenfunction.
inline SweepReport spectral_sweep(const MetricPath& path, double tol = 1e-10,
                                  bool two_level_errors = true) {
  path.check();
  SweepReport rep;
  const int n = path.samples();
  rep.times = path.times;
  rep.lambda = Eigen::VectorXd::Zero(n);
  rep.error_estimate = Eigen::VectorXd::Zero(n);
  rep.eigenfunctions.resize(n);

  std::shared_ptr<const DiskMesh> coarse;
  if (two_level_errors && path.mesh->refinement_level > 0)
    coarse = generate_disk_mesh(path.mesh->refinement_level - 1);

  bool all_positive = true;
  for (int i = 0; i < n; ++i) {
    try {
      SpectralResult r = principal_eigenpair(path.metric_at(i), tol);
      rep.lambda[i] = r.lambda1 / path.sigma[i];
      rep.eigenfunctions[i] = r.u.values / std::sqrt(path.sigma[i]);
      if (coarse) {
        ConformalMetric hc{coarse, path.w[i].head(coarse->num_vertices()), ""};
        double lc = principal_eigenpair(hc, tol).lambda1 / path.sigma[i];
        rep.error_estimate[i] = std::abs(rep.lambda[i] - lc);
      } else {
        rep.error_estimate[i] = std::numeric_limits<double>::infinity();
      }
      if (rep.lambda[i] - rep.error_estimate[i] <= 0.0) all_positive = false;
    } catch (const Error& e) {
      rep.failed_at = i;
      rep.failure_message = e.what();
      rep.lambda.conservativeResize(i);
      rep.error_estimate.conservativeResize(i);
      rep.eigenfunctions.resize(i);
      rep.lambda_star = i > 0 ? rep.lambda.minCoeff() : 0.0;
      rep.path_in_class = Verdict::inconclusive;
      return rep;
    }
  }
  rep.lambda_star = rep.lambda.minCoeff();
  if (all_positive) {
    rep.path_in_class = Verdict::yes;
  } else {
    bool some_negative = ((rep.lambda + rep.error_estimate).array() < 0.0).any();
    rep.path_in_class = some_negative ? Verdict::no : Verdict::inconclusive;
  }
  for (int i = 0; i + 1 < n; ++i)
    rep.max_eigenfunction_jump =
        std::max(rep.max_eigenfunction_jump,
                 (rep.eigenfunctions[i + 1] - rep.eigenfunctions[i]).cwiseAbs().maxCoeff());
  return rep;
}

}  // namespace concord
