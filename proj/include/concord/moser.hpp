#pragma once

#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "concord/isotopy.hpp"

namespace concord {

/// One time sample of the volume-normalizing construction: the Neumann
/// potential f (zero mean in the metric measure), its metric gradient W
/// (tangential to the boundary through the Neumann condition), and the
/// divergence data used for Jacobian transport.
struct MoserStep {
  int t_index = 0;
  ScalarField f;
  std::vector<Vec2> W;        // per-vertex gradient of f in the metric sigma_t h_t
  Eigen::VectorXd divergence; // nodal div W in the metric = the PDE right-hand side
  double compatibility = 0.0; // integral of the right-hand side over the disk
  double pde_residual = 0.0;
  double max_boundary_normal = 0.0;  // max |W . eta| over boundary vertices
};

/// Shared state for potential solves along a path: the flat stiffness matrix
/// is metric-independent in 2d, so one factorization serves all samples.
class MoserSolver {
public:
  explicit MoserSolver(const MetricPath& path) : path_(path), recovery_(*path.mesh) {
    path.check();
    const DiskMesh& m = *path.mesh;
    L_ = fem::stiffness_matrix(m);
    mass_flat_ = fem::weighted_mass_matrix(m, Eigen::VectorXd::Ones(m.num_vertices()));
    lumped_ = fem::lumped_mass(m);
    // Pin the constant kernel: a unit penalty on vertex 0 makes the matrix
    // definite; with a mean-free load the pinned solve reproduces the
    // zero-at-vertex-0 solution, re-gauged afterwards.
    SpMat K = L_;
    K.coeffRef(0, 0) += 1.0;
    fact_.compute(K);
    require(fact_.info() == Eigen::Success && fact_.vectorD().minCoeff() > 0.0, errc::assembly,
            "Neumann system is singular beyond the constant kernel");
    rho_.resize(path.samples());
    for (int i = 0; i < path.samples(); ++i)
      rho_[i] = path.sigma[i] * (2.0 * path.w[i].array()).exp();
    area0_ = total_area(path.metric_at(0)) * path.sigma[0];
  }

  /// Time derivative of the conformal area density at a sample, by central
  /// differences (second-order one-sided at the ends). Differencing the
  /// density itself (not its logarithm) makes the Neumann compatibility of a
  /// volume-matched path vanish to round-off.
  Eigen::VectorXd density_rate(int i) const {
    const int n = path_.samples();
    const double dt = path_.dt();
    if (i == 0) return (-3.0 * rho_[0] + 4.0 * rho_[1] - rho_[2]) / (2.0 * dt);
    if (i == n - 1) return (3.0 * rho_[n - 1] - 4.0 * rho_[n - 2] + rho_[n - 3]) / (2.0 * dt);
    return (rho_[i + 1] - rho_[i - 1]) / (2.0 * dt);
  }

  MoserStep step(int t_index) const {
    const int n = path_.samples();
    require(t_index >= 0 && t_index < n, errc::bounds, "t_index out of range");
    require(n >= 3, errc::precondition, "need at least three samples for time differences");
    const DiskMesh& m = *path_.mesh;

    Eigen::VectorXd q = density_rate(t_index);
    Eigen::VectorXd load = mass_flat_ * q;
    MoserStep s;
    s.t_index = t_index;
    s.compatibility = -load.sum();  // integral of the right-hand side g = -qdot/rho over dvol
    require(std::abs(s.compatibility) <= 1e-6 * area0_, errc::solvability,
            "Neumann compatibility violated; volume-match the path first");

    // Project the (tiny) incompatible part onto the lumped mass, then solve.
    Eigen::VectorXd rhs = load.array() - load.sum() * lumped_.array() / lumped_.sum();
    Eigen::VectorXd f = fact_.solve(rhs);
    double rhs_norm = rhs.norm();
    s.pde_residual = rhs_norm > 1e-13 ? (L_ * f - rhs).norm() / rhs_norm : 0.0;

    // Zero-mean gauge in the metric measure.
    Eigen::VectorXd mass_k = lumped_.array() * rho_[t_index].array();
    f.array() -= f.dot(mass_k) / mass_k.sum();
    s.f = {path_.mesh, f};

    // W = grad_k f = e^{-2 omega} grad_flat f; divergence in the metric is the
    // PDE right-hand side itself.
    auto g = recovery_(f);
    s.W.resize(m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) s.W[v] = g[v] / rho_[t_index][v];
    s.divergence = -q.array() / rho_[t_index].array();
    // The Neumann condition makes the exact W tangential along the boundary;
    // the one-sided fan average leaves an O(h) normal component that would
    // let boundary trajectories sink or escape. Record it, then project it
    // out so the discrete flow is boundary-preserving.
    for (int i = 0; i < m.num_boundary(); ++i) {
      int v = m.boundary_loop[i];
      Vec2 eta = m.vertices[v].normalized();
      double wn = s.W[v].dot(eta);
      s.max_boundary_normal = std::max(s.max_boundary_normal, std::abs(wn));
      s.W[v] -= wn * eta;
    }
    return s;
  }

  const MetricPath& path() const { return path_; }
  const Eigen::VectorXd& density(int i) const { return rho_[i]; }
  double base_area() const { return area0_; }

private:
  const MetricPath& path_;
  fem::GradientRecovery recovery_;
  SpMat L_;
  SpMat mass_flat_;
  Eigen::VectorXd lumped_;
  Eigen::SimplicialLDLT<SpMat> fact_;
  std::vector<Eigen::VectorXd> rho_;
  double area0_ = 0.0;
};

inline MoserStep neumann_potential(const MetricPath& path, int t_index) {
  return MoserSolver(path).step(t_index);
}

struct FlowOptions {
  int substeps = 8;          // RK4 substeps per path interval
  int aux_level = -1;        // auxiliary volume-check mesh level; -1: path level
  double exit_tol = 1e-2;    // allowed excursion outside the unit disk
};

struct FlowResult {
  Eigen::VectorXd times;
  std::vector<Vec2> seeds;
  std::vector<std::vector<Vec2>> trajectories;  // [seed][sample time]
  Eigen::VectorXd jacobian_log;                 // accumulated log-Jacobian at t = 1, per seed
  Eigen::VectorXd volume_drift;   // per sample: |total advected volume - initial| / initial
  Eigen::VectorXd cell_drift;     // per sample: L1 of per-cell volume deviations / initial
  Eigen::VectorXd compatibility;  // per sample
  double max_displacement = 0.0;
  double max_boundary_offset = 0.0;       // how far boundary seeds leave the circle
  double max_boundary_normal = 0.0;       // max |W . eta| over steps (before projection)
  double max_pde_residual = 0.0;
};

namespace detail {

struct FlowField {
  const DiskMesh& mesh;
  P1Locator locator;
  const std::vector<MoserStep>& steps;
  double dt;

  FlowField(const DiskMesh& m, const std::vector<MoserStep>& s, double dt_)
      : mesh(m), locator(m), steps(s), dt(dt_) {}

  // velocity and divergence at (p, t), fields linear in time, P1 in space
  void eval(const Vec2& p, double t, int& hint, Vec2& W, double& div) const {
    double x = t / dt;
    int k = std::min(static_cast<int>(std::floor(x)), static_cast<int>(steps.size()) - 2);
    k = std::max(k, 0);
    double a = std::clamp(x - k, 0.0, 1.0);
    Vec2 q = p;
    double r = q.norm();
    if (r > 1.0) q /= r;  // evaluate on the disk; advected points may sit on the true circle
    auto hit = locator.locate(q, hint);
    hint = hit.tri;
    const auto& tri = mesh.triangles[hit.tri];
    W.setZero();
    div = 0.0;
    for (int j = 0; j < 3; ++j) {
      double b = hit.bary[j];
      W += b * ((1.0 - a) * steps[k].W[tri[j]] + a * steps[k + 1].W[tri[j]]);
      div += b * ((1.0 - a) * steps[k].divergence[tri[j]] + a * steps[k + 1].divergence[tri[j]]);
    }
  }
};

}  // namespace detail

/// Integrate the flow of the Moser field over [0, 1] with classical RK4.
/// Measure preservation is certified through advected-cell volumes on an
/// auxiliary triangulation, aggregated in L1 so per-cell errors cannot hide
/// by cancellation.
inline FlowResult moser_flow(const MetricPath& path, const std::vector<Vec2>& seeds,
                             const FlowOptions& opt = {}) {
  path.check();
  require(opt.substeps >= 4, errc::precondition, "need at least 4 substeps per interval");
  const DiskMesh& m = *path.mesh;
  MoserSolver solver(path);
  const int n = path.samples();

  std::vector<MoserStep> steps;
  steps.reserve(n);
  FlowResult out;
  out.compatibility = Eigen::VectorXd(n);
  for (int i = 0; i < n; ++i) {
    steps.push_back(solver.step(i));
    out.compatibility[i] = steps.back().compatibility;
    out.max_boundary_normal = std::max(out.max_boundary_normal, steps.back().max_boundary_normal);
    out.max_pde_residual = std::max(out.max_pde_residual, steps.back().pde_residual);
  }

  detail::FlowField field(m, steps, path.dt());

  // Advected points: user seeds first, then the auxiliary mesh vertices.
  auto aux = generate_disk_mesh(opt.aux_level >= 0 ? opt.aux_level : m.refinement_level);
  std::vector<Vec2> pts = seeds;
  pts.insert(pts.end(), aux->vertices.begin(), aux->vertices.end());
  const int ns = static_cast<int>(seeds.size());
  const int np = static_cast<int>(pts.size());

  std::vector<int> hints(np, 0);
  std::vector<double> logj(np, 0.0);
  std::vector<char> seed_on_boundary(ns, 0);
  for (int i = 0; i < ns; ++i) seed_on_boundary[i] = std::abs(seeds[i].norm() - 1.0) <= 1e-9;

  out.times = path.times;
  out.seeds = seeds;
  out.trajectories.assign(ns, {});
  for (int i = 0; i < ns; ++i) {
    out.trajectories[i].reserve(n);
    out.trajectories[i].push_back(seeds[i]);
  }

  out.volume_drift = Eigen::VectorXd::Zero(n);
  out.cell_drift = Eigen::VectorXd::Zero(n);
  P1Locator path_locator(m);
  Eigen::VectorXd cell_vol0(aux->num_triangles());
  std::vector<int> rho_hints(aux->num_vertices(), 0);
  auto cell_volumes = [&](const std::vector<Vec2>& apos, Eigen::VectorXd& vols, int sample) {
    Eigen::VectorXd rho_at(aux->num_vertices());
    for (int v = 0; v < aux->num_vertices(); ++v) {
      Vec2 q = apos[v];
      double r = q.norm();
      if (r > 1.0) q /= r;
      rho_at[v] = path_locator.eval(solver.density(sample), q, &rho_hints[v]);
    }
    for (int t = 0; t < aux->num_triangles(); ++t) {
      const auto& tri = aux->triangles[t];
      const Vec2 &a = apos[tri[0]], &b = apos[tri[1]], &c = apos[tri[2]];
      double area =
          0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
      vols[t] = area * (rho_at[tri[0]] + rho_at[tri[1]] + rho_at[tri[2]]) / 3.0;
    }
  };
  std::vector<Vec2> aux_pos(pts.begin() + ns, pts.end());
  cell_volumes(aux_pos, cell_vol0, 0);
  double total0 = cell_vol0.sum();

  const double h = path.dt() / opt.substeps;
  double t = 0.0;
  Eigen::VectorXd cv(aux->num_triangles());
  for (int interval = 0; interval < n - 1; ++interval) {
    for (int sub = 0; sub < opt.substeps; ++sub) {
      for (int i = 0; i < np; ++i) {
        Vec2& x = pts[i];
        Vec2 k1, k2, k3, k4;
        double d1, d2, d3, d4;
        field.eval(x, t, hints[i], k1, d1);
        field.eval(x + 0.5 * h * k1, t + 0.5 * h, hints[i], k2, d2);
        field.eval(x + 0.5 * h * k2, t + 0.5 * h, hints[i], k3, d3);
        field.eval(x + h * k3, t + h, hints[i], k4, d4);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        logj[i] += h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
        double r = x.norm();
        if (r > 1.0 + opt.exit_tol)
          fail(errc::integration, "trajectory left the disk; refine the time step");
      }
      t += h;
    }
    t = path.times[interval + 1];  // avoid drift in the clock
    for (int i = 0; i < ns; ++i) out.trajectories[i].push_back(pts[i]);
    for (int v = 0; v < aux->num_vertices(); ++v) aux_pos[v] = pts[ns + v];
    cell_volumes(aux_pos, cv, interval + 1);
    out.volume_drift[interval + 1] = std::abs(cv.sum() - total0) / total0;
    out.cell_drift[interval + 1] = (cv - cell_vol0).cwiseAbs().sum() / total0;
  }

  out.jacobian_log = Eigen::VectorXd(ns);
  for (int i = 0; i < ns; ++i) {
    out.jacobian_log[i] = logj[i];
    out.max_displacement =
        std::max(out.max_displacement, (out.trajectories[i].back() - seeds[i]).norm());
    if (seed_on_boundary[i])
      for (const Vec2& p : out.trajectories[i])
        out.max_boundary_offset = std::max(out.max_boundary_offset, std::abs(p.norm() - 1.0));
  }
  return out;
}

}  // namespace concord
