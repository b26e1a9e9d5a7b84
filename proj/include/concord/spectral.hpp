#pragma once

#include <Eigen/SparseCholesky>
#include <cmath>
#include <memory>
#include <sstream>

#include "concord/metric.hpp"

namespace concord {

/// Discrete realization of the stability quadratic form
///   B(u,u) = int (|grad u|^2 + (1/2) R_h u^2) dvol_h + oint H_h u^2 ds_h
/// and the mass form M(u,u) = int u^2 dvol_h, assembled in the flat gauge.
///
/// The Dirichlet term is conformally invariant in 2d; the curvature term is
/// assembled weakly (integration by parts), which cancels the normal
/// derivative of w against the boundary term and leaves the plain boundary
/// mass. B = stiffness + curvature form + boundary mass, M = mass weighted
/// by e^{2w}.
struct StabilityForms {
  std::shared_ptr<const DiskMesh> mesh;
  Eigen::VectorXd w;
  SpMat B;
  SpMat M;

  double b(const Eigen::VectorXd& u) const { return u.dot(B * u); }
  double m(const Eigen::VectorXd& u) const { return u.dot(M * u); }
};

inline StabilityForms assemble_stability_forms(const ConformalMetric& h) {
  h.check();
  const DiskMesh& mesh = *h.mesh;
  SpMat B = fem::stiffness_matrix(mesh);
  B += fem::curvature_form_matrix(mesh, h.w);
  B += fem::boundary_mass_matrix(mesh);
  SpMat M = fem::weighted_mass_matrix(mesh, h.area_density());

  // Form sanity: exact symmetry by construction, M positive definite.
  for (int k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it)
      require(std::abs(it.value() - B.coeff(it.col(), it.row())) <=
                  1e-14 * std::max(1.0, std::abs(it.value())),
              errc::assembly, "stability form not symmetric");
  Eigen::VectorXd row_mass = M * Eigen::VectorXd::Ones(M.rows());
  require(row_mass.minCoeff() > 0.0, errc::assembly, "mass form has non-positive lumped entry");
  Eigen::SimplicialLLT<SpMat> llt(M);
  require(llt.info() == Eigen::Success, errc::assembly, "mass form is not positive definite");

  return {h.mesh, h.w, std::move(B), std::move(M)};
}

struct SpectralResult {
  double lambda1 = 0.0;
  ScalarField u;           // positive, normalized to M(u,u) = 1
  double residual = 0.0;   // ||B u - lambda M u|| / ||M u||
  bool normalized = true;
  bool strictly_positive = true;  // min u > 0; see note at the sign-fixing step
  int iterations = 0;
};

inline double rayleigh_quotient(const StabilityForms& forms, const Eigen::VectorXd& u) {
  double denom = forms.m(u);
  require(denom > 0.0, errc::degenerate_input, "Rayleigh quotient with zero mass norm");
  return forms.b(u) / denom;
}

inline double rayleigh_quotient(const ConformalMetric& h, const ScalarField& u) {
  return rayleigh_quotient(assemble_stability_forms(h), u.values);
}

/// Smallest eigenpair of the pencil (B, M) by shifted inverse iteration with
/// a sparse factorization. The shift starts below a Gershgorin-style lower
/// bound of the pencil and is lowered until the shifted matrix factors
/// positive definite.
inline SpectralResult principal_eigenpair(const StabilityForms& forms, double tol = 1e-10,
                                          int max_iterations = 500) {
  require(tol > 0.0 && tol <= 1e-2, errc::bounds, "tol must lie in (0, 1e-2]");
  const SpMat& B = forms.B;
  const SpMat& M = forms.M;
  const int n = B.rows();

  Eigen::VectorXd row_mass = M * Eigen::VectorXd::Ones(n);
  double glb = std::numeric_limits<double>::infinity();
  {
    Eigen::VectorXd diag(n), offsum = Eigen::VectorXd::Zero(n);
    diag.setZero();
    for (int k = 0; k < B.outerSize(); ++k)
      for (SpMat::InnerIterator it(B, k); it; ++it) {
        if (it.row() == it.col())
          diag[it.row()] = it.value();
        else
          offsum[it.row()] += std::abs(it.value());
      }
    for (int i = 0; i < n; ++i) glb = std::min(glb, (diag[i] - offsum[i]) / row_mass[i]);
  }

  double shift = std::min(0.0, glb) - 1.0;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  for (int attempt = 0;; ++attempt) {
    SpMat A = B - shift * M;
    ldlt.compute(A);
    if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) break;
    require(attempt < 12, errc::convergence, "could not find a positive definite shift");
    shift = 2.0 * shift - 1.0;
  }

  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  v /= std::sqrt(forms.m(v));
  double lambda = rayleigh_quotient(forms, v);
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < max_iterations; ++it) {
    Eigen::VectorXd x = ldlt.solve(M * v);
    x /= std::sqrt(forms.m(x));
    double lambda_new = forms.b(x);
    Eigen::VectorXd Mx = M * x;
    residual = (B * x - lambda_new * Mx).norm() / Mx.norm();
    bool done = std::abs(lambda_new - lambda) < tol * std::max(1.0, std::abs(lambda_new)) &&
                residual < tol * std::max(1.0, std::abs(lambda_new));
    lambda = lambda_new;
    v = x;
    if (done) break;
  }
  if (it == max_iterations) {
    std::ostringstream msg;
    msg << "eigenpair iteration did not converge: lambda=" << lambda << " residual=" << residual;
    fail(errc::convergence, msg.str());
  }

  // Deterministic sign: the vertex of largest magnitude is positive. The
  // principal eigenfunction is positive; the discrete one can undershoot
  // slightly below zero on extreme metrics (the curvature form breaks the
  // M-matrix structure), so sign changes are rejected only beyond a small
  // relative undershoot that separates ground states from excited ones.
  int imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0.0) v = -v;
  require(v.minCoeff() > -1e-3 * v.maxCoeff(), errc::convergence,
          "eigenvector changes sign; not the principal eigenfunction");

  SpectralResult r;
  r.lambda1 = lambda;
  r.strictly_positive = v.minCoeff() > 0.0;
  r.u = {forms.mesh, std::move(v)};
  r.residual = residual;
  r.iterations = it + 1;
  return r;
}

inline SpectralResult principal_eigenpair(const ConformalMetric& h, double tol = 1e-10,
                                          int max_iterations = 500) {
  return principal_eigenpair(assemble_stability_forms(h), tol, max_iterations);
}

enum class Verdict { yes, no, inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct PositivityReport {
  Verdict verdict = Verdict::inconclusive;
  double lambda_fine = 0.0;
  double lambda_coarse = 0.0;
  double error_estimate = 0.0;  // |lambda_fine - lambda_coarse|, infinite at level 0
};

/// Membership test for the space of metrics with positive principal
/// eigenvalue. The discretization error is estimated from the eigenvalue gap
/// between this refinement level and the next coarser one (meshes are nested,
/// so the coarse factor is the leading slice of w).
inline PositivityReport spectral_positivity(const ConformalMetric& h, double margin = 0.0,
                                            double tol = 1e-10) {
  require(margin >= 0.0, errc::bounds, "margin must be non-negative");
  h.check();
  PositivityReport rep;
  rep.lambda_fine = principal_eigenpair(h, tol).lambda1;
  if (h.level() == 0) {
    rep.lambda_coarse = rep.lambda_fine;
    rep.error_estimate = std::numeric_limits<double>::infinity();
    rep.verdict = Verdict::inconclusive;
    return rep;
  }
  auto coarse_mesh = generate_disk_mesh(h.level() - 1);
  ConformalMetric hc{coarse_mesh, h.w.head(coarse_mesh->num_vertices()), h.label};
  rep.lambda_coarse = principal_eigenpair(hc, tol).lambda1;
  rep.error_estimate = std::abs(rep.lambda_fine - rep.lambda_coarse);
  if (rep.lambda_fine > margin + rep.error_estimate)
    rep.verdict = Verdict::yes;
  else if (rep.lambda_fine < -margin - rep.error_estimate)
    rep.verdict = Verdict::no;
  else
    rep.verdict = Verdict::inconclusive;
  return rep;
}

}  // namespace concord
