#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "concord/spectral.hpp"
#include "oracles.hpp"

using namespace concord;

TEST_CASE("the Robin-disk root oracle is self-consistent") {
  double k = oracles::robin_disk_root();
  CHECK(k == Catch::Approx(1.2558).margin(1e-3));
  CHECK(k * std::cyl_bessel_j(1, k) == Catch::Approx(std::cyl_bessel_j(0, k)).margin(1e-12));
}

TEST_CASE("flat-disk eigenvalue matches the Bessel oracle within 1%") {
  double lambda = principal_eigenpair(flat_metric(generate_disk_mesh(5)), 1e-12).lambda1;
  double ref = oracles::robin_disk_eigenvalue();  // k^2, k the root of k J1 = J0
  CHECK(std::abs(lambda - ref) / ref < 0.01);
}

TEST_CASE("hemisphere eigenvalue is 1 within 2% with a constant eigenfunction") {
  auto r = principal_eigenpair(hemisphere_metric(generate_disk_mesh(5)), 1e-12);
  CHECK(std::abs(r.lambda1 - 1.0) < 0.02);
  double mean = r.u.values.mean();
  CHECK((r.u.values.array() / mean - 1.0).abs().maxCoeff() < 1e-3);
}

TEST_CASE("eigenvalue increments at least halve from level 3 to 5") {
  for (auto make : {+[](std::shared_ptr<const DiskMesh> m) { return flat_metric(m); },
                    +[](std::shared_ptr<const DiskMesh> m) { return hemisphere_metric(m); }}) {
    double l3 = principal_eigenpair(make(generate_disk_mesh(3)), 1e-12).lambda1;
    double l4 = principal_eigenpair(make(generate_disk_mesh(4)), 1e-12).lambda1;
    double l5 = principal_eigenpair(make(generate_disk_mesh(5)), 1e-12).lambda1;
    CHECK(std::abs(l4 - l3) >= 2.0 * std::abs(l5 - l4));
  }
}

TEST_CASE("homothety law is exact at the discrete level") {
  auto m = generate_disk_mesh(4);
  for (auto& h : {flat_metric(m), hemisphere_metric(m)}) {
    double lambda = principal_eigenpair(h, 1e-12).lambda1;
    for (double c : {0.5, 2.0, 5.0}) {
      ConformalMetric hc{m, h.w.array() + std::log(c), ""};
      double lc = principal_eigenpair(hc, 1e-12).lambda1;
      CHECK(std::abs(lc * c * c - lambda) <= 1e-10 * std::max(1.0, std::abs(lambda)));
    }
  }
}

TEST_CASE("stability form on the constant: hemisphere gives the area 2 pi") {
  auto forms = assemble_stability_forms(hemisphere_metric(generate_disk_mesh(5)));
  Eigen::VectorXd one = Eigen::VectorXd::Ones(forms.B.rows());
  CHECK(std::abs(forms.b(one) - 2.0 * M_PI) / (2.0 * M_PI) < 0.02);
}

TEST_CASE("flat forms: B is stiffness plus boundary mass, M the flat mass") {
  auto m = generate_disk_mesh(2);
  auto forms = assemble_stability_forms(flat_metric(m));
  SpMat want = fem::stiffness_matrix(*m) + fem::boundary_mass_matrix(*m);
  CHECK((Eigen::MatrixXd(forms.B) - Eigen::MatrixXd(want)).cwiseAbs().maxCoeff() == 0.0);
  SpMat mass = fem::weighted_mass_matrix(*m, Eigen::VectorXd::Ones(m->num_vertices()));
  CHECK((Eigen::MatrixXd(forms.M) - Eigen::MatrixXd(mass)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Rayleigh quotient is scale-invariant") {
  auto m = generate_disk_mesh(3);
  auto forms = assemble_stability_forms(bump_metric(m, 0.5, 0.2, 0.5));
  std::mt19937 rng(7);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd u(m->num_vertices());
    for (int v = 0; v < m->num_vertices(); ++v) u[v] = dist(rng);
    double q1 = rayleigh_quotient(forms, u);
    double q2 = rayleigh_quotient(forms, Eigen::VectorXd(2.0 * u));
    CHECK(std::abs(q1 - q2) <= 1e-12 * std::max(1.0, std::abs(q1)));
  }
}

TEST_CASE("Rayleigh quotient of the constant on the flat disk is about 2") {
  auto m = generate_disk_mesh(5);
  auto forms = assemble_stability_forms(flat_metric(m));
  Eigen::VectorXd one = Eigen::VectorXd::Ones(m->num_vertices());
  double q = rayleigh_quotient(forms, one);  // boundary length / area -> 2
  CHECK(std::abs(q - 2.0) < 1e-3);
  CHECK(q >= principal_eigenpair(forms, 1e-10).lambda1);
}

TEST_CASE("Rayleigh quotient rejects the zero function") {
  auto forms = assemble_stability_forms(flat_metric(generate_disk_mesh(1)));
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(forms.M.rows());
  CHECK_THROWS_AS(rayleigh_quotient(forms, zero), Error);
}

TEST_CASE("principal eigenpair: residual, normalization, positivity, quotient") {
  auto m = generate_disk_mesh(4);
  auto h = bump_metric(m, -0.4, 0.25, 0.6);
  auto forms = assemble_stability_forms(h);
  auto r = principal_eigenpair(forms, 1e-11);
  CHECK(r.residual <= 1e-11 * std::max(1.0, std::abs(r.lambda1)));
  CHECK(std::abs(forms.m(r.u.values) - 1.0) <= 1e-12);
  CHECK(r.u.values.minCoeff() > 0.0);
  CHECK(r.strictly_positive);
  CHECK(std::abs(rayleigh_quotient(forms, r.u.values) - r.lambda1) <=
        1e-10 * std::max(1.0, std::abs(r.lambda1)));
}

TEST_CASE("solver tolerance is range-checked") {
  auto forms = assemble_stability_forms(flat_metric(generate_disk_mesh(1)));
  CHECK_THROWS_AS(principal_eigenpair(forms, 0.0), Error);
  CHECK_THROWS_AS(principal_eigenpair(forms, 0.1), Error);
}

TEST_CASE("positivity verdicts: hemisphere and flat are in the class") {
  auto m = generate_disk_mesh(4);
  auto hemi = spectral_positivity(hemisphere_metric(m));
  CHECK(hemi.verdict == Verdict::yes);
  CHECK(hemi.lambda_fine == Catch::Approx(1.0).margin(0.02));
  auto flat = spectral_positivity(flat_metric(m));
  CHECK(flat.verdict == Verdict::yes);
  CHECK(flat.lambda_fine == Catch::Approx(1.577).margin(0.02));
}

TEST_CASE("positivity verdict: deep wide negative bump leaves the class") {
  // regression value: the verdict, not the (huge, mesh-limited) eigenvalue
  auto rep = spectral_positivity(bump_metric(generate_disk_mesh(4), -8.0, 0.0, 1.0));
  CHECK(rep.verdict == Verdict::no);
  CHECK(rep.lambda_fine < 0.0);
}

TEST_CASE("positivity at level 0 is inconclusive (no coarser level)") {
  auto rep = spectral_positivity(flat_metric(generate_disk_mesh(0)));
  CHECK(rep.verdict == Verdict::inconclusive);
}

TEST_CASE("eigenvalue convexity along a conformal combination") {
  auto m = generate_disk_mesh(4);
  auto h1 = bump_metric(m, 0.3, 0.2, 0.5);
  auto h2 = bump_metric(m, -0.3, -0.2, 0.6);
  double l1 = principal_eigenpair(h1, 1e-11).lambda1;
  double l2 = principal_eigenpair(h2, 1e-11).lambda1;
  REQUIRE(l1 > 0.0);
  REQUIRE(l2 > 0.0);
  double wbar = std::max(h1.w.cwiseAbs().maxCoeff(), h2.w.cwiseAbs().maxCoeff());
  double rho = std::exp(-2.0 * wbar);
  for (double t : {0.25, 0.5, 0.75}) {
    ConformalMetric ht{m, (1.0 - t) * h1.w + t * h2.w, ""};
    auto rep = spectral_positivity(ht);
    CHECK(rep.verdict == Verdict::yes);
    CHECK(rep.lambda_fine >= rho * ((1.0 - t) * l1 + t * l2) - rep.error_estimate);
  }
}
