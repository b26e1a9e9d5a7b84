#include <catch2/catch_amalgamated.hpp>

#include "concord/metric.hpp"

using namespace concord;

namespace {
const double kPi = M_PI;
}

TEST_CASE("named metrics: flat is zero, scaled_flat is log c") {
  auto m = generate_disk_mesh(2);
  CHECK(named_metric(m, "flat").w.cwiseAbs().maxCoeff() == 0.0);
  auto s = named_metric(m, "scaled_flat:2.0");
  CHECK(s.w.minCoeff() == s.w.maxCoeff());
  CHECK(s.w[0] == Catch::Approx(std::log(2.0)).margin(1e-15));
  CHECK(named_metric(m, "scaled_flat:sqrt2").w[0] ==
        Catch::Approx(0.5 * std::log(2.0)).margin(1e-15));
  CHECK_THROWS_AS(named_metric(m, "nosuch"), Error);
  CHECK_THROWS_AS(named_metric(m, "scaled_flat:-1"), Error);
  CHECK_THROWS_AS(named_metric(m, "bump:1,0"), Error);
}

TEST_CASE("flat area approaches pi from below at second order") {
  // polygon-vs-disk deficit, measured: 2.9e-3 / 7.1e-4 / 1.8e-4 at levels 3..5
  double prev = 0.0;
  for (int lvl = 3; lvl <= 5; ++lvl) {
    double a = total_area(flat_metric(generate_disk_mesh(lvl)));
    CHECK(a < kPi);
    if (lvl > 3) CHECK(kPi - a < 0.3 * (kPi - prev));
    prev = a;
  }
  CHECK(std::abs(prev - kPi) / kPi < 1e-3);  // level 5
}

TEST_CASE("hemisphere area approaches 2 pi") {
  double a = total_area(hemisphere_metric(generate_disk_mesh(5)));
  CHECK(std::abs(a - 2.0 * kPi) / (2.0 * kPi) < 1e-3);
}

TEST_CASE("scaled_flat(sqrt 2) doubles the flat area") {
  auto m = generate_disk_mesh(4);
  double f = total_area(flat_metric(m));
  double s = total_area(scaled_flat_metric(m, std::sqrt(2.0)));
  CHECK(s == Catch::Approx(2.0 * f).epsilon(1e-12));
}

TEST_CASE("area is monotone along a scaling segment") {
  auto m = generate_disk_mesh(3);
  double c = 1.7, prev = 0.0;
  for (int i = 0; i <= 10; ++i) {
    double t = i / 10.0;
    ConformalMetric h{m, Eigen::VectorXd::Constant(m->num_vertices(), t * std::log(c)), ""};
    double a = total_area(h);
    if (i > 0) CHECK(a > prev);
    prev = a;
  }
}

TEST_CASE("Gauss curvature: flat and scaled-flat vanish identically") {
  auto m = generate_disk_mesh(4);
  CHECK(gauss_curvature(flat_metric(m)).values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(gauss_curvature(scaled_flat_metric(m, 3.0)).values.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Gauss curvature of the hemisphere tends to 1 on interior vertices") {
  // measured interior max deviation: 2.7e-2 / 6.8e-3 / 1.7e-3 at levels 3..5
  double prev = 0.0;
  for (int lvl = 3; lvl <= 5; ++lvl) {
    auto m = generate_disk_mesh(lvl);
    auto K = gauss_curvature(hemisphere_metric(m));
    double worst = 0.0;
    for (int v = 0; v < m->num_vertices(); ++v)
      if (!m->on_boundary[v]) worst = std::max(worst, std::abs(K.values[v] - 1.0));
    if (lvl > 3) CHECK(worst < prev);
    prev = worst;
  }
  CHECK(prev < 0.02);  // level 5
}

TEST_CASE("conformal shift identity: adding a constant scales K exactly") {
  auto m = generate_disk_mesh(3);
  auto h = bump_metric(m, 0.7, 0.1, 0.5);
  ConformalMetric hs{m, h.w.array() + 0.9, ""};
  auto K = gauss_curvature(h);
  auto Ks = gauss_curvature(hs);
  double scale = std::exp(-2.0 * 0.9);
  for (int v = 0; v < m->num_vertices(); ++v)
    CHECK(Ks.values[v] == Catch::Approx(scale * K.values[v]).margin(1e-13));
}

TEST_CASE("geodesic curvature: flat boundary is exactly 1") {
  auto kappa = geodesic_curvature(flat_metric(generate_disk_mesh(4)));
  CHECK(kappa.values.minCoeff() == 1.0);
  CHECK(kappa.values.maxCoeff() == 1.0);
}

TEST_CASE("geodesic curvature: homothety scales by 1/c") {
  auto m = generate_disk_mesh(3);
  double c = 2.5;
  auto kappa = geodesic_curvature(scaled_flat_metric(m, c));
  for (int i = 0; i < m->num_boundary(); ++i)
    CHECK(kappa.values[i] == Catch::Approx(1.0 / c).margin(1e-14));
}

TEST_CASE("geodesic curvature: the hemisphere equator is a geodesic") {
  // measured max |kappa|: 3.5e-3 / 1.5e-3 / 1.1e-3 at levels 3..5
  auto kappa = geodesic_curvature(hemisphere_metric(generate_disk_mesh(5)));
  CHECK(kappa.values.cwiseAbs().maxCoeff() < 2e-3);
}

TEST_CASE("discrete total curvature matches the closed-form 2 pi") {
  auto m = generate_disk_mesh(5);
  for (const auto& h : {flat_metric(m), hemisphere_metric(m), bump_metric(m, 0.8, 0.2, 0.5),
                        bump_metric(m, -1.0, 0.0, 0.6), bump_metric(m, 1.0, -0.3, 0.35)}) {
    CHECK(std::abs(gauss_bonnet_total(h) - 2.0 * kPi) < 1e-2);
  }
}

TEST_CASE("metrics with non-finite factors are rejected") {
  auto m = generate_disk_mesh(1);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m->num_vertices());
  w[3] = std::numeric_limits<double>::quiet_NaN();
  ConformalMetric h{m, w, "bad"};
  CHECK_THROWS_AS(total_area(h), Error);
}
