#include <catch2/catch_amalgamated.hpp>

#include "concord/mesh.hpp"

using namespace concord;

TEST_CASE("level-0 fan has the forced counts") {
  auto m = generate_disk_mesh(0);
  CHECK(m->num_vertices() == 7);
  CHECK(m->num_edges() == 12);
  CHECK(m->num_triangles() == 6);
  CHECK(m->num_boundary() == 6);
}

TEST_CASE("one subdivision quadruples faces and doubles the boundary") {
  auto m = generate_disk_mesh(1);
  CHECK(m->num_triangles() == 24);
  CHECK(m->num_boundary() == 12);
}

TEST_CASE("disk Euler characteristic and boundary count at every level") {
  for (int lvl = 0; lvl <= 6; ++lvl) {
    auto m = generate_disk_mesh(lvl);
    CHECK(m->num_vertices() - m->num_edges() + m->num_triangles() == 1);
    CHECK(m->num_boundary() == 6 * (1 << lvl));
  }
}

TEST_CASE("boundary vertices sit on the unit circle") {
  auto m = generate_disk_mesh(4);
  for (int v : m->boundary_loop) CHECK(std::abs(m->vertices[v].norm() - 1.0) <= 1e-12);
}

TEST_CASE("all signed areas positive") {
  auto m = generate_disk_mesh(3);
  for (int t = 0; t < m->num_triangles(); ++t) CHECK(m->signed_area(t) > 0.0);
}

TEST_CASE("refinement is nested: coarse vertices are a prefix with equal coordinates") {
  for (int lvl = 0; lvl <= 4; ++lvl) {
    auto c = generate_disk_mesh(lvl);
    auto f = generate_disk_mesh(lvl + 1);
    REQUIRE(f->num_vertices() > c->num_vertices());
    for (int v = 0; v < c->num_vertices(); ++v) {
      CHECK(c->vertices[v].x() == f->vertices[v].x());
      CHECK(c->vertices[v].y() == f->vertices[v].y());
    }
  }
}

TEST_CASE("generation is deterministic down to the bits") {
  auto a = generate_disk_mesh(4);
  auto b = generate_disk_mesh(4);
  REQUIRE(a->num_vertices() == b->num_vertices());
  for (int v = 0; v < a->num_vertices(); ++v) CHECK(a->vertices[v] == b->vertices[v]);
  CHECK(a->triangles == b->triangles);
  CHECK(a->boundary_loop == b->boundary_loop);
}

TEST_CASE("quality report: equilateral fan at level 0") {
  auto q = mesh_quality_report(*generate_disk_mesh(0));
  CHECK(q.min_angle_deg == Catch::Approx(60.0).margin(1e-9));
  CHECK(q.max_angle_deg == Catch::Approx(60.0).margin(1e-9));
}

TEST_CASE("minimum edge length stays positive and halves under refinement") {
  double prev = 0.0;
  for (int lvl = 0; lvl <= 5; ++lvl) {
    auto q = mesh_quality_report(*generate_disk_mesh(lvl));
    CHECK(q.min_edge > 0.0);
    if (lvl > 0) {
      double ratio = q.min_edge / prev;
      CHECK(ratio >= 0.4);
      CHECK(ratio <= 0.6);
    }
    prev = q.min_edge;
  }
}

TEST_CASE("refinement level is range-checked") {
  CHECK_THROWS_AS(generate_disk_mesh(-1), Error);
  CHECK_THROWS_AS(generate_disk_mesh(11), Error);
  try {
    generate_disk_mesh(42);
    FAIL("expected a bounds error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::bounds);
  }
}

TEST_CASE("P1 interpolation reproduces affine functions exactly") {
  auto m = generate_disk_mesh(3);
  Eigen::VectorXd f(m->num_vertices());
  for (int v = 0; v < m->num_vertices(); ++v)
    f[v] = 1.5 + 2.0 * m->vertices[v].x() - 0.7 * m->vertices[v].y();
  P1Locator loc(*m);
  int hint = 0;
  for (Vec2 p : {Vec2(0.1, 0.2), Vec2(-0.6, 0.3), Vec2(0.0, -0.9), Vec2(0.7, 0.7 * 0.6)}) {
    double want = 1.5 + 2.0 * p.x() - 0.7 * p.y();
    CHECK(loc.eval(f, p, &hint) == Catch::Approx(want).margin(1e-13));
  }
}

TEST_CASE("quality report rejects degenerate triangles") {
  DiskMesh m;
  m.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)};
  m.triangles = {{0, 1, 2}};
  CHECK_THROWS_AS(mesh_quality_report(m), Error);
}
