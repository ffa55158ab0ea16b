#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "wavestruct/geometry.hpp"

using namespace wavestruct;

namespace {
Vec2 closure(const BoundaryMesh& m) {
  Vec2 s = Vec2::Zero();
  for (int p = 0; p < m.panel_count(); ++p) s += m.length(p) * m.normal(p);
  return s;
}
}  // namespace

TEST_CASE("circle boundary") {
  const auto m4 = circle_boundary(1.0, 4);
  REQUIRE(m4.node_count() == 4);
  for (int k = 0; k < 4; ++k) {
    const double a = k * std::numbers::pi / 2;
    CHECK((m4.nodes()[k] - Vec2(std::cos(a), std::sin(a))).norm() < 1e-15);
  }
  const auto m360 = circle_boundary(1.0, 360);
  CHECK(m360.perimeter() == doctest::Approx(2 * 360 * std::sin(std::numbers::pi / 360)));
  CHECK(m360.perimeter() == doctest::Approx(6.283104).epsilon(1e-6));
  CHECK(m360.normal(0).x() > 0.0);
  CHECK(m360.signed_area() > 0.0);
  CHECK(closure(m360).norm() < 1e-12);
  CHECK_THROWS_AS(circle_boundary(1.0, 3), ParameterError);
  CHECK_THROWS_AS(circle_boundary(0.0, 8), ParameterError);
}

TEST_CASE("perimeter defect is second order") {
  const double two_pi = 2 * std::numbers::pi;
  for (int n : {16, 32, 64, 128}) {
    const double d1 = two_pi - circle_boundary(1.0, n).perimeter();
    const double d2 = two_pi - circle_boundary(1.0, 2 * n).perimeter();
    CHECK(d1 / d2 >= 3.8);
    CHECK(d1 / d2 <= 4.2);
  }
}

TEST_CASE("rectangle boundary") {
  const auto big = rectangle_boundary(1, 3, 1, 2, 10.0);
  CHECK(big.panel_count() == 4);
  CHECK(big.perimeter() == doctest::Approx(6.0));
  const auto unit = rectangle_boundary(0, 1, 0, 1, 0.5);
  REQUIRE(unit.panel_count() == 8);
  for (int p = 0; p < 8; ++p) CHECK(unit.length(p) == doctest::Approx(0.5));
  for (int p = 0; p < 8; ++p) {
    if (std::abs(unit.midpoint(p).y()) < 1e-14) CHECK((unit.normal(p) - Vec2(0, -1)).norm() < 1e-15);
  }
  const auto fine = rectangle_boundary(1, 3, 1, 2, 0.07);
  CHECK(fine.max_panel_length() <= 0.07);
  CHECK(fine.signed_area() == doctest::Approx(2.0));
  CHECK(closure(fine).norm() < 1e-12);
  CHECK_THROWS_AS(rectangle_boundary(1, 1, 0, 1, 0.1), ParameterError);
  CHECK_THROWS_AS(rectangle_boundary(0, 1, 0, 1, 0.0), ParameterError);
}

TEST_CASE("boundary mesh validation") {
  std::vector<Vec2> pts{{0, 0}, {1, 0}, {0, 1}};
  CHECK_NOTHROW(BoundaryMesh(pts, {{0, 1}, {1, 2}, {2, 0}}));
  CHECK_THROWS_AS(BoundaryMesh(pts, {{0, 2}, {2, 1}, {1, 0}}), ParameterError);  // clockwise
  CHECK_THROWS_AS(BoundaryMesh(pts, {{0, 1}, {1, 2}, {2, 1}}), ParameterError);  // not a loop
}

TEST_CASE("triangulated rectangle") {
  const auto [one, b1] = triangulate_rectangle(0, 1, 0, 1, 1, 1);
  CHECK(one.triangle_count() == 2);
  CHECK(one.total_area() == doctest::Approx(1.0));

  const int nx = 7, ny = 4;
  const auto [mesh, boundary] = triangulate_rectangle(1, 3, 1, 2, nx, ny);
  CHECK(mesh.triangle_count() == 2 * nx * ny);
  CHECK(boundary.panel_count() == 2 * (nx + ny));
  CHECK(static_cast<int>(mesh.boundary_edges().size()) == 2 * (nx + ny));
  CHECK(std::abs(mesh.total_area() - 2.0) < 1e-12);
  for (int t = 0; t < mesh.triangle_count(); ++t) CHECK(mesh.signed_area(t) > 0.0);
  for (int b = 0; b < boundary.node_count(); ++b) {
    CHECK((mesh.vertices()[mesh.boundary_vertex()[b]] - boundary.nodes()[b]).norm() < 1e-15);
  }
  CHECK_THROWS_AS(triangulate_rectangle(0, 1, 0, 1, 0, 2), ParameterError);
}

TEST_CASE("non-conforming boundary is rejected") {
  auto [mesh, boundary] = triangulate_rectangle(0, 1, 0, 1, 2, 2);
  const auto coarse = rectangle_boundary(0, 1, 0, 1, 0.34);  // 3 panels per side
  CHECK_THROWS_AS(mesh.attach_boundary(coarse), InterfaceError);
}

TEST_CASE("mesh csv dump") {
  const auto [mesh, boundary] = triangulate_rectangle(0, 1, 0, 1, 1, 1);
  std::ostringstream os;
  write_mesh_csv(os, boundary, &mesh);
  const auto s = os.str();
  CHECK(s.find("nodes") != std::string::npos);
  CHECK(s.find("panels") != std::string::npos);
  CHECK(s.find("triangles") != std::string::npos);
}
