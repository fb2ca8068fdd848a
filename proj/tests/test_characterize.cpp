#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "planerecon/characterize.hpp"
#include "planerecon/metrics.hpp"

using namespace planerecon;
using Catch::Approx;

TEST_CASE("zero displacement has unit jacobian", "[characterize]") {
  VectorVolume u(16, 16, 16, 1.0, {0, 0, 0});
  ScalarVolume j = jacobian_map(u);
  for (float v : j.data) REQUIRE(v == 1.0f);
}

TEST_CASE("uniform 10 percent inflation has determinant 1.331", "[characterize]") {
  VectorVolume u(24, 24, 24, 1.0, {0, 0, 0});
  Vec3d c{11.5, 11.5, 11.5};
  for (int k = 0; k < 24; ++k)
    for (int j = 0; j < 24; ++j)
      for (int i = 0; i < 24; ++i)
        u.at(i, j, k) = ((Vec3d{double(i), double(j), double(k)} - c) * 0.1).cast<float>();
  ScalarVolume jm = jacobian_map(u);
  for (int k = 1; k < 23; ++k)
    for (int j = 1; j < 23; ++j)
      for (int i = 1; i < 23; ++i)
        REQUIRE(double(jm.at(i, j, k)) == Approx(1.331).margin(1e-5));
}

TEST_CASE("sinusoidal displacement matches the closed-form determinant", "[characterize]") {
  const int n = 48;
  const double a = 1.0, alpha = 2 * M_PI / 64.0, beta = 2 * M_PI / 72.0, gamma = 2 * M_PI / 60.0;
  VectorVolume u(n, n, n, 1.0, {0, 0, 0});
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        u.at(i, j, k) = Vec3f{float(a * std::sin(alpha * i) * std::cos(beta * j)),
                              float(a * std::sin(beta * j) * std::cos(gamma * k)),
                              float(a * std::sin(gamma * k) * std::cos(alpha * i))};
  ScalarVolume jm = jacobian_map(u);

  double worst_rel = 0;
  for (int k = 2; k < n - 2; ++k)
    for (int j = 2; j < n - 2; ++j)
      for (int i = 2; i < n - 2; ++i) {
        double dux_dx = a * alpha * std::cos(alpha * i) * std::cos(beta * j);
        double dux_dy = -a * beta * std::sin(alpha * i) * std::sin(beta * j);
        double duy_dy = a * beta * std::cos(beta * j) * std::cos(gamma * k);
        double duy_dz = -a * gamma * std::sin(beta * j) * std::sin(gamma * k);
        double duz_dz = a * gamma * std::cos(gamma * k) * std::cos(alpha * i);
        double duz_dx = -a * alpha * std::sin(gamma * k) * std::sin(alpha * i);
        double exact = (1 + dux_dx) * (1 + duy_dy) * (1 + duz_dz) +
                       dux_dy * duy_dz * duz_dx;
        worst_rel = std::max(worst_rel,
                             std::abs(double(jm.at(i, j, k)) - exact) / std::abs(exact));
      }
  CHECK(worst_rel <= 1e-3);
}

TEST_CASE("identical jacobian maps give zero sigma", "[characterize]") {
  ScalarVolume m(12, 12, 12, 1.0, {0, 0, 0}, 1.2f);
  ScalarVolume s = sigma_j({m, m, m});
  for (float v : s.data) REQUIRE(v == 0.0f);
}

TEST_CASE("two-point standard deviation uses the population divisor", "[characterize]") {
  ScalarVolume a(4, 4, 4, 1.0, {0, 0, 0}, 0.9f);
  ScalarVolume b(4, 4, 4, 1.0, {0, 0, 0}, 1.1f);
  ScalarVolume s = sigma_j({a, b});
  for (float v : s.data) REQUIRE(double(v) == Approx(0.1).margin(1e-7));
}

TEST_CASE("streaming accumulator equals a direct recomputation", "[characterize]") {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> u(0.8, 1.2);
  GridSpec spec = GridSpec::centered_cube(10, 1.0);
  std::vector<ScalarVolume> maps;
  SigmaJAccumulator acc(spec);
  for (int f = 0; f < 7; ++f) {
    ScalarVolume m = spec.make_scalars();
    for (auto& v : m.data) v = float(u(rng));
    maps.push_back(m);
    acc.add(m);
  }
  ScalarVolume streamed = acc.finish();
  for (size_t c = 0; c < streamed.size(); ++c) {
    double mean = 0;
    for (const auto& m : maps) mean += m.data[c];
    mean /= 7.0;
    double var = 0;
    for (const auto& m : maps) var += (m.data[c] - mean) * (m.data[c] - mean);
    double direct = std::sqrt(var / 7.0);
    REQUIRE(double(streamed.data[c]) == Approx(direct).margin(1e-12));
  }

  ScalarVolume wrong(5, 5, 5, 2.0, {0, 0, 0});
  CHECK_THROWS_AS(acc.add(wrong), GridMismatchError);
  CHECK_THROWS_AS(sigma_j({maps[0]}), ConfigError);
}

TEST_CASE("ball mesh volume and topology", "[mesh]") {
  LabelVolume ball = test_helpers::ball_labels(45, 22, 22, 22, 20);
  SurfaceMesh mesh = extract_mesh(ball);

  double analytic = 4.0 / 3.0 * M_PI * 20.0 * 20.0 * 20.0;
  double voxels = double(count_foreground(ball));
  CHECK(mesh.volume() == Approx(voxels).epsilon(0.02));
  CHECK(mesh.volume() == Approx(analytic).epsilon(0.02));
  CHECK(mesh.euler_characteristic() == 2);

  // vertices sit within one voxel of the label boundary
  std::vector<Vec3d> boundary = boundary_points_world(ball);
  KdTree3 tree(boundary);
  double worst = 0;
  for (const auto& v : mesh.vertices) worst = std::max(worst, std::sqrt(tree.nearest(v).second));
  CHECK(worst <= 1.0);
}

TEST_CASE("multiple components reduce to the largest", "[mesh]") {
  LabelVolume two = test_helpers::ball_labels(48, 16, 16, 16, 10);
  for (int k = 36; k < 44; ++k)
    for (int j = 36; j < 44; ++j)
      for (int i = 36; i < 44; ++i) two.at(i, j, k) = 1;
  SurfaceMesh mesh = extract_mesh(two);
  double big = 4.0 / 3.0 * M_PI * 1000.0;
  CHECK(mesh.volume() == Approx(big).epsilon(0.05));
}

TEST_CASE("projection of a constant map is that constant", "[mesh]") {
  LabelVolume ball = test_helpers::ball_labels(33, 16, 16, 16, 10);
  SurfaceMesh mesh = extract_mesh(ball);
  ScalarVolume constant(33, 33, 33, 1.0, {0, 0, 0}, 2.5f);
  int fallbacks = project_to_mesh(constant, mesh, 4.0);
  CHECK(fallbacks == 0);
  for (double q : mesh.quality) REQUIRE(q == Approx(2.5).margin(1e-9));
}

TEST_CASE("small-radius projection approximates a trilinear sample", "[mesh]") {
  LabelVolume ball = test_helpers::ball_labels(33, 16, 16, 16, 9);
  SurfaceMesh mesh = extract_mesh(ball);
  ScalarVolume ramp(33, 33, 33, 1.0, {0, 0, 0});
  for (int k = 0; k < 33; ++k)
    for (int j = 0; j < 33; ++j)
      for (int i = 0; i < 33; ++i) ramp.at(i, j, k) = float(0.05 * i - 0.02 * j + 0.01 * k);
  project_to_mesh(ramp, mesh, 0.6);
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    Vec3d c = ramp.world_to_voxel(mesh.vertices[v]);
    double tri = sample_trilinear(ramp, c.x, c.y, c.z);
    REQUIRE(mesh.quality[v] == Approx(tri).margin(0.05 + 0.02 + 0.01));  // one voxel gradient
  }
}

TEST_CASE("projection ignores map values outside every sphere", "[mesh]") {
  LabelVolume ball = test_helpers::ball_labels(41, 20, 20, 20, 12);
  SurfaceMesh mesh = extract_mesh(ball);
  ScalarVolume map(41, 41, 41, 1.0, {0, 0, 0}, 1.0f);
  project_to_mesh(map, mesh, 4.0);
  std::vector<double> before = mesh.quality;

  // poke values deep inside (more than 4 mm from every surface vertex)
  map.at(20, 20, 20) = 50.f;
  map.at(20, 21, 20) = -50.f;
  project_to_mesh(map, mesh, 4.0);
  CHECK(mesh.quality == before);
}

TEST_CASE("tiny projection radius falls back to trilinear samples", "[mesh]") {
  LabelVolume ball = test_helpers::ball_labels(25, 12, 12, 12, 7);
  SurfaceMesh mesh = extract_mesh(ball);
  ScalarVolume map(25, 25, 25, 1.0, {0, 0, 0}, 3.0f);
  int fallbacks = project_to_mesh(map, mesh, 0.05);
  CHECK(fallbacks > 0);
  for (double q : mesh.quality) REQUIRE(q == Approx(3.0).margin(1e-9));
}
