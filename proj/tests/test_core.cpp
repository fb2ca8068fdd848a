#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "planerecon/geometry.hpp"
#include "planerecon/grid.hpp"
#include "planerecon/io.hpp"

using namespace planerecon;
using Catch::Approx;

TEST_CASE("rotation about z is orthonormal with det +1", "[geometry]") {
  for (double a : {0.1, 0.7, -1.3, M_PI / 4}) {
    Mat3 r = Mat3::rotation_z(a);
    CHECK(r.orthonormality_error() < 1e-12);
    CHECK(r.det() == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("rigid pose inverse round trip", "[geometry]") {
  RigidPose pose{Mat3::rotation_z(0.9), {3.0, -2.0, 5.0}};
  RigidPose inv = pose.inverse();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int i = 0; i < 100; ++i) {
    Vec3d p{u(rng), u(rng), u(rng)};
    CHECK((inv * (pose * p) - p).norm() < 1e-12);
  }
}

TEST_CASE("plane frame coordinates round trip", "[grid]") {
  PlaneFrame f(64, 64, 1.09, 1.09, 5.0, RigidPose{Mat3::rotation_z(M_PI / 4), {10, 0, -4}});
  Vec3d w = f.pixel_to_world(12, 30);
  Vec3d local = f.world_to_plane(w);
  CHECK(local.x == Approx(12 * 1.09).margin(1e-9));
  CHECK(local.y == Approx(30 * 1.09).margin(1e-9));
  CHECK(local.z == Approx(0.0).margin(1e-9));
}

TEST_CASE("plane frame rejects degenerate poses", "[grid]") {
  Mat3 bad = Mat3::from_columns({1, 0, 0}, {1, 0, 0}, {0, 0, 1});
  CHECK_THROWS_AS(PlaneFrame(8, 8, 1, 1, 1, RigidPose{bad, {}}), ConfigError);
  CHECK_THROWS_AS(PlaneFrame(8, 8, -1, 1, 1, RigidPose{}), ConfigError);
}

TEST_CASE("grid3 voxel/world round trip", "[grid]") {
  Grid3<float> g(10, 12, 14, 1.5, {-5, -6, -7});
  Vec3d w = g.voxel_to_world(3, 4, 5);
  Vec3d v = g.world_to_voxel(w);
  CHECK(v.x == Approx(3.0).margin(1e-12));
  CHECK(v.y == Approx(4.0).margin(1e-12));
  CHECK(v.z == Approx(5.0).margin(1e-12));
}

TEST_CASE("volume files round trip", "[io]") {
  auto dir = test_helpers::temp_dir("io");

  LabelVolume labels(5, 6, 7, 1.09, {-1, 2, 3});
  for (size_t i = 0; i < labels.size(); ++i) labels.data[i] = std::uint8_t(i % 2);
  write_volume(dir / "labels", labels);
  auto labels2 = read_volume<std::uint8_t>(dir / "labels.pvh");
  CHECK(labels2.same_geometry(labels));
  CHECK(labels2.data == labels.data);

  ScalarVolume scal(4, 4, 4, 2.0, {0, 0, 0});
  for (size_t i = 0; i < scal.size(); ++i) scal.data[i] = float(i) * 0.25f;
  write_volume(dir / "scal", scal);
  auto scal2 = read_volume<float>(dir / "scal.pvh");
  CHECK(scal2.data == scal.data);

  VectorVolume field(3, 3, 3, 1.0, {0, 0, 0});
  for (size_t i = 0; i < field.size(); ++i) field.data[i] = Vec3f{float(i), -float(i), 0.5f};
  write_volume(dir / "field", field);
  auto field2 = read_vector_volume(dir / "field.pvh");
  CHECK(field2.data[13].x == field.data[13].x);
  CHECK(field2.data[26].y == field.data[26].y);

  CHECK_THROWS_AS(read_volume<float>(dir / "labels.pvh"), IoError);
}

TEST_CASE("slice mask files keep pixels and geometry", "[io]") {
  auto dir = test_helpers::temp_dir("io_slice");
  PlaneFrame f(16, 16, 1.36, 1.36, 6.0, RigidPose{Mat3::rotation_z(0.3), {1, 2, 3}});
  Mask2D m = test_helpers::disk_mask(16, 16, 8, 8, 4, 1.36, 1.36);
  write_slice_mask(dir / "m", m, f);
  Mask2D m2 = read_slice_mask(dir / "m.pvh");
  CHECK(m2.nu == m.nu);
  CHECK(m2.su == Approx(m.su));
  CHECK(m2.data == m.data);
}
