#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "planerecon/resample.hpp"

using namespace planerecon;
using Catch::Approx;

namespace {

PlaneFrame axis_aligned_frame(const GridSpec& g, int base_i, int base_j, int slab_k,
                              double thickness) {
  // pixel (i,j) lands exactly on voxel (base_i+i, base_j+j, slab_k)
  Vec3d origin = Vec3d{g.origin.x + base_i * g.spacing, g.origin.y + base_j * g.spacing,
                       g.origin.z + slab_k * g.spacing};
  return PlaneFrame(16, 16, g.spacing, g.spacing, thickness,
                    RigidPose{Mat3::identity(), origin});
}

}  // namespace

TEST_CASE("identity embedding produces an exact slab", "[resample]") {
  GridSpec g = GridSpec::centered_cube(32, 1.0);
  PlaneFrame f = axis_aligned_frame(g, 8, 8, 16, 5.0);
  Mask2D m = test_helpers::disk_mask(16, 16, 8, 8, 5);

  LabelVolume out = resample_plane_to_world(m, f, g);

  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i)
      for (int dz = -4; dz <= 4; ++dz) {
        bool expect = m.at(i, j) && std::abs(dz) <= 2;  // thickness/spacing = 5 voxels
        CHECK(int(out.at(8 + i, 8 + j, 16 + dz)) == int(expect));
      }
}

TEST_CASE("rotated plane deposits a pixel at its posed world position", "[resample]") {
  GridSpec g = GridSpec::centered_cube(32, 1.0);
  RigidPose pose{Mat3::rotation_z(M_PI / 4), {2.2, -3.3, 1.1}};
  PlaneFrame f(8, 8, 1.0, 1.0, 3.0, pose);
  Mask2D m(8, 8, 1.0, 1.0, 0);
  m.at(0, 0) = 1;

  LabelVolume out = resample_plane_to_world(m, f, g);
  Vec3d expected = pose * Vec3d{0, 0, 0};

  REQUIRE(count_foreground(out) > 0);
  Vec3d centroid = centroid_world(out);
  CHECK((centroid - expected).norm() < g.spacing);
  Vec3d v = out.world_to_voxel(expected);
  CHECK(out.at(int(std::lround(v.x)), int(std::lround(v.y)), int(std::lround(v.z))) == 1);
}

TEST_CASE("plane outside the grid yields an empty volume", "[resample]") {
  GridSpec g = GridSpec::centered_cube(16, 1.0);
  PlaneFrame f(8, 8, 1.0, 1.0, 2.0, RigidPose{Mat3::identity(), {500, 500, 500}});
  Mask2D m = test_helpers::disk_mask(8, 8, 4, 4, 3);
  LabelVolume out = resample_plane_to_world(m, f, g);
  CHECK(count_foreground(out) == 0);
}

TEST_CASE("world centroid matches the pose-transformed 2d centroid", "[resample][property]") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI), shift(-3, 3);
  GridSpec g = GridSpec::centered_cube(64, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Mask2D m = test_helpers::random_blob(rng, 32, 32);
    // rotate about the plane center and keep the plane inside the grid
    Mat3 rot = Mat3::rotation_z(angle(rng));
    Vec3d center{shift(rng), shift(rng), shift(rng)};
    Vec3d origin = center - rot * Vec3d{15.5, 15.5, 0.0};
    RigidPose pose{rot, origin};
    PlaneFrame f(32, 32, 1.0, 1.0, 4.0, pose);
    LabelVolume out = resample_plane_to_world(m, f, g);
    REQUIRE(count_foreground(out) > 0);
    Vec2d c2 = centroid_px(m);
    Vec3d expected = pose * Vec3d{c2.x * f.su, c2.y * f.sv, 0.0};
    CHECK((centroid_world(out) - expected).norm() < g.spacing);
  }
}

TEST_CASE("union with an empty volume is the identity", "[union]") {
  GridSpec g = GridSpec::centered_cube(16, 1.0);
  LabelVolume a = g.make_labels();
  a.at(4, 4, 4) = 1;
  a.at(5, 4, 4) = 1;
  LabelVolume empty = g.make_labels();
  LabelVolume u = union_labels({a, empty});
  CHECK(u.data == a.data);
}

TEST_CASE("disjoint slabs add their voxel counts", "[union]") {
  GridSpec g = GridSpec::centered_cube(16, 1.0);
  LabelVolume a = g.make_labels(), b = g.make_labels();
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) {
      a.at(i, j, 3) = 1;
      b.at(i, j, 9) = 1;
    }
  LabelVolume u = union_labels({a, b});
  CHECK(count_foreground(u) == count_foreground(a) + count_foreground(b));
}

TEST_CASE("union of plane labels equals a voxelwise oracle", "[union]") {
  GridSpec g = GridSpec::centered_cube(48, 1.0);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::vector<LabelVolume> vols;
  for (int p = 0; p < 5; ++p) {
    Mask2D m = test_helpers::random_blob(rng, 32, 32);
    RigidPose pose{Mat3::rotation_z(angle(rng)), {-16, -16, double(p - 2)}};
    vols.push_back(resample_plane_to_world(m, PlaneFrame(32, 32, 1, 1, 3.0, pose), g));
  }
  LabelVolume u = union_labels(vols);
  size_t count = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    std::uint8_t expect = 0;
    for (const auto& v : vols) expect |= v.data[i];
    REQUIRE(u.data[i] == expect);
    count += expect;
  }
  CHECK(count_foreground(u) == count);
}

TEST_CASE("union is commutative, associative and idempotent", "[union][property]") {
  GridSpec g = GridSpec::centered_cube(12, 1.0);
  std::mt19937 rng(5);
  std::bernoulli_distribution bit(0.3);
  for (int trial = 0; trial < 20; ++trial) {
    LabelVolume a = g.make_labels(), b = g.make_labels(), c = g.make_labels();
    for (size_t i = 0; i < a.size(); ++i) {
      a.data[i] = bit(rng);
      b.data[i] = bit(rng);
      c.data[i] = bit(rng);
    }
    CHECK(union_labels({a, b}).data == union_labels({b, a}).data);
    CHECK(union_labels({union_labels({a, b}), c}).data ==
          union_labels({a, union_labels({b, c})}).data);
    CHECK(union_labels({a, a}).data == a.data);
  }
}

TEST_CASE("mismatched grids are rejected", "[union]") {
  LabelVolume a(8, 8, 8, 1.0, {0, 0, 0});
  LabelVolume b(8, 8, 8, 2.0, {0, 0, 0});
  CHECK_THROWS_AS(union_labels({a, b}), GridMismatchError);
}
