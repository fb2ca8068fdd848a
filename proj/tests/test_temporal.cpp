#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "planerecon/temporal.hpp"

using namespace planerecon;
using Catch::Approx;

namespace {

MaskMatrix phantom_matrix(double amplitude, int n_cycles, double translation = 8.0,
                          double period = 2.5) {
  PhantomSpec spec;
  spec.amplitude = amplitude;
  spec.translation_amplitude_mm = translation;
  spec.breathing_period_s = period;
  Phantom ph(spec);
  ConfigParams p;
  p.n_cycles = n_cycles;
  auto cfg = make_configuration(ConfigKind::Star, 72.0, p);
  auto series = acquire_series(cfg, ph);
  std::vector<std::vector<Mask2D>> per_plane;
  std::vector<PlaneFrame> frames;
  for (const auto& plane : series.planes) {
    per_plane.push_back(plane.gt_masks);
    frames.push_back(plane.frame);
  }
  return assemble_matrix(per_plane, frames, series.schedule);
}

double mean_zeta(const std::vector<ZetaRow>& rows) {
  REQUIRE(!rows.empty());
  double s = 0;
  for (const auto& r : rows) s += r.zeta_mm;
  return s / double(rows.size());
}

}  // namespace

TEST_CASE("assembled matrix has the interleaved diagonal pattern", "[temporal]") {
  MaskMatrix m = phantom_matrix(0.1, 2);
  REQUIRE(m.n_planes == 4);
  REQUIRE(m.n_instants() == 8);
  int acquired = 0;
  for (int t = 0; t < m.n_instants(); ++t)
    for (int p = 0; p < m.n_planes; ++p) {
      bool on_diagonal = (p == t % m.n_planes);
      CHECK((m.tag(t, p) == SlotTag::Acquired) == on_diagonal);
      acquired += m.tag(t, p) == SlotTag::Acquired;
    }
  CHECK(acquired == m.n_planes * m.n_cycles);
  CHECK(m.tag(0, 0) == SlotTag::Acquired);
  CHECK(m.tag(0, 1) == SlotTag::Empty);
}

TEST_CASE("missing series entries are rejected", "[temporal]") {
  MaskMatrix ok = phantom_matrix(0.1, 2);
  std::vector<std::vector<Mask2D>> bad(3);
  AcquisitionSchedule sched;
  sched.n_planes = 4;
  sched.n_cycles = 2;
  sched.slice_time_ms = 100;
  CHECK_THROWS_AS(assemble_matrix(bad, ok.frames, sched), IncompleteSeriesError);
}

TEST_CASE("previous acquired index bookkeeping", "[temporal]") {
  CHECK(previous_acquired_index(5, 0, 4) == 4);
  CHECK(previous_acquired_index(5, 2, 4) == 2);
  CHECK(previous_acquired_index(7, 0, 4) == 4);
  CHECK(previous_acquired_index(6, 3, 4) == 3);
  CHECK(previous_acquired_index(5, 1, 4) == 5);  // acquired slot maps to itself
}

TEST_CASE("fraction zero reproduces the earlier mask exactly", "[temporal]") {
  Mask2D a = test_helpers::disk_mask(64, 64, 28, 32, 10);
  Mask2D b = test_helpers::disk_mask(64, 64, 34, 32, 10);
  Svf2D svf = register_masks_geometric(b, a);
  Mask2D out = fractional_warp(mask_to_sdf(a), svf, 0.0);
  CHECK(out.data == a.data);
}

TEST_CASE("fraction one lands on the later mask", "[temporal]") {
  Mask2D a = test_helpers::disk_mask(64, 64, 28, 32, 10);
  Mask2D b = test_helpers::disk_mask(64, 64, 34, 32, 10);
  Svf2D svf = register_masks_geometric(b, a);
  Mask2D out = fractional_warp(mask_to_sdf(a), svf, 1.0);
  CHECK(dice(out, b) >= 0.95);
}

TEST_CASE("half fraction puts the centroid at the midpoint", "[temporal]") {
  Mask2D a = test_helpers::disk_mask(64, 64, 28, 32, 10);
  Mask2D b = test_helpers::disk_mask(64, 64, 34, 32, 10);
  Svf2D svf = register_masks_geometric(b, a);
  Mask2D mid = fractional_warp(mask_to_sdf(a), svf, 0.5);
  Vec2d c = centroid_px(mid);
  CHECK(c.x == Approx(31.0).margin(0.5));
  CHECK(c.y == Approx(32.0).margin(0.5));
}

TEST_CASE("centroid moves monotonically along the geodesic", "[temporal]") {
  Mask2D a = test_helpers::disk_mask(64, 64, 26, 32, 10);
  Mask2D b = test_helpers::disk_mask(64, 64, 36, 32, 10);
  Svf2D svf = register_masks_geometric(b, a);
  Sdf2D sdf = mask_to_sdf(a);
  double prev = -1e9;
  for (double f : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
    double cx = centroid_px(fractional_warp(sdf, svf, f)).x;
    CHECK(cx >= prev - 1e-9);
    prev = cx;
  }
}

TEST_CASE("interpolation fills exactly the non-band slots", "[temporal]") {
  MaskMatrix m = phantom_matrix(0.15, 3);
  interpolate_missing(m);
  int n_p = m.n_planes;
  for (int t = 0; t < m.n_instants(); ++t)
    for (int p = 0; p < n_p; ++p) {
      SlotTag tag = m.tag(t, p);
      if (p == t % n_p) {
        CHECK(tag == SlotTag::Acquired);
        continue;
      }
      int k_prev = previous_acquired_index(t, p, n_p);
      bool has_prev = k_prev >= 0;
      bool has_next = k_prev + n_p <= (m.n_cycles - 1) * n_p + p;
      CHECK((tag == SlotTag::Interpolated) == (has_prev && has_next));
    }
}

TEST_CASE("identical masks on secant planes give zero discrepancy", "[temporal][zeta]") {
  ConfigParams cp;
  PlaneFrame sag = detail::sagittal_frame(0.0, cp, 1.0, 5.0);
  PlaneFrame cor = detail::coronal_frame(0.0, cp, 1.0, 5.0);
  auto pair = make_secant_pair(0, sag, 1, cor);
  REQUIRE(pair.has_value());
  CHECK(std::abs(pair->dir.z) == Approx(1.0).margin(1e-12));

  double cu = 0.5 * (sag.nu - 1);
  Mask2D disk_i = test_helpers::disk_mask(sag.nu, sag.nv, cu, cu, 20.0);
  Mask2D disk_j = disk_i;
  CHECK(zeta(disk_i, sag, disk_j, cor, *pair) == Approx(0.0).margin(0.05));
}

TEST_CASE("radius mismatch of centered disks gives zeta = 2 delta", "[temporal][zeta]") {
  ConfigParams cp;
  PlaneFrame sag = detail::sagittal_frame(0.0, cp, 1.0, 5.0);
  PlaneFrame cor = detail::coronal_frame(0.0, cp, 1.0, 5.0);
  auto pair = make_secant_pair(0, sag, 1, cor);
  REQUIRE(pair.has_value());

  double cu = 0.5 * (sag.nu - 1);
  double r = 18.0, delta = 3.0;
  Mask2D disk_i = test_helpers::disk_mask(sag.nu, sag.nv, cu, cu, r);
  Mask2D disk_j = test_helpers::disk_mask(cor.nu, cor.nv, cu, cu, r + delta);
  CHECK(zeta(disk_i, sag, disk_j, cor, *pair) == Approx(2.0 * delta).margin(0.2));
}

TEST_CASE("a mask that misses the line raises NoIntersection", "[temporal][zeta]") {
  ConfigParams cp;
  PlaneFrame sag = detail::sagittal_frame(0.0, cp, 1.0, 5.0);
  PlaneFrame cor = detail::coronal_frame(0.0, cp, 1.0, 5.0);
  auto pair = make_secant_pair(0, sag, 1, cor);
  Mask2D off_line = test_helpers::disk_mask(sag.nu, sag.nv, 10, 10, 5.0);
  Mask2D centered = test_helpers::disk_mask(cor.nu, cor.nv, 47.5, 47.5, 20.0);
  CHECK_THROWS_AS(zeta(off_line, sag, centered, cor, *pair), NoIntersectionError);
}

TEST_CASE("parallel planes are not secant", "[temporal][zeta]") {
  ConfigParams cp;
  PlaneFrame a = detail::sagittal_frame(-5.0, cp, 1.0, 5.0);
  PlaneFrame b = detail::sagittal_frame(5.0, cp, 1.0, 5.0);
  CHECK_FALSE(make_secant_pair(0, a, 1, b).has_value());
}

TEST_CASE("temporal interpolation lowers the secant-plane discrepancy", "[temporal][zeta]") {
  MaskMatrix m = phantom_matrix(0.25, 5, 10.0, 2.2);
  auto raw = zeta_raw_report(m);
  interpolate_missing(m);
  auto aligned = zeta_report(m);
  double mean_aligned = mean_zeta(aligned), mean_raw = mean_zeta(raw);
  INFO("aligned " << mean_aligned << " raw " << mean_raw);
  CHECK(mean_aligned <= mean_raw);
  CHECK(mean_raw > 0.0);
}
