#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "planerecon/acquisition.hpp"
#include "planerecon/propagation.hpp"

using namespace planerecon;
using Catch::Approx;

namespace {

Image2D smooth_disk(int n, double cx, double cy, double radius) {
  Image2D img(n, n, 1.0, 1.0, 0.f);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double d = std::sqrt((i - cx) * (i - cx) + (j - cy) * (j - cy)) - radius;
      img.at(i, j) = float(0.2 + 0.8 * 0.5 * std::erfc(d / M_SQRT2));
    }
  return img;
}

std::vector<Image2D> translating_disk_series(int n_slices, double step_px, double radius,
                                             int n = 80, double x0 = 30, double y0 = 40) {
  std::vector<Image2D> out;
  for (int k = 0; k < n_slices; ++k) out.push_back(smooth_disk(n, x0 + k * step_px, y0, radius));
  return out;
}

}  // namespace

TEST_CASE("single-step propagation equals the pairwise map", "[propagation]") {
  auto series = translating_disk_series(2, 2.0, 12);
  Diffeo2D composed = propagate_forward(series, 0, 1);
  Diffeo2D single = register_2d(series[1], series[0]);
  for (size_t i = 0; i < composed.forward_mm.data.size(); ++i) {
    CHECK((composed.forward_mm.data[i] - single.forward_mm.data[i]).norm() < 1e-12);
  }
}

TEST_CASE("a static series propagates to the identity", "[propagation]") {
  PhantomSpec spec;
  spec.amplitude = 0.0;
  spec.translation_amplitude_mm = 0.0;
  Phantom ph(spec);
  ConfigParams cp;
  PlaneFrame f = detail::sagittal_frame(0.0, cp, 1.09, 5.0);
  std::vector<Image2D> series;
  for (int k = 0; k < 6; ++k) series.push_back(phantom_slice(ph, 0.7 * k, f).image);

  Diffeo2D d = propagate_forward(series, 0, 5);
  double worst = 0;
  for (int j = 10; j < d.forward_mm.nv - 10; ++j)
    for (int i = 10; i < d.forward_mm.nu - 10; ++i)
      worst = std::max(worst, d.forward_mm.at(i, j).norm() / f.su);
  CHECK(worst <= 0.1);  // pixels
}

TEST_CASE("five 1 px steps accumulate to about 5 px", "[propagation]") {
  auto series = translating_disk_series(6, 1.0, 12);
  Diffeo2D d = propagate_forward(series, 0, 5);
  // pull-back at slice 5 carries its coords onto slice 0: expect (-5, 0)
  double sum = 0;
  int n = 0;
  for (int j = 0; j < 80; ++j)
    for (int i = 0; i < 80; ++i) {
      double r = std::sqrt((i - 35.0) * (i - 35.0) + (j - 40.0) * (j - 40.0));
      if (r > 10) continue;
      sum += -d.forward_mm.at(i, j).x;
      ++n;
    }
  CHECK(sum / n == Approx(5.0).margin(0.5));
}

TEST_CASE("fusion weights follow the arctan schedule", "[propagation]") {
  double gamma = 6.0;
  CHECK(fusion_alpha(5, 0, 10, gamma) == 0.5);  // atan(0) = 0 exactly
  CHECK(fusion_alpha(0, 0, 10, gamma) == Approx(0.5 - std::atan(-3.0) / M_PI));
  CHECK(fusion_alpha(0, 0, 10, gamma) > 0.85);
  CHECK(fusion_alpha(10, 0, 10, gamma) < 0.15);
  double prev = 2;
  for (int k = 0; k <= 10; ++k) {
    double a = fusion_alpha(k, 0, 10, gamma);
    CHECK(a <= prev);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    prev = a;
  }
}

TEST_CASE("manual cycles cover the series and close the last interval", "[propagation]") {
  CHECK(manual_cycle_indices(21, 10) == std::vector<int>{0, 10, 20});
  CHECK(manual_cycle_indices(20, 10) == std::vector<int>{0, 10, 19});
  CHECK(manual_cycle_indices(5, 10) == std::vector<int>{0, 4});
}

TEST_CASE("fused propagation tracks a translating disk", "[propagation]") {
  const double step = 1.0, radius = 12;
  auto series = translating_disk_series(11, step, radius);
  Mask2D manual_a = test_helpers::disk_mask(80, 80, 30, 40, radius);
  Mask2D manual_b = test_helpers::disk_mask(80, 80, 40, 40, radius);

  auto prop = propagate_interval(series, 0, 10, manual_a, manual_b);
  REQUIRE(prop.fused.size() == 9);
  for (int k = 1; k < 10; ++k) {
    Mask2D truth = test_helpers::disk_mask(80, 80, 30 + k * step, 40, radius);
    double fused_dice = dice(prop.fused[k - 1], truth);
    CHECK(fused_dice >= 0.93);
    // the blend should not fall measurably below either single branch
    double best_single = std::max(dice(prop.forward_only[k - 1], truth),
                                  dice(prop.backward_only[k - 1], truth));
    CHECK(fused_dice >= best_single - 0.02);
  }
}

TEST_CASE("plane propagation emits manual masks unchanged", "[propagation]") {
  auto series = translating_disk_series(7, 1.0, 11);
  std::vector<int> manual_cycles = manual_cycle_indices(7, 3);  // {0, 3, 6}
  std::vector<Mask2D> manual_masks;
  for (int c : manual_cycles)
    manual_masks.push_back(test_helpers::disk_mask(80, 80, 30 + c, 40, 11));

  auto plane = propagate_plane(series, manual_cycles, manual_masks);
  REQUIRE(int(plane.masks.size()) == 7);
  for (size_t m = 0; m < manual_cycles.size(); ++m) {
    CHECK(plane.is_manual[manual_cycles[m]] == 1);
    CHECK(plane.masks[manual_cycles[m]].data == manual_masks[m].data);  // bit-exact
  }
  for (int k = 0; k < 7; ++k) CHECK(count_foreground(plane.masks[k]) > 0);
}

TEST_CASE("a vanishing fused mask raises PropagationCollapse", "[propagation]") {
  auto series = translating_disk_series(3, 1.5, 12);
  Mask2D manual_a(80, 80, 1.0, 1.0, 0);
  manual_a.at(10, 10) = 1;  // single pixel far from the moving structure
  Mask2D manual_b(80, 80, 1.0, 1.0, 0);
  manual_b.at(13, 10) = 1;
  CHECK_THROWS_AS(propagate_interval(series, 0, 2, manual_a, manual_b),
                  PropagationCollapseError);
}
