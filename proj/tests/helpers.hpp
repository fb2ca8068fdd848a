#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "planerecon/grid.hpp"
#include "planerecon/mask_ops.hpp"

namespace test_helpers {

using namespace planerecon;

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("planerecon_tests_" + name);
  std::filesystem::create_directories(p);
  return p;
}

/// Filled disk mask, pixel units.
inline Mask2D disk_mask(int nu, int nv, double cx, double cy, double radius, double su = 1.0,
                        double sv = 1.0) {
  Mask2D m(nu, nv, su, sv, 0);
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nu; ++i) {
      double dx = i - cx, dy = j - cy;
      if (dx * dx + dy * dy <= radius * radius) m.at(i, j) = 1;
    }
  return m;
}

/// Union of a few random disks, guaranteed non-empty and inside the border.
inline Mask2D random_blob(std::mt19937& rng, int nu = 48, int nv = 48) {
  std::uniform_int_distribution<int> n_disks(1, 4);
  std::uniform_real_distribution<double> rad(2.5, 8.0);
  std::uniform_real_distribution<double> cx(12.0, nu - 12.0), cy(12.0, nv - 12.0);
  Mask2D m(nu, nv, 1.0, 1.0, 0);
  int n = n_disks(rng);
  for (int d = 0; d < n; ++d) {
    double r = rad(rng), x = cx(rng), y = cy(rng);
    for (int j = 0; j < nv; ++j)
      for (int i = 0; i < nu; ++i) {
        double dx = i - x, dy = j - y;
        if (dx * dx + dy * dy <= r * r) m.at(i, j) = 1;
      }
  }
  return m;
}

/// Filled ball label volume, voxel units.
inline LabelVolume ball_labels(int n, double cx, double cy, double cz, double radius,
                               double spacing = 1.0) {
  LabelVolume m(n, n, n, spacing, {0, 0, 0}, 0);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double dx = i - cx, dy = j - cy, dz = k - cz;
        if (dx * dx + dy * dy + dz * dz <= radius * radius) m.at(i, j, k) = 1;
      }
  return m;
}

}  // namespace test_helpers
