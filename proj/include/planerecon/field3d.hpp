#pragma once

#include <cmath>
#include <vector>

#include "planerecon/grid.hpp"
#include "planerecon/mask_ops.hpp"
#include "planerecon/resample.hpp"
#include "planerecon/sampling.hpp"

namespace planerecon {

/// Resample a displacement field onto another grid geometry (values mm).
inline VectorVolume resample_field(const VectorVolume& src, const GridSpec& target) {
  VectorVolume out(target.nx, target.ny, target.nz, target.spacing, target.origin);
  for (int k = 0; k < out.nz; ++k)
    for (int j = 0; j < out.ny; ++j)
      for (int i = 0; i < out.nx; ++i) {
        Vec3d p = out.voxel_to_world(i, j, k);
        Vec3d v = src.world_to_voxel(p);
        out.at(i, j, k) = sample_trilinear(src, v.x, v.y, v.z).cast<float>();
      }
  return out;
}

/// det(I + Du) at a voxel; central differences inside, one-sided at edges.
inline double jacobian_det_at(const VectorVolume& u, int i, int j, int k) {
  int i0 = std::max(0, i - 1), i1 = std::min(u.nx - 1, i + 1);
  int j0 = std::max(0, j - 1), j1 = std::min(u.ny - 1, j + 1);
  int k0 = std::max(0, k - 1), k1 = std::min(u.nz - 1, k + 1);
  double hx = (i1 - i0) * u.spacing, hy = (j1 - j0) * u.spacing, hz = (k1 - k0) * u.spacing;
  Vec3d dux = (u.at(i1, j, k).cast<double>() - u.at(i0, j, k).cast<double>()) / hx;
  Vec3d duy = (u.at(i, j1, k).cast<double>() - u.at(i, j0, k).cast<double>()) / hy;
  Vec3d duz = (u.at(i, j, k1).cast<double>() - u.at(i, j, k0).cast<double>()) / hz;
  return det3(Vec3d{1, 0, 0} + dux, Vec3d{0, 1, 0} + duy, Vec3d{0, 0, 1} + duz);
}

/// Fixed-point inversion of id + f; returns g with (id+g) o (id+f) ~ id.
inline VectorVolume invert_displacement(const VectorVolume& f, int max_iters = 30,
                                        double tol_mm = 1e-3) {
  VectorVolume g = f.like<Vec3f>();
  for (int iter = 0; iter < max_iters; ++iter) {
    double worst = 0;
    for (int k = 0; k < g.nz; ++k)
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          Vec3d x = g.voxel_to_world(i, j, k);
          Vec3d cur = g.at(i, j, k).cast<double>();
          Vec3d fx = sample_field_world(f, x + cur);
          Vec3d next = -fx;
          worst = std::max(worst, (next - cur).norm());
          g.at(i, j, k) = next.cast<float>();
        }
    if (worst < tol_mm) break;
  }
  return g;
}

/// Max |(id+g) o (id+f)(x) - x| over foreground voxels.
inline double inverse_residual(const VectorVolume& f, const VectorVolume& g,
                               const LabelVolume& support) {
  double worst = 0;
  for (int k = 0; k < f.nz; ++k)
    for (int j = 0; j < f.ny; ++j)
      for (int i = 0; i < f.nx; ++i) {
        if (!support.at(i, j, k)) continue;
        Vec3d x = f.voxel_to_world(i, j, k);
        Vec3d y = x + f.at(i, j, k).cast<double>();
        Vec3d back = y + sample_field_world(g, y);
        worst = std::max(worst, (back - x).norm());
      }
  return worst;
}

}  // namespace planerecon
