#pragma once

#include <cmath>
#include <iostream>
#include <vector>

#include "planerecon/grid.hpp"
#include "planerecon/mask_ops.hpp"

namespace planerecon {

/// Geometry of an isotropic reconstruction space.
struct GridSpec {
  int nx{0}, ny{0}, nz{0};
  double spacing{1.0};
  Vec3d origin{};

  LabelVolume make_labels() const { return LabelVolume(nx, ny, nz, spacing, origin, 0); }
  ScalarVolume make_scalars(float fill = 0.f) const {
    return ScalarVolume(nx, ny, nz, spacing, origin, fill);
  }
  VectorVolume make_field() const { return VectorVolume(nx, ny, nz, spacing, origin); }

  /// Cube of `dim` voxels centered on `center`.
  static GridSpec centered_cube(int dim, double spacing, Vec3d center = {}) {
    GridSpec s;
    s.nx = s.ny = s.nz = dim;
    s.spacing = spacing;
    double half = 0.5 * (dim - 1) * spacing;
    s.origin = center - Vec3d{half, half, half};
    return s;
  }
};

/// Deposits each foreground pixel's physical extent (in-plane spacing x
/// thickness) into the world voxels it overlaps; voxels with partial-volume
/// fraction >= threshold become label 1. A plane entirely outside the target
/// yields an empty volume with a warning on stderr.
inline LabelVolume resample_plane_to_world(const Mask2D& mask, const PlaneFrame& frame,
                                           const GridSpec& target, double threshold = 0.5) {
  if (target.spacing <= 0) throw ConfigError("resample_plane_to_world: spacing must be > 0");
  LabelVolume out = target.make_labels();
  std::vector<float> fraction(out.size(), 0.f);

  const double s = target.spacing;
  int n_u = std::max(2, int(std::ceil(mask.su / (0.25 * s))));
  int n_v = std::max(2, int(std::ceil(mask.sv / (0.25 * s))));
  int n_w = std::max(2, int(std::ceil(frame.thickness / (0.25 * s))));
  const double sub_volume =
      (mask.su * mask.sv * frame.thickness) / (double(n_u) * n_v * n_w);
  const double voxel_volume = s * s * s;

  // subpixel offsets in plane-local mm, centered on the pixel box
  std::vector<double> off_u(n_u), off_v(n_v), off_w(n_w);
  for (int a = 0; a < n_u; ++a) off_u[a] = ((a + 0.5) / n_u - 0.5) * mask.su;
  for (int a = 0; a < n_v; ++a) off_v[a] = ((a + 0.5) / n_v - 0.5) * mask.sv;
  for (int a = 0; a < n_w; ++a) off_w[a] = ((a + 0.5) / n_w - 0.5) * frame.thickness;

  bool touched = false;
  bool any_foreground = false;
  for (int j = 0; j < mask.nv; ++j)
    for (int i = 0; i < mask.nu; ++i) {
      if (!mask.at(i, j)) continue;
      any_foreground = true;
      for (int c = 0; c < n_w; ++c)
        for (int b = 0; b < n_v; ++b)
          for (int a = 0; a < n_u; ++a) {
            Vec3d world =
                frame.pose * Vec3d{i * mask.su + off_u[a], j * mask.sv + off_v[b], off_w[c]};
            Vec3d vox = out.world_to_voxel(world);
            int vi = int(std::lround(vox.x)), vj = int(std::lround(vox.y)),
                vk = int(std::lround(vox.z));
            if (!out.contains(vi, vj, vk)) continue;
            fraction[out.index(vi, vj, vk)] += float(sub_volume / voxel_volume);
            touched = true;
          }
    }

  if (any_foreground && !touched)
    std::cerr << "[planerecon] warning: plane lies entirely outside the target grid; "
                 "resampled volume is empty\n";

  for (size_t v = 0; v < out.size(); ++v)
    out.data[v] = fraction[v] >= float(threshold) ? 1 : 0;
  return out;
}

/// Voxelwise OR of label volumes sharing one grid.
inline LabelVolume union_labels(const std::vector<LabelVolume>& volumes) {
  if (volumes.empty()) throw GridMismatchError("union_labels: no volumes given");
  LabelVolume out = volumes.front();
  for (size_t n = 1; n < volumes.size(); ++n) {
    const auto& v = volumes[n];
    if (!out.same_geometry(v))
      throw GridMismatchError("union_labels: volumes do not share dims/spacing/origin");
    for (size_t i = 0; i < out.size(); ++i) out.data[i] = out.data[i] || v.data[i];
  }
  return out;
}

}  // namespace planerecon
