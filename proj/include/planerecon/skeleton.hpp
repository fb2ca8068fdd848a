#pragma once

#include <iostream>
#include <unordered_set>
#include <vector>

#include "planerecon/resample.hpp"
#include "planerecon/temporal.hpp"

namespace planerecon {

/// Partial dynamic volume at one instant: the union of all voxelized plane
/// segmentations, plus the world-space contour points each plane contributed.
struct Skeleton {
  int t_idx{-1};
  LabelVolume labels;
  std::vector<Vec3d> contour;  // lies on boundary voxels of the labels
};

/// Reconstructable instants: merging needs every plane filled, which drops
/// the first and last N_p - 1 instants of the series.
inline int first_valid_instant(int n_planes) { return n_planes - 1; }
inline int last_valid_instant(int n_planes, int n_cycles) {
  return n_planes * n_cycles - n_planes;
}
inline int reconstructed_frame_count(int n_planes, int n_cycles) {
  return n_planes * n_cycles - 2 * (n_planes - 1);
}

/// Voxelizes every plane mask at instant t_idx into the isotropic space and
/// takes their union; contour points are the centers of the boundary voxels
/// hit by each plane mask's in-plane contour. Empty slots (organ out of
/// plane) are skipped with a note.
inline Skeleton build_skeleton(const MaskMatrix& m, int t_idx, const GridSpec& space) {
  if (t_idx < first_valid_instant(m.n_planes) ||
      t_idx > last_valid_instant(m.n_planes, m.n_cycles))
    throw OutOfBandError("build_skeleton: instant " + std::to_string(t_idx) +
                         " is outside the reconstructable band");

  Skeleton out;
  out.t_idx = t_idx;

  std::vector<LabelVolume> parts;
  std::vector<int> part_planes;
  for (int p = 0; p < m.n_planes; ++p) {
    if (m.tag(t_idx, p) == SlotTag::Empty) {
      std::cerr << "[planerecon] note: skeleton at t_idx " << t_idx << " misses plane " << p
                << " (empty segmentation)\n";
      continue;
    }
    parts.push_back(resample_plane_to_world(m.mask(t_idx, p), m.frames[p], space));
    part_planes.push_back(p);
  }
  if (parts.empty()) throw EmptyShapeError("build_skeleton: no plane segmentations at instant");
  out.labels = union_labels(parts);

  // boundary lookup for the union
  LabelVolume& lab = out.labels;
  auto is_boundary = [&](int i, int j, int k) {
    if (!lab.at(i, j, k)) return false;
    return i == 0 || i == lab.nx - 1 || j == 0 || j == lab.ny - 1 || k == 0 ||
           k == lab.nz - 1 || !lab.at(i - 1, j, k) || !lab.at(i + 1, j, k) ||
           !lab.at(i, j - 1, k) || !lab.at(i, j + 1, k) || !lab.at(i, j, k - 1) ||
           !lab.at(i, j, k + 1);
  };

  std::unordered_set<std::uint64_t> seen;
  for (size_t part = 0; part < parts.size(); ++part) {
    int p = part_planes[part];
    const Mask2D& mask = m.mask(t_idx, p);
    const PlaneFrame& frame = m.frames[p];
    for (const auto& px : boundary_pixels(mask)) {
      Vec3d world = frame.pixel_to_world(px.x, px.y);
      Vec3d v = lab.world_to_voxel(world);
      int i = int(std::lround(v.x)), j = int(std::lround(v.y)), k = int(std::lround(v.z));
      if (!lab.contains(i, j, k) || !is_boundary(i, j, k)) continue;
      std::uint64_t key = lab.index(i, j, k);
      if (!seen.insert(key).second) continue;
      out.contour.push_back(lab.voxel_to_world(i, j, k));
    }
  }
  return out;
}

/// Complete static segmentation used as the deformation template.
struct StaticTemplate {
  LabelVolume labels;            // V_s
  std::vector<Vec3d> contour;    // {V}: boundary voxel centers, m >> r
};

inline StaticTemplate make_template(LabelVolume labels) {
  if (count_foreground(labels) == 0) throw EmptyShapeError("make_template: empty labels");
  StaticTemplate t;
  t.labels = std::move(labels);
  t.contour = boundary_points_world(t.labels);
  return t;
}

}  // namespace planerecon
