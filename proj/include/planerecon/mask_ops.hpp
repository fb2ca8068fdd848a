#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "planerecon/grid.hpp"

namespace planerecon {

inline size_t count_foreground(const Mask2D& m) {
  size_t n = 0;
  for (auto v : m.data) n += (v != 0);
  return n;
}

template <typename T>
inline size_t count_foreground(const Grid3<T>& m) {
  size_t n = 0;
  for (auto v : m.data) n += (v != 0);
  return n;
}

/// Centroid of foreground pixels in pixel coordinates.
inline Vec2d centroid_px(const Mask2D& m) {
  double sx = 0, sy = 0;
  size_t n = 0;
  for (int j = 0; j < m.nv; ++j)
    for (int i = 0; i < m.nu; ++i)
      if (m.at(i, j)) {
        sx += i;
        sy += j;
        ++n;
      }
  if (n == 0) throw EmptyShapeError("centroid_px: empty mask");
  return {sx / n, sy / n};
}

/// Centroid of foreground voxel centers in world mm.
inline Vec3d centroid_world(const LabelVolume& m) {
  double sx = 0, sy = 0, sz = 0;
  size_t n = 0;
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i)
        if (m.at(i, j, k)) {
          sx += i;
          sy += j;
          sz += k;
          ++n;
        }
  if (n == 0) throw EmptyShapeError("centroid_world: empty label volume");
  return m.voxel_to_world(sx / n, sy / n, sz / n);
}

template <typename GridT>
inline double dice(const GridT& a, const GridT& b) {
  size_t inter = 0, ca = 0, cb = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    bool fa = a.data[i] != 0, fb = b.data[i] != 0;
    inter += (fa && fb);
    ca += fa;
    cb += fb;
  }
  if (ca + cb == 0) return 1.0;
  return 2.0 * double(inter) / double(ca + cb);
}

/// Label 4-connected foreground components; returns component count and
/// per-pixel component id (0 = background, 1..n = components).
inline int connected_components_4(const Mask2D& m, std::vector<int>& comp) {
  comp.assign(m.size(), 0);
  int n_comp = 0;
  std::vector<size_t> stack;
  for (size_t s = 0; s < m.size(); ++s) {
    if (!m.data[s] || comp[s]) continue;
    ++n_comp;
    stack.push_back(s);
    comp[s] = n_comp;
    while (!stack.empty()) {
      size_t cur = stack.back();
      stack.pop_back();
      int i = int(cur % m.nu), j = int(cur / m.nu);
      const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        int ni = i + di[d], nj = j + dj[d];
        if (!m.contains(ni, nj)) continue;
        size_t ns = m.index(ni, nj);
        if (m.data[ns] && !comp[ns]) {
          comp[ns] = n_comp;
          stack.push_back(ns);
        }
      }
    }
  }
  return n_comp;
}

/// Keep only the largest 4-connected component. Returns number of dropped pixels.
inline size_t keep_largest_component(Mask2D& m) {
  std::vector<int> comp;
  int n = connected_components_4(m, comp);
  if (n <= 1) return 0;
  std::vector<size_t> counts(n + 1, 0);
  for (int c : comp) ++counts[c];
  int best = 1;
  for (int c = 2; c <= n; ++c)
    if (counts[c] > counts[best]) best = c;
  size_t dropped = 0;
  for (size_t s = 0; s < m.size(); ++s)
    if (m.data[s] && comp[s] != best) {
      m.data[s] = 0;
      ++dropped;
    }
  return dropped;
}

/// Label 6-connected foreground components of a label volume.
inline int connected_components_6(const LabelVolume& m, std::vector<int>& comp) {
  comp.assign(m.size(), 0);
  int n_comp = 0;
  std::vector<size_t> stack;
  for (size_t s = 0; s < m.size(); ++s) {
    if (!m.data[s] || comp[s]) continue;
    ++n_comp;
    stack.push_back(s);
    comp[s] = n_comp;
    while (!stack.empty()) {
      size_t cur = stack.back();
      stack.pop_back();
      int i = int(cur % m.nx);
      int j = int((cur / m.nx) % m.ny);
      int k = int(cur / (size_t(m.nx) * m.ny));
      const int di[6] = {1, -1, 0, 0, 0, 0}, dj[6] = {0, 0, 1, -1, 0, 0},
                dk[6] = {0, 0, 0, 0, 1, -1};
      for (int d = 0; d < 6; ++d) {
        int ni = i + di[d], nj = j + dj[d], nk = k + dk[d];
        if (!m.contains(ni, nj, nk)) continue;
        size_t ns = m.index(ni, nj, nk);
        if (m.data[ns] && !comp[ns]) {
          comp[ns] = n_comp;
          stack.push_back(ns);
        }
      }
    }
  }
  return n_comp;
}

inline size_t keep_largest_component(LabelVolume& m) {
  std::vector<int> comp;
  int n = connected_components_6(m, comp);
  if (n <= 1) return 0;
  std::vector<size_t> counts(n + 1, 0);
  for (int c : comp) ++counts[c];
  int best = 1;
  for (int c = 2; c <= n; ++c)
    if (counts[c] > counts[best]) best = c;
  size_t dropped = 0;
  for (size_t s = 0; s < m.size(); ++s)
    if (m.data[s] && comp[s] != best) {
      m.data[s] = 0;
      ++dropped;
    }
  return dropped;
}

/// Foreground pixels with at least one 4-neighbor outside the mask
/// (grid border counts as outside).
inline std::vector<Vec2<int>> boundary_pixels(const Mask2D& m) {
  std::vector<Vec2<int>> out;
  for (int j = 0; j < m.nv; ++j)
    for (int i = 0; i < m.nu; ++i) {
      if (!m.at(i, j)) continue;
      bool edge = i == 0 || i == m.nu - 1 || j == 0 || j == m.nv - 1 ||
                  !m.at(i - 1, j) || !m.at(i + 1, j) || !m.at(i, j - 1) || !m.at(i, j + 1);
      if (edge) out.push_back({i, j});
    }
  return out;
}

/// Foreground voxels with at least one 6-neighbor outside the labels.
inline std::vector<Vec3i> boundary_voxels(const LabelVolume& m) {
  std::vector<Vec3i> out;
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) {
        if (!m.at(i, j, k)) continue;
        bool edge = i == 0 || i == m.nx - 1 || j == 0 || j == m.ny - 1 || k == 0 ||
                    k == m.nz - 1 || !m.at(i - 1, j, k) || !m.at(i + 1, j, k) ||
                    !m.at(i, j - 1, k) || !m.at(i, j + 1, k) || !m.at(i, j, k - 1) ||
                    !m.at(i, j, k + 1);
        if (edge) out.push_back({i, j, k});
      }
  return out;
}

/// World-space centers of the boundary voxels.
inline std::vector<Vec3d> boundary_points_world(const LabelVolume& m) {
  std::vector<Vec3d> pts;
  for (const auto& v : boundary_voxels(m)) pts.push_back(m.voxel_to_world(v.x, v.y, v.z));
  return pts;
}

/// Erode by one voxel with the 6-neighborhood structuring element.
inline LabelVolume erode6(const LabelVolume& m) {
  LabelVolume out = m;
  for (const auto& v : boundary_voxels(m)) out.at(v.x, v.y, v.z) = 0;
  return out;
}

/// Dilate by one voxel with the 6-neighborhood structuring element.
inline LabelVolume dilate6(const LabelVolume& m) {
  LabelVolume out = m;
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) {
        if (!m.at(i, j, k)) continue;
        const int di[6] = {1, -1, 0, 0, 0, 0}, dj[6] = {0, 0, 1, -1, 0, 0},
                  dk[6] = {0, 0, 0, 0, 1, -1};
        for (int d = 0; d < 6; ++d) {
          int ni = i + di[d], nj = j + dj[d], nk = k + dk[d];
          if (m.contains(ni, nj, nk)) out.at(ni, nj, nk) = 1;
        }
      }
  return out;
}

struct BBox3i {
  Vec3i lo{0, 0, 0}, hi{-1, -1, -1};  // inclusive; empty when hi < lo
  bool empty() const { return hi.x < lo.x || hi.y < lo.y || hi.z < lo.z; }
  void expand(int margin, int nx, int ny, int nz) {
    lo.x = std::max(0, lo.x - margin);
    lo.y = std::max(0, lo.y - margin);
    lo.z = std::max(0, lo.z - margin);
    hi.x = std::min(nx - 1, hi.x + margin);
    hi.y = std::min(ny - 1, hi.y + margin);
    hi.z = std::min(nz - 1, hi.z + margin);
  }
};

inline BBox3i foreground_bbox(const LabelVolume& m) {
  BBox3i b;
  b.lo = {m.nx, m.ny, m.nz};
  b.hi = {-1, -1, -1};
  for (int k = 0; k < m.nz; ++k)
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i < m.nx; ++i)
        if (m.at(i, j, k)) {
          b.lo.x = std::min(b.lo.x, i);
          b.lo.y = std::min(b.lo.y, j);
          b.lo.z = std::min(b.lo.z, k);
          b.hi.x = std::max(b.hi.x, i);
          b.hi.y = std::max(b.hi.y, j);
          b.hi.z = std::max(b.hi.z, k);
        }
  return b;
}

}  // namespace planerecon
