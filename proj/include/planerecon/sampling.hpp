#pragma once

#include <algorithm>
#include <cmath>

#include "planerecon/grid.hpp"

namespace planerecon {

namespace detail {
inline void clamp_floor(double x, int n, int& i0, double& t) {
  double f = std::floor(x);
  i0 = int(f);
  t = x - f;
  if (i0 < 0) {
    i0 = 0;
    t = 0.0;
  } else if (i0 >= n - 1) {
    i0 = n - 2 < 0 ? 0 : n - 2;
    t = n - 2 < 0 ? 0.0 : 1.0;
  }
}
}  // namespace detail

/// Bilinear sample at pixel coordinates (u, v); border clamped.
template <typename T>
inline double sample_bilinear(const Grid2<T>& g, double u, double v) {
  if (g.nu == 1 && g.nv == 1) return double(g.at(0, 0));
  int i0, j0;
  double tu, tv;
  detail::clamp_floor(u, g.nu, i0, tu);
  detail::clamp_floor(v, g.nv, j0, tv);
  int i1 = std::min(i0 + 1, g.nu - 1), j1 = std::min(j0 + 1, g.nv - 1);
  double v00 = double(g.at(i0, j0)), v10 = double(g.at(i1, j0));
  double v01 = double(g.at(i0, j1)), v11 = double(g.at(i1, j1));
  return (1 - tv) * ((1 - tu) * v00 + tu * v10) + tv * ((1 - tu) * v01 + tu * v11);
}

inline Vec2d sample_bilinear(const Grid2<Vec2d>& g, double u, double v) {
  int i0, j0;
  double tu, tv;
  detail::clamp_floor(u, g.nu, i0, tu);
  detail::clamp_floor(v, g.nv, j0, tv);
  int i1 = std::min(i0 + 1, g.nu - 1), j1 = std::min(j0 + 1, g.nv - 1);
  Vec2d a = g.at(i0, j0) * ((1 - tu) * (1 - tv));
  Vec2d b = g.at(i1, j0) * (tu * (1 - tv));
  Vec2d c = g.at(i0, j1) * ((1 - tu) * tv);
  Vec2d d = g.at(i1, j1) * (tu * tv);
  return {a.x + b.x + c.x + d.x, a.y + b.y + c.y + d.y};
}

/// Trilinear sample at voxel coordinates; border clamped.
template <typename T>
inline double sample_trilinear(const Grid3<T>& g, double x, double y, double z) {
  int i0, j0, k0;
  double tx, ty, tz;
  detail::clamp_floor(x, g.nx, i0, tx);
  detail::clamp_floor(y, g.ny, j0, ty);
  detail::clamp_floor(z, g.nz, k0, tz);
  int i1 = std::min(i0 + 1, g.nx - 1), j1 = std::min(j0 + 1, g.ny - 1),
      k1 = std::min(k0 + 1, g.nz - 1);
  auto val = [&](int i, int j, int k) { return double(g.at(i, j, k)); };
  double c00 = (1 - tx) * val(i0, j0, k0) + tx * val(i1, j0, k0);
  double c10 = (1 - tx) * val(i0, j1, k0) + tx * val(i1, j1, k0);
  double c01 = (1 - tx) * val(i0, j0, k1) + tx * val(i1, j0, k1);
  double c11 = (1 - tx) * val(i0, j1, k1) + tx * val(i1, j1, k1);
  return (1 - tz) * ((1 - ty) * c00 + ty * c10) + tz * ((1 - ty) * c01 + ty * c11);
}

inline Vec3d sample_trilinear(const VectorVolume& g, double x, double y, double z) {
  int i0, j0, k0;
  double tx, ty, tz;
  detail::clamp_floor(x, g.nx, i0, tx);
  detail::clamp_floor(y, g.ny, j0, ty);
  detail::clamp_floor(z, g.nz, k0, tz);
  int i1 = std::min(i0 + 1, g.nx - 1), j1 = std::min(j0 + 1, g.ny - 1),
      k1 = std::min(k0 + 1, g.nz - 1);
  auto val = [&](int i, int j, int k) { return g.at(i, j, k).cast<double>(); };
  Vec3d c00 = val(i0, j0, k0) * (1 - tx) + val(i1, j0, k0) * tx;
  Vec3d c10 = val(i0, j1, k0) * (1 - tx) + val(i1, j1, k0) * tx;
  Vec3d c01 = val(i0, j0, k1) * (1 - tx) + val(i1, j0, k1) * tx;
  Vec3d c11 = val(i0, j1, k1) * (1 - tx) + val(i1, j1, k1) * tx;
  return (c00 * (1 - ty) + c10 * ty) * (1 - tz) + (c01 * (1 - ty) + c11 * ty) * tz;
}

/// Sample a displacement field at a world position (field values are mm).
inline Vec3d sample_field_world(const VectorVolume& field, const Vec3d& p) {
  Vec3d v = field.world_to_voxel(p);
  return sample_trilinear(field, v.x, v.y, v.z);
}

}  // namespace planerecon
