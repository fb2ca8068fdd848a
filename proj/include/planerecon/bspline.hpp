#pragma once

#include <cmath>
#include <vector>

#include "planerecon/grid.hpp"
#include "planerecon/mask_ops.hpp"

namespace planerecon {

namespace detail {
/// Cardinal cubic B-spline.
inline double bspline3(double u) {
  double a = std::abs(u);
  if (a < 1.0) return (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0;
  if (a < 2.0) {
    double t = 2.0 - a;
    return t * t * t / 6.0;
  }
  return 0.0;
}
}  // namespace detail

/// Vector-valued cubic B-spline coefficients on a uniform knot lattice.
struct BSplineLattice3 {
  Vec3d origin;        // world position of knot (0,0,0)
  double spacing{1};   // knot spacing, mm
  int nx{0}, ny{0}, nz{0};
  std::vector<Vec3d> coeff;

  size_t index(int i, int j, int k) const {
    return size_t(i) + size_t(nx) * (size_t(j) + size_t(ny) * k);
  }

  Vec3d evaluate(const Vec3d& p) const {
    double sx = (p.x - origin.x) / spacing, sy = (p.y - origin.y) / spacing,
           sz = (p.z - origin.z) / spacing;
    int bx = int(std::floor(sx)), by = int(std::floor(sy)), bz = int(std::floor(sz));
    Vec3d out{};
    for (int mk = bz - 1; mk <= bz + 2; ++mk) {
      if (mk < 0 || mk >= nz) continue;
      double wz = detail::bspline3(sz - mk);
      for (int mj = by - 1; mj <= by + 2; ++mj) {
        if (mj < 0 || mj >= ny) continue;
        double wyz = wz * detail::bspline3(sy - mj);
        for (int mi = bx - 1; mi <= bx + 2; ++mi) {
          if (mi < 0 || mi >= nx) continue;
          out += coeff[index(mi, mj, mk)] * (wyz * detail::bspline3(sx - mi));
        }
      }
    }
    return out;
  }
};

/// Scattered-data approximation (Lee-Wolberg-Shin style): every sample
/// distributes to its 4x4x4 coefficient support; coefficients combine the
/// per-sample solutions with basis-squared weighting. Samples outside the
/// box still contribute through their support overlap.
inline BSplineLattice3 fit_bspline_scattered(const std::vector<Vec3d>& positions,
                                             const std::vector<Vec3d>& values,
                                             const std::vector<double>& weights,
                                             const Vec3d& box_lo, const Vec3d& box_hi,
                                             double knot_spacing) {
  BSplineLattice3 lat;
  lat.spacing = knot_spacing;
  lat.origin = box_lo - Vec3d{2 * knot_spacing, 2 * knot_spacing, 2 * knot_spacing};
  lat.nx = int(std::ceil((box_hi.x - lat.origin.x) / knot_spacing)) + 3;
  lat.ny = int(std::ceil((box_hi.y - lat.origin.y) / knot_spacing)) + 3;
  lat.nz = int(std::ceil((box_hi.z - lat.origin.z) / knot_spacing)) + 3;
  lat.coeff.assign(size_t(lat.nx) * lat.ny * lat.nz, Vec3d{});
  std::vector<double> den(lat.coeff.size(), 0.0);
  std::vector<Vec3d> num(lat.coeff.size(), Vec3d{});

  double wbuf[4][3];
  for (size_t s = 0; s < positions.size(); ++s) {
    double W = weights.empty() ? 1.0 : weights[s];
    if (W <= 0) continue;
    const Vec3d& p = positions[s];
    double sx = (p.x - lat.origin.x) / knot_spacing, sy = (p.y - lat.origin.y) / knot_spacing,
           sz = (p.z - lat.origin.z) / knot_spacing;
    int bx = int(std::floor(sx)), by = int(std::floor(sy)), bz = int(std::floor(sz));
    double sum_w2 = 0;
    for (int d = 0; d < 4; ++d) {
      wbuf[d][0] = detail::bspline3(sx - (bx - 1 + d));
      wbuf[d][1] = detail::bspline3(sy - (by - 1 + d));
      wbuf[d][2] = detail::bspline3(sz - (bz - 1 + d));
    }
    for (int dk = 0; dk < 4; ++dk)
      for (int dj = 0; dj < 4; ++dj)
        for (int di = 0; di < 4; ++di) {
          double w = wbuf[di][0] * wbuf[dj][1] * wbuf[dk][2];
          sum_w2 += w * w;
        }
    if (sum_w2 <= 0) continue;
    for (int dk = 0; dk < 4; ++dk) {
      int mk = bz - 1 + dk;
      if (mk < 0 || mk >= lat.nz) continue;
      for (int dj = 0; dj < 4; ++dj) {
        int mj = by - 1 + dj;
        if (mj < 0 || mj >= lat.ny) continue;
        for (int di = 0; di < 4; ++di) {
          int mi = bx - 1 + di;
          if (mi < 0 || mi >= lat.nx) continue;
          double w = wbuf[di][0] * wbuf[dj][1] * wbuf[dk][2];
          // per-sample coefficient phi = w * value / sum_w2, combined with
          // weight w^2
          size_t c = lat.index(mi, mj, mk);
          num[c] += values[s] * (W * w * w * w / sum_w2);
          den[c] += W * w * w;
        }
      }
    }
  }
  for (size_t c = 0; c < lat.coeff.size(); ++c)
    if (den[c] > 0) lat.coeff[c] = num[c] / den[c];
  return lat;
}

/// Dense separable evaluation of the lattice on a voxel region of `out`
/// (values are set, not accumulated).
inline void evaluate_bspline_region(const BSplineLattice3& lat, VectorVolume& out,
                                    const BBox3i& region) {
  if (region.empty()) return;
  int rx = region.hi.x - region.lo.x + 1, ry = region.hi.y - region.lo.y + 1,
      rz = region.hi.z - region.lo.z + 1;

  // per-axis spans and basis weights
  auto make_axis = [&](int lo, int n, double origin_axis, double out_origin, double out_spacing,
                       std::vector<int>& base, std::vector<std::array<double, 4>>& w) {
    base.resize(n);
    w.resize(n);
    for (int a = 0; a < n; ++a) {
      double world = out_origin + (lo + a) * out_spacing;
      double s = (world - origin_axis) / lat.spacing;
      int b = int(std::floor(s));
      base[a] = b;
      for (int d = 0; d < 4; ++d) w[a][d] = detail::bspline3(s - (b - 1 + d));
    }
  };
  std::vector<int> base_x, base_y, base_z;
  std::vector<std::array<double, 4>> wx, wy, wz;
  make_axis(region.lo.x, rx, lat.origin.x, out.origin.x, out.spacing, base_x, wx);
  make_axis(region.lo.y, ry, lat.origin.y, out.origin.y, out.spacing, base_y, wy);
  make_axis(region.lo.z, rz, lat.origin.z, out.origin.z, out.spacing, base_z, wz);

  auto cidx = [&](int i, int j, int k) { return lat.index(i, j, k); };

  // contract z: A[cx][cy][z]
  std::vector<Vec3d> A(size_t(lat.nx) * lat.ny * rz, Vec3d{});
  for (int z = 0; z < rz; ++z) {
    int b = base_z[z];
    for (int d = 0; d < 4; ++d) {
      int mk = b - 1 + d;
      if (mk < 0 || mk >= lat.nz) continue;
      double wgt = wz[z][d];
      if (wgt == 0) continue;
      const Vec3d* src = &lat.coeff[cidx(0, 0, mk)];
      Vec3d* dst = &A[(size_t(z) * lat.ny) * lat.nx];
      for (int c = 0; c < lat.nx * lat.ny; ++c) dst[c] += src[c] * wgt;
    }
  }
  // contract y: B[cx][y][z]
  std::vector<Vec3d> B(size_t(lat.nx) * ry * rz, Vec3d{});
  for (int z = 0; z < rz; ++z)
    for (int y = 0; y < ry; ++y) {
      int b = base_y[y];
      Vec3d* dst = &B[(size_t(z) * ry + y) * lat.nx];
      for (int d = 0; d < 4; ++d) {
        int mj = b - 1 + d;
        if (mj < 0 || mj >= lat.ny) continue;
        double wgt = wy[y][d];
        if (wgt == 0) continue;
        const Vec3d* src = &A[(size_t(z) * lat.ny + mj) * lat.nx];
        for (int c = 0; c < lat.nx; ++c) dst[c] += src[c] * wgt;
      }
    }
  // contract x into the output region
  for (int z = 0; z < rz; ++z)
    for (int y = 0; y < ry; ++y) {
      const Vec3d* src = &B[(size_t(z) * ry + y) * lat.nx];
      for (int x = 0; x < rx; ++x) {
        int b = base_x[x];
        Vec3d acc{};
        for (int d = 0; d < 4; ++d) {
          int mi = b - 1 + d;
          if (mi < 0 || mi >= lat.nx) continue;
          acc += src[mi] * wx[x][d];
        }
        out.at(region.lo.x + x, region.lo.y + y, region.lo.z + z) = acc.cast<float>();
      }
    }
}

}  // namespace planerecon
