#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "planerecon/grid.hpp"
#include "planerecon/mask_ops.hpp"

namespace planerecon {

namespace detail {

constexpr double kEdtInf = 1e30;

/// Exact 1D squared distance transform along samples spaced `step` apart
/// (lower envelope of parabolas). f holds squared source distances, d the
/// result. Samples with f >= kEdtInf never contribute to the envelope.
inline void edt_1d(const double* f, double* d, int n, double step) {
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  const double s2 = step * step;
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] >= kEdtInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kEdtInf;
      z[1] = kEdtInf;
      continue;
    }
    double s;
    while (true) {
      double fq = f[q], fv = f[v[k]];
      s = ((fq + s2 * q * q) - (fv + s2 * v[k] * v[k])) / (2.0 * s2 * (q - v[k]));
      if (s <= z[k])
        --k;  // never drops below 0: z[0] = -inf and s is finite
      else
        break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kEdtInf;
  }
  if (k < 0) {  // no finite source in this scanline
    for (int q = 0; q < n; ++q) d[q] = kEdtInf;
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = double(q - v[k]) * step;
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

/// Exact squared Euclidean distance (mm^2) from every pixel center to the
/// nearest pixel center where `source` is true.
inline Grid2<double> squared_edt(const Grid2<std::uint8_t>& source, bool to_foreground) {
  Grid2<double> d(source.nu, source.nv, source.su, source.sv, 0.0);
  for (size_t i = 0; i < source.size(); ++i)
    d.data[i] = ((source.data[i] != 0) == to_foreground) ? 0.0 : detail::kEdtInf;
  std::vector<double> f(std::max(source.nu, source.nv)), g(std::max(source.nu, source.nv));
  // along u
  for (int j = 0; j < source.nv; ++j) {
    for (int i = 0; i < source.nu; ++i) f[i] = d.at(i, j);
    detail::edt_1d(f.data(), g.data(), source.nu, source.su);
    for (int i = 0; i < source.nu; ++i) d.at(i, j) = g[i];
  }
  // along v
  for (int i = 0; i < source.nu; ++i) {
    for (int j = 0; j < source.nv; ++j) f[j] = d.at(i, j);
    detail::edt_1d(f.data(), g.data(), source.nv, source.sv);
    for (int j = 0; j < source.nv; ++j) d.at(i, j) = g[j];
  }
  return d;
}

inline Grid3<double> squared_edt(const LabelVolume& source, bool to_foreground) {
  Grid3<double> d(source.nx, source.ny, source.nz, source.spacing, source.origin, 0.0);
  for (size_t i = 0; i < source.size(); ++i)
    d.data[i] = ((source.data[i] != 0) == to_foreground) ? 0.0 : detail::kEdtInf;
  int nmax = std::max({source.nx, source.ny, source.nz});
  std::vector<double> f(nmax), g(nmax);
  for (int k = 0; k < source.nz; ++k)
    for (int j = 0; j < source.ny; ++j) {
      for (int i = 0; i < source.nx; ++i) f[i] = d.at(i, j, k);
      detail::edt_1d(f.data(), g.data(), source.nx, source.spacing);
      for (int i = 0; i < source.nx; ++i) d.at(i, j, k) = g[i];
    }
  for (int k = 0; k < source.nz; ++k)
    for (int i = 0; i < source.nx; ++i) {
      for (int j = 0; j < source.ny; ++j) f[j] = d.at(i, j, k);
      detail::edt_1d(f.data(), g.data(), source.ny, source.spacing);
      for (int j = 0; j < source.ny; ++j) d.at(i, j, k) = g[j];
    }
  for (int j = 0; j < source.ny; ++j)
    for (int i = 0; i < source.nx; ++i) {
      for (int k = 0; k < source.nz; ++k) f[k] = d.at(i, j, k);
      detail::edt_1d(f.data(), g.data(), source.nz, source.spacing);
      for (int k = 0; k < source.nz; ++k) d.at(i, j, k) = g[k];
    }
  return d;
}

/// Signed Euclidean distance in mm, negative inside. Distances are measured
/// center-to-center: on background, distance to the nearest foreground pixel;
/// on foreground, minus the distance to the nearest background pixel. The
/// round trip sdf <= 0 therefore reproduces the mask exactly.
inline Sdf2D mask_to_sdf(const Mask2D& mask) {
  if (count_foreground(mask) == 0) throw EmptyShapeError("mask_to_sdf: empty mask");
  Sdf2D out(mask.nu, mask.nv, mask.su, mask.sv, 0.0f);
  auto d_fg = squared_edt(mask, true);
  bool has_bg = count_foreground(mask) < mask.size();
  if (!has_bg) {
    // degenerate all-foreground mask; everything is deep inside
    float deep = -float((mask.nu * mask.su + mask.nv * mask.sv));
    for (auto& v : out.data) v = deep;
    return out;
  }
  auto d_bg = squared_edt(mask, false);
  for (size_t i = 0; i < mask.size(); ++i)
    out.data[i] = mask.data[i] ? -float(std::sqrt(d_bg.data[i])) : float(std::sqrt(d_fg.data[i]));
  return out;
}

inline Sdf3D mask_to_sdf(const LabelVolume& mask) {
  if (count_foreground(mask) == 0) throw EmptyShapeError("mask_to_sdf: empty label volume");
  Sdf3D out = mask.like<float>();
  auto d_fg = squared_edt(mask, true);
  bool has_bg = count_foreground(mask) < mask.size();
  if (!has_bg) {
    float deep = -float((mask.nx + mask.ny + mask.nz) * mask.spacing);
    for (auto& v : out.data) v = deep;
    return out;
  }
  auto d_bg = squared_edt(mask, false);
  for (size_t i = 0; i < mask.size(); ++i)
    out.data[i] = mask.data[i] ? -float(std::sqrt(d_bg.data[i])) : float(std::sqrt(d_fg.data[i]));
  return out;
}

inline Mask2D sdf_to_mask(const Sdf2D& sdf) {
  Mask2D m(sdf.nu, sdf.nv, sdf.su, sdf.sv, 0);
  for (size_t i = 0; i < sdf.size(); ++i) m.data[i] = sdf.data[i] <= 0.0f ? 1 : 0;
  return m;
}

inline LabelVolume sdf_to_mask(const Sdf3D& sdf) {
  LabelVolume m = sdf.like<std::uint8_t>();
  for (size_t i = 0; i < sdf.size(); ++i) m.data[i] = sdf.data[i] <= 0.0f ? 1 : 0;
  return m;
}

}  // namespace planerecon
