#pragma once

#include <cmath>
#include <vector>

#include "planerecon/grid.hpp"
#include "planerecon/sampling.hpp"

namespace planerecon {

/// Dense 2D vector field; values and positions in pixel units.
using Field2D = Grid2<Vec2d>;

inline Field2D zero_field(int nu, int nv, double su = 1.0, double sv = 1.0) {
  return Field2D(nu, nv, su, sv, Vec2d{0, 0});
}

/// Displacement composition: id + out = (id + a) o (id + b),
/// i.e. out(x) = b(x) + a(x + b(x)) with a resampled bilinearly.
inline Field2D compose(const Field2D& a, const Field2D& b) {
  Field2D out = b;
  for (int j = 0; j < b.nv; ++j)
    for (int i = 0; i < b.nu; ++i) {
      Vec2d shift = b.at(i, j);
      Vec2d av = sample_bilinear(a, i + shift.x, j + shift.y);
      out.at(i, j) = shift + av;
    }
  return out;
}

/// Group exponential of a stationary velocity field via scaling and squaring.
inline Field2D exp_field(const Field2D& v, int squarings = 6) {
  Field2D w = v;
  double scale = 1.0 / double(1 << squarings);
  for (auto& val : w.data) val = val * scale;
  for (int s = 0; s < squarings; ++s) w = compose(w, w);
  return w;
}

namespace detail {
inline std::vector<double> gaussian_kernel(double sigma) {
  int radius = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

inline int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}
}  // namespace detail

/// Separable Gaussian smoothing with reflected borders.
template <typename T>
inline void gaussian_smooth(Grid2<T>& g, double sigma) {
  if (sigma <= 0) return;
  auto k = detail::gaussian_kernel(sigma);
  int radius = int(k.size() / 2);
  Grid2<T> tmp = g;
  for (int j = 0; j < g.nv; ++j)
    for (int i = 0; i < g.nu; ++i) {
      T acc{};
      for (int d = -radius; d <= radius; ++d)
        acc += g.at(detail::reflect(i + d, g.nu), j) * k[d + radius];
      tmp.at(i, j) = acc;
    }
  for (int j = 0; j < g.nv; ++j)
    for (int i = 0; i < g.nu; ++i) {
      T acc{};
      for (int d = -radius; d <= radius; ++d)
        acc += tmp.at(i, detail::reflect(j + d, g.nv)) * k[d + radius];
      g.at(i, j) = acc;
    }
}

/// out(x) = img(x + disp(x)), bilinear, clamped borders.
template <typename T>
inline Grid2<T> warp_image(const Grid2<T>& img, const Field2D& disp) {
  Grid2<T> out = img;
  for (int j = 0; j < img.nv; ++j)
    for (int i = 0; i < img.nu; ++i) {
      Vec2d d = disp.at(i, j);
      out.at(i, j) = T(sample_bilinear(img, i + d.x, j + d.y));
    }
  return out;
}

/// Warp a mask through its signed distance field and re-threshold.
inline Mask2D warp_mask_via_sdf(const Sdf2D& sdf, const Field2D& disp) {
  Mask2D out(sdf.nu, sdf.nv, sdf.su, sdf.sv, 0);
  for (int j = 0; j < sdf.nv; ++j)
    for (int i = 0; i < sdf.nu; ++i) {
      Vec2d d = disp.at(i, j);
      out.at(i, j) = sample_bilinear(sdf, i + d.x, j + d.y) <= 0.0 ? 1 : 0;
    }
  return out;
}

/// det(I + grad u) per pixel; central differences, one-sided at borders.
inline Grid2<double> jacobian_det(const Field2D& disp) {
  Grid2<double> out(disp.nu, disp.nv, disp.su, disp.sv, 1.0);
  for (int j = 0; j < disp.nv; ++j)
    for (int i = 0; i < disp.nu; ++i) {
      auto d_di = [&](int a, int b) { return disp.at(a, b); };
      int i0 = std::max(0, i - 1), i1 = std::min(disp.nu - 1, i + 1);
      int j0 = std::max(0, j - 1), j1 = std::min(disp.nv - 1, j + 1);
      double wi = i1 - i0, wj = j1 - j0;
      Vec2d dux = (d_di(i1, j) - d_di(i0, j)) / wi;
      Vec2d duy = (d_di(i, j1) - d_di(i, j0)) / wj;
      out.at(i, j) = (1.0 + dux.x) * (1.0 + duy.y) - dux.y * duy.x;
    }
  return out;
}

inline double max_magnitude(const Field2D& f) {
  double m = 0;
  for (const auto& v : f.data) m = std::max(m, v.norm());
  return m;
}

/// Max |(id+a) o (id+b) (x) - x| over the interior with the given margin.
inline double composition_residual(const Field2D& a, const Field2D& b, int margin) {
  double worst = 0;
  for (int j = margin; j < b.nv - margin; ++j)
    for (int i = margin; i < b.nu - margin; ++i) {
      Vec2d shift = b.at(i, j);
      Vec2d av = sample_bilinear(a, i + shift.x, j + shift.y);
      worst = std::max(worst, (shift + av).norm());
    }
  return worst;
}

}  // namespace planerecon
