#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "planerecon/field2d.hpp"
#include "planerecon/sdf.hpp"

namespace planerecon {

struct Register2DParams {
  int levels{3};
  std::vector<int> iterations{80, 60, 40};  // coarsest level first
  int squarings{6};
  double sigma_fluid_px{2.0};      // smoothing of the demons update
  double sigma_diffusion_px{1.0};  // smoothing of the velocity field
  double max_step_px{2.0};
  double convergence_rel{1e-6};
  int convergence_window{10};
  double noise_deadzone{5.0};  // skip updates where |diff| < k * noise sigma
};

/// Forward/inverse displacement maps in mm. The forward map carries fixed
/// coordinates into moving coordinates, so warping the moving image by it
/// reproduces the fixed image; both directions come from one stationary
/// velocity field, which keeps them consistent inverses.
struct Diffeo2D {
  Grid2<Vec2d> forward_mm;
  Grid2<Vec2d> inverse_mm;
  bool converged{true};
};

/// Raw result of an SVF registration; velocity in pixel units at the full
/// resolution, plus per-level SSD diagnostics.
struct Svf2D {
  Field2D velocity;
  bool converged{true};
  int squarings{6};
  std::vector<double> ssd_start, ssd_end;  // per level, coarsest first

  Field2D forward_px() const { return exp_field(velocity, squarings); }
  Field2D inverse_px() const {
    Field2D neg = velocity;
    for (auto& v : neg.data) v = Vec2d{-v.x, -v.y};
    return exp_field(neg, squarings);
  }
};

namespace detail {

inline Image2D downsample2(const Image2D& img) {
  Image2D s = img;
  gaussian_smooth(s, 1.0);
  int nu = (img.nu + 1) / 2, nv = (img.nv + 1) / 2;
  Image2D out(nu, nv, img.su * 2, img.sv * 2, 0.f);
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nu; ++i)
      out.at(i, j) = s.at(std::min(2 * i, img.nu - 1), std::min(2 * j, img.nv - 1));
  return out;
}

inline Field2D upsample_velocity(const Field2D& v, int nu, int nv, double su, double sv) {
  Field2D out(nu, nv, su, sv, Vec2d{0, 0});
  double fx = double(v.nu) / nu, fy = double(v.nv) / nv;
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nu; ++i) {
      Vec2d coarse = sample_bilinear(v, i * fx, j * fy);
      out.at(i, j) = coarse * (1.0 / fx);  // pixel units scale with resolution
    }
  return out;
}

inline double ssd(const Image2D& a, const Image2D& b) {
  double s = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    double d = double(a.data[i]) - double(b.data[i]);
    s += d * d;
  }
  return s / double(a.size());
}

/// Robust per-pixel noise estimate from the median absolute second
/// difference along u; structure edges are a minority and drop out.
inline double estimate_noise_sigma(const Image2D& img) {
  if (img.nu < 3) return 0.0;
  std::vector<float> d2;
  d2.reserve(img.size());
  for (int j = 0; j < img.nv; ++j)
    for (int i = 1; i + 1 < img.nu; ++i)
      d2.push_back(std::abs(img.at(i + 1, j) - 2.f * img.at(i, j) + img.at(i - 1, j)));
  if (d2.empty()) return 0.0;
  auto mid = d2.begin() + d2.size() / 2;
  std::nth_element(d2.begin(), mid, d2.end());
  return 1.4826 * double(*mid) / std::sqrt(6.0);
}

inline void normalize_pair(Image2D& a, Image2D& b) {
  float lo = a.data[0], hi = a.data[0];
  for (float v : a.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (float v : b.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  float range = hi - lo;
  if (range < 1e-12f) return;
  for (auto& v : a.data) v = (v - lo) / range;
  for (auto& v : b.data) v = (v - lo) / range;
}

}  // namespace detail

/// SSD-driven stationary-velocity registration with Gaussian-smoothed
/// updates, multiresolution pyramid and scaling-and-squaring integration.
/// Returns the best velocity seen per the SSD criterion; `converged` is
/// false when the finest level ran out of iterations first.
inline Svf2D register_svf(const Image2D& fixed_in, const Image2D& moving_in,
                          const Register2DParams& params = {}) {
  if (!fixed_in.same_geometry(moving_in))
    throw GridMismatchError("register_svf: images must share one frame geometry");

  Image2D fixed = fixed_in, moving = moving_in;
  detail::normalize_pair(fixed, moving);

  // pyramid, finest first
  std::vector<Image2D> pf{fixed}, pm{moving};
  for (int l = 1; l < params.levels; ++l) {
    pf.push_back(detail::downsample2(pf.back()));
    pm.push_back(detail::downsample2(pm.back()));
  }

  Svf2D result;
  result.squarings = params.squarings;
  Field2D v;
  bool have_v = false;
  bool finest_converged = true;

  for (int l = params.levels - 1; l >= 0; --l) {
    const Image2D& F = pf[l];
    const Image2D& M = pm[l];
    if (!have_v) {
      v = zero_field(F.nu, F.nv, F.su, F.sv);
      have_v = true;
    } else {
      v = detail::upsample_velocity(v, F.nu, F.nv, F.su, F.sv);
    }

    int level_pos = params.levels - 1 - l;  // 0 = coarsest
    int max_iters = params.iterations.empty()
                        ? 50
                        : params.iterations[std::min(level_pos, int(params.iterations.size()) - 1)];
    double deadzone =
        params.noise_deadzone * std::sqrt(2.0) *
        std::max(detail::estimate_noise_sigma(F), detail::estimate_noise_sigma(M));

    double best_ssd = 1e300;
    Field2D best_v = v;
    std::deque<double> window;
    bool level_converged = false;

    for (int iter = 0; iter < max_iters; ++iter) {
      Field2D disp = exp_field(v, params.squarings);
      Image2D warped = warp_image(M, disp);
      double cur = detail::ssd(F, warped);
      if (iter == 0) result.ssd_start.push_back(cur);
      if (cur < best_ssd) {
        best_ssd = cur;
        best_v = v;
      }
      window.push_back(cur);
      if (int(window.size()) > params.convergence_window + 1) window.pop_front();
      if (int(window.size()) == params.convergence_window + 1) {
        double ref = window.front();
        if (ref > 0 && std::abs(ref - cur) / ref < params.convergence_rel) {
          level_converged = true;
          break;
        }
      }

      // demons force toward the fixed image
      Field2D force = zero_field(F.nu, F.nv, F.su, F.sv);
      for (int j = 0; j < F.nv; ++j)
        for (int i = 0; i < F.nu; ++i) {
          int i0 = std::max(0, i - 1), i1 = std::min(F.nu - 1, i + 1);
          int j0 = std::max(0, j - 1), j1 = std::min(F.nv - 1, j + 1);
          double gx = (warped.at(i1, j) - warped.at(i0, j)) / double(i1 - i0);
          double gy = (warped.at(i, j1) - warped.at(i, j0)) / double(j1 - j0);
          double diff = double(F.at(i, j)) - double(warped.at(i, j));
          if (std::abs(diff) < deadzone) continue;
          double denom = gx * gx + gy * gy + diff * diff;
          if (denom < 1e-12) continue;
          double scale = diff / denom;
          Vec2d step{gx * scale, gy * scale};
          double mag = step.norm();
          if (mag > params.max_step_px) step = step * (params.max_step_px / mag);
          force.at(i, j) = step;
        }
      gaussian_smooth(force, params.sigma_fluid_px);
      for (size_t p = 0; p < v.data.size(); ++p) v.data[p] += force.data[p];
      gaussian_smooth(v, params.sigma_diffusion_px);
    }
    if (!level_converged && l == 0) finest_converged = false;
    v = best_v;
    result.ssd_end.push_back(best_ssd);
  }

  result.velocity = v;
  result.converged = finest_converged;
  return result;
}

/// Map a shape's signed distances to a smooth [0,1] image for SSD matching;
/// the 0.5 isocontour sits on the mask boundary.
inline Image2D sdf_to_registration_image(const Sdf2D& sdf, double ramp_px = 8.0) {
  Image2D out(sdf.nu, sdf.nv, sdf.su, sdf.sv, 0.f);
  double ramp_mm = ramp_px * sdf.su;
  for (size_t i = 0; i < sdf.size(); ++i) {
    double v = 0.5 - double(sdf.data[i]) / (2.0 * ramp_mm);
    out.data[i] = float(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

/// Geometric registration between two masks through their SDF ramp images.
inline Svf2D register_masks_geometric(const Mask2D& fixed, const Mask2D& moving,
                                      const Register2DParams& params = {},
                                      double ramp_px = 8.0) {
  Image2D f = sdf_to_registration_image(mask_to_sdf(fixed), ramp_px);
  Image2D m = sdf_to_registration_image(mask_to_sdf(moving), ramp_px);
  return register_svf(f, m, params);
}

/// Intensity registration returning mm displacement maps.
inline Diffeo2D register_2d(const Image2D& fixed, const Image2D& moving,
                            const Register2DParams& params = {}) {
  Svf2D svf = register_svf(fixed, moving, params);
  Diffeo2D out;
  out.converged = svf.converged;
  out.forward_mm = svf.forward_px();
  out.inverse_mm = svf.inverse_px();
  for (auto& v : out.forward_mm.data) v = Vec2d{v.x * fixed.su, v.y * fixed.sv};
  for (auto& v : out.inverse_mm.data) v = Vec2d{v.x * fixed.su, v.y * fixed.sv};
  return out;
}

}  // namespace planerecon
