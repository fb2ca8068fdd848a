#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "planerecon/grid.hpp"
#include "planerecon/resample.hpp"

namespace planerecon {

/// Synthetic deforming "bladder": an ellipsoid under a volume-preserving
/// time-varying stretch along x (compensated on y and z) plus a rigid
/// vertical translation, both driven by a smooth breathing waveform with
/// seeded per-cycle amplitude jitter.
struct PhantomSpec {
  Vec3d semi_axes{30.0, 26.0, 22.0};  // mm, along world x (ant-post), y (lateral), z (vertical)
  Vec3d center{0.0, 0.0, 0.0};        // world mm at rest
  double breathing_period_s{4.0};
  int n_cycles_breathing{64};
  double amplitude{0.15};              // strain eps
  double translation_amplitude_mm{6.0};
  double jitter{0.2};                  // per-cycle uniform amplitude jitter, +-20%
  std::uint64_t seed{1234};

  void validate() const {
    if (breathing_period_s <= 0) throw ConfigError("phantom: breathing period must be > 0");
    if (amplitude < 0 || amplitude * (1.0 + jitter) >= 1.0)
      throw ConfigError("phantom: amplitude out of the invertible range");
    if (semi_axes.x <= 0 || semi_axes.y <= 0 || semi_axes.z <= 0)
      throw ConfigError("phantom: semi axes must be positive");
    if (n_cycles_breathing < 1) throw ConfigError("phantom: need at least one breathing cycle");
  }
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Evaluated phantom model; pure function of (spec, t) everywhere.
class Phantom {
 public:
  explicit Phantom(const PhantomSpec& spec) : spec_(spec) {
    spec_.validate();
    std::mt19937_64 rng(spec_.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    cycle_factor_.resize(spec_.n_cycles_breathing);
    for (auto& f : cycle_factor_) f = 1.0 + spec_.jitter * u(rng);
  }

  const PhantomSpec& spec() const { return spec_; }

  /// Breathing waveform in [0,1], zero at cycle boundaries.
  double waveform(double t_s) const {
    return 0.5 * (1.0 - std::cos(2.0 * M_PI * t_s / spec_.breathing_period_s));
  }

  double cycle_amplitude_factor(double t_s) const {
    int c = int(std::floor(t_s / spec_.breathing_period_s));
    c = std::clamp(c, 0, int(cycle_factor_.size()) - 1);
    return cycle_factor_[c];
  }

  /// Effective drive signal: jittered waveform.
  double drive(double t_s) const { return cycle_amplitude_factor(t_s) * waveform(t_s); }

  /// Stretch factor along x at time t; y and z are scaled by 1/sqrt(lambda).
  double stretch(double t_s) const { return 1.0 + spec_.amplitude * drive(t_s); }

  double translation_z(double t_s) const { return spec_.translation_amplitude_mm * drive(t_s); }

  /// Analytic determinant of the deformation Jacobian (volume preserving).
  double jacobian_det(double /*t_s*/) const { return 1.0; }

  /// Rest position -> deformed position at time t.
  Vec3d deform(const Vec3d& p0, double t_s) const {
    double lam = stretch(t_s), inv_sq = 1.0 / std::sqrt(lam);
    Vec3d q = p0 - spec_.center;
    return spec_.center + Vec3d{lam * q.x, inv_sq * q.y, inv_sq * q.z + translation_z(t_s)};
  }

  /// Deformed position at time t -> rest position (exact analytic inverse).
  Vec3d deform_inverse(const Vec3d& p, double t_s) const {
    double lam = stretch(t_s), sq = std::sqrt(lam);
    Vec3d q = p - spec_.center;
    return spec_.center + Vec3d{q.x / lam, q.y * sq, (q.z - translation_z(t_s)) * sq};
  }

  bool contains(const Vec3d& p, double t_s) const {
    Vec3d q = deform_inverse(p, t_s) - spec_.center;
    double r = q.x / spec_.semi_axes.x, s = q.y / spec_.semi_axes.y,
           u = q.z / spec_.semi_axes.z;
    return r * r + s * s + u * u <= 1.0;
  }

  /// Approximate signed distance (mm) to the deformed surface, negative inside.
  double signed_distance(const Vec3d& p, double t_s) const {
    double lam = stretch(t_s), sq = std::sqrt(lam);
    Vec3d q = p - spec_.center - Vec3d{0, 0, translation_z(t_s)};
    // rho = |B q| with B = diag(1/(a*lam), sqrt(lam)/b, sqrt(lam)/c)
    Vec3d b{1.0 / (spec_.semi_axes.x * lam), sq / spec_.semi_axes.y, sq / spec_.semi_axes.z};
    Vec3d bq{b.x * q.x, b.y * q.y, b.z * q.z};
    double rho = bq.norm();
    if (rho < 1e-12) return -std::min({spec_.semi_axes.x, spec_.semi_axes.y, spec_.semi_axes.z});
    Vec3d grad{b.x * bq.x, b.y * bq.y, b.z * bq.z};  // grad rho * rho
    return (rho - 1.0) * rho / grad.norm();
  }

  double volume_mm3() const {
    return 4.0 / 3.0 * M_PI * spec_.semi_axes.x * spec_.semi_axes.y * spec_.semi_axes.z;
  }

  /// Axis-aligned world bounds of the deformed ellipsoid at time t.
  void bounds(double t_s, Vec3d& lo, Vec3d& hi) const {
    double lam = stretch(t_s), inv_sq = 1.0 / std::sqrt(lam);
    Vec3d half{spec_.semi_axes.x * lam, spec_.semi_axes.y * inv_sq, spec_.semi_axes.z * inv_sq};
    Vec3d c = spec_.center + Vec3d{0, 0, translation_z(t_s)};
    lo = c - half;
    hi = c + half;
  }

 private:
  PhantomSpec spec_;
  std::vector<double> cycle_factor_;
};

/// Labels the voxels whose centers lie inside the deformed ellipsoid.
/// Throws TruncatedPhantomError when the shape is not fully inside the grid.
inline LabelVolume phantom_mask_3d(const Phantom& phantom, double t_s, const GridSpec& grid) {
  LabelVolume out = grid.make_labels();
  Vec3d lo, hi;
  phantom.bounds(t_s, lo, hi);
  Vec3d grid_lo = out.voxel_to_world(-0.5, -0.5, -0.5);
  Vec3d grid_hi = out.voxel_to_world(out.nx - 0.5, out.ny - 0.5, out.nz - 0.5);
  if (lo.x < grid_lo.x || lo.y < grid_lo.y || lo.z < grid_lo.z || hi.x > grid_hi.x ||
      hi.y > grid_hi.y || hi.z > grid_hi.z)
    throw TruncatedPhantomError("phantom_mask_3d: deformed ellipsoid truncated by the grid");
  for (int k = 0; k < out.nz; ++k)
    for (int j = 0; j < out.ny; ++j)
      for (int i = 0; i < out.nx; ++i)
        if (phantom.contains(out.voxel_to_world(i, j, k), t_s)) out.at(i, j, k) = 1;
  return out;
}

inline LabelVolume phantom_mask_3d(const PhantomSpec& spec, double t_s, const GridSpec& grid) {
  return phantom_mask_3d(Phantom(spec), t_s, grid);
}

/// Samples one slice: binary mask from the in-plane restriction of the shape
/// and a grayscale image (interior 1.0, exterior 0.2, 1 px Gaussian edge,
/// additive noise sigma 0.02) mimicking a fluid-filled organ in hyper-signal.
inline Slice phantom_slice(const Phantom& phantom, double t_s, const PlaneFrame& frame,
                           double noise_sigma = 0.02) {
  Slice slice;
  slice.frame = frame;
  slice.image = frame.make_grid<float>();
  slice.mask = frame.make_grid<std::uint8_t>();

  const double sigma_mm = frame.su;  // 1 px edge blur
  std::uint64_t seed = phantom.spec().seed;
  seed = detail::splitmix64(seed ^ std::bit_cast<std::uint64_t>(t_s));
  seed = detail::splitmix64(seed ^ std::bit_cast<std::uint64_t>(frame.pose.translation.x));
  seed = detail::splitmix64(seed ^ std::bit_cast<std::uint64_t>(frame.pose.translation.y));
  seed = detail::splitmix64(seed ^ std::bit_cast<std::uint64_t>(frame.pose.translation.z));
  std::mt19937 rng{std::uint32_t(seed)};
  std::normal_distribution<double> noise(0.0, noise_sigma);

  for (int j = 0; j < frame.nv; ++j)
    for (int i = 0; i < frame.nu; ++i) {
      Vec3d p = frame.pixel_to_world(i, j);
      double d = phantom.signed_distance(p, t_s);
      double edge = 0.5 * std::erfc(d / (sigma_mm * M_SQRT2));
      double value = 0.2 + 0.8 * edge;
      if (noise_sigma > 0) value += noise(rng);
      slice.image.at(i, j) = float(value);
      slice.mask.at(i, j) = phantom.contains(p, t_s) ? 1 : 0;
    }
  return slice;
}

inline Slice phantom_slice(const PhantomSpec& spec, double t_s, const PlaneFrame& frame) {
  return phantom_slice(Phantom(spec), t_s, frame);
}

}  // namespace planerecon
