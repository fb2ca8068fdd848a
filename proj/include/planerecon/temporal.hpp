#pragma once

#include <cmath>
#include <iostream>
#include <optional>
#include <vector>

#include "planerecon/acquisition.hpp"
#include "planerecon/register2d.hpp"

namespace planerecon {

enum class SlotTag : std::uint8_t { Empty = 0, Acquired = 1, Interpolated = 2 };

/// The (t, p) arrangement of all per-plane masks: plane p is acquired at the
/// instants t with p = t mod N_p, everything else starts Empty and is filled
/// by geodesic interpolation between the neighboring acquisitions.
struct MaskMatrix {
  int n_planes{0};
  int n_cycles{0};
  double slice_time_ms{0};
  double t0_ms{0};
  std::vector<PlaneFrame> frames;
  std::vector<SlotTag> tags;
  std::vector<Mask2D> masks;

  int n_instants() const { return n_planes * n_cycles; }
  size_t slot(int t_idx, int p) const { return size_t(t_idx) * n_planes + p; }
  SlotTag tag(int t_idx, int p) const { return tags[slot(t_idx, p)]; }
  const Mask2D& mask(int t_idx, int p) const { return masks[slot(t_idx, p)]; }
  double instant_ms(int t_idx) const { return t0_ms + t_idx * slice_time_ms; }
};

/// Places every propagated mask at its schedule slot. A slot whose acquired
/// segmentation is empty (organ not in plane) is tagged Empty and skipped
/// downstream, with a note on stderr.
inline MaskMatrix assemble_matrix(const std::vector<std::vector<Mask2D>>& per_plane_masks,
                                  const std::vector<PlaneFrame>& frames,
                                  const AcquisitionSchedule& schedule) {
  MaskMatrix m;
  m.n_planes = schedule.n_planes;
  m.n_cycles = schedule.n_cycles;
  m.slice_time_ms = schedule.slice_time_ms;
  m.t0_ms = schedule.t0_ms;
  m.frames = frames;
  if (int(per_plane_masks.size()) != m.n_planes)
    throw IncompleteSeriesError("assemble_matrix: plane count mismatch");
  for (const auto& series : per_plane_masks)
    if (int(series.size()) != m.n_cycles)
      throw IncompleteSeriesError("assemble_matrix: a plane series is missing cycles");

  m.tags.assign(size_t(m.n_instants()) * m.n_planes, SlotTag::Empty);
  m.masks.resize(size_t(m.n_instants()) * m.n_planes);
  int empty_acquired = 0;
  for (int k = 0; k < m.n_cycles; ++k)
    for (int p = 0; p < m.n_planes; ++p) {
      int t_idx = k * m.n_planes + p;
      const Mask2D& mask = per_plane_masks[p][k];
      if (count_foreground(mask) == 0) {
        ++empty_acquired;
        continue;
      }
      m.masks[m.slot(t_idx, p)] = mask;
      m.tags[m.slot(t_idx, p)] = SlotTag::Acquired;
    }
  if (empty_acquired > 0)
    std::cerr << "[planerecon] note: " << empty_acquired
              << " acquired segmentations are empty; their slots stay unfilled\n";
  return m;
}

struct TemporalParams {
  Register2DParams reg;
  double sdf_ramp_px{8.0};
};

/// Previous acquired index of plane p at or before instant t.
inline int previous_acquired_index(int t_idx, int p, int n_planes) {
  return int(std::floor(double(t_idx - p) / n_planes)) * n_planes + p;
}

/// Fractional geodesic step: warps the mask by exp(s * v) through its SDF.
inline Mask2D fractional_warp(const Sdf2D& sdf_from, const Svf2D& svf, double fraction) {
  Field2D scaled = svf.velocity;
  for (auto& v : scaled.data) v = v * fraction;
  Field2D disp = exp_field(scaled, svf.squarings);
  return warp_mask_via_sdf(sdf_from, disp);
}

/// Fills every Empty slot that has acquired neighbors on both sides by
/// registering the earlier neighbor onto the later one and scaling the
/// velocity by the fractional time offset. Slots in the leading/trailing
/// bands keep their Empty tag.
inline void interpolate_missing(MaskMatrix& m, const TemporalParams& params = {}) {
  for (int p = 0; p < m.n_planes; ++p) {
    for (int c = 0; c + 1 < m.n_cycles; ++c) {
      int k_prev = c * m.n_planes + p;
      int k_next = k_prev + m.n_planes;
      if (m.tag(k_prev, p) != SlotTag::Acquired || m.tag(k_next, p) != SlotTag::Acquired)
        continue;

      std::optional<Svf2D> svf;
      std::optional<Sdf2D> sdf_prev;
      bool usable = false;
      for (int t = k_prev + 1; t < k_next; ++t) {
        double fraction = double(t - k_prev) / m.n_planes;
        if (!svf) {
          svf = register_masks_geometric(m.mask(k_next, p), m.mask(k_prev, p), params.reg,
                                         params.sdf_ramp_px);
          sdf_prev = mask_to_sdf(m.mask(k_prev, p));
          // the registration failed if the full warp does not land near the
          // later mask; best-so-far results that do are kept
          Mask2D end = fractional_warp(*sdf_prev, *svf, 1.0);
          usable = dice(end, m.mask(k_next, p)) >= 0.5;
        }
        Mask2D filled;
        bool fell_back = false;
        if (usable) {
          filled = fractional_warp(*sdf_prev, *svf, fraction);
          keep_largest_component(filled);
        }
        if (!usable || count_foreground(filled) == 0) {
          filled = fraction < 0.5 ? m.mask(k_prev, p) : m.mask(k_next, p);
          fell_back = true;
        }
        if (fell_back)
          std::cerr << "[planerecon] warning: temporal interpolation fell back to the "
                       "nearest neighbor at (t_idx="
                    << t << ", plane=" << p << ")\n";
        m.masks[m.slot(t, p)] = std::move(filled);
        m.tags[m.slot(t, p)] = SlotTag::Interpolated;
      }
    }
  }
}

/// A secant plane pair and its world-space intersection line; dir is unit
/// length and oriented upward so superior/inferior points are well defined.
struct SecantPair {
  int plane_i{0}, plane_j{0};
  Vec3d point;
  Vec3d dir;
};

inline std::optional<SecantPair> make_secant_pair(int i, const PlaneFrame& fi, int j,
                                                  const PlaneFrame& fj) {
  Vec3d ni = fi.normal(), nj = fj.normal();
  Vec3d dir = ni.cross(nj);
  if (dir.norm() < 1e-9) return std::nullopt;  // parallel planes
  dir = dir.normalized();
  if (dir.z < 0 || (dir.z == 0 && (dir.y < 0 || (dir.y == 0 && dir.x < 0)))) dir = -dir;

  // solve for a point on both planes, pinned along the line direction
  Vec3d ci = fi.pixel_to_world(0.5 * (fi.nu - 1), 0.5 * (fi.nv - 1));
  Vec3d cj = fj.pixel_to_world(0.5 * (fj.nu - 1), 0.5 * (fj.nv - 1));
  Vec3d rhs{ni.dot(ci), nj.dot(cj), dir.dot((ci + cj) * 0.5)};
  Vec3d r0{ni.x, nj.x, dir.x}, r1{ni.y, nj.y, dir.y}, r2{ni.z, nj.z, dir.z};
  double det = det3(r0, r1, r2);
  if (std::abs(det) < 1e-12) return std::nullopt;
  Vec3d point{det3(rhs, r1, r2) / det, det3(r0, rhs, r2) / det, det3(r0, r1, rhs) / det};
  return SecantPair{i, j, point, dir};
}

/// Superior and inferior crossings of a mask boundary with the line, found
/// by marching the mask's signed distance along the line and refining the
/// outermost zero crossings linearly.
struct LineCrossings {
  Vec3d superior;
  Vec3d inferior;
};

inline LineCrossings mask_line_extremes(const Mask2D& mask, const PlaneFrame& frame,
                                        const SecantPair& line) {
  Sdf2D sdf = mask_to_sdf(mask);
  Vec3d l0 = frame.world_to_plane(line.point);
  Vec3d ld = frame.pose.rotation.transposed() * line.dir;

  // clip the line to the pixel rectangle in plane mm
  double s_lo = -1e18, s_hi = 1e18;
  auto clip = [&](double origin, double d, double lo, double hi) {
    if (std::abs(d) < 1e-12) {
      if (origin < lo || origin > hi) s_lo = 1e18;  // outside, empty range
      return;
    }
    double a = (lo - origin) / d, b = (hi - origin) / d;
    if (a > b) std::swap(a, b);
    s_lo = std::max(s_lo, a);
    s_hi = std::min(s_hi, b);
  };
  clip(l0.x, ld.x, 0.0, (mask.nu - 1) * mask.su);
  clip(l0.y, ld.y, 0.0, (mask.nv - 1) * mask.sv);
  if (s_lo >= s_hi) throw NoIntersectionError("mask_line_extremes: line misses the frame");

  double step = 0.1 * std::min(mask.su, mask.sv);
  auto sdf_at = [&](double s) {
    double u = (l0.x + s * ld.x) / mask.su, v = (l0.y + s * ld.y) / mask.sv;
    return sample_bilinear(sdf, u, v);
  };

  double first = 0, last = 0;
  bool found = false;
  double prev_s = s_lo, prev_d = sdf_at(s_lo);
  for (double s = s_lo + step; s <= s_hi + 1e-12; s += step) {
    double d = sdf_at(s);
    if (!found && d <= 0.0) {
      first = prev_d > 0 ? prev_s + (0.0 - prev_d) / (d - prev_d) * (s - prev_s) : prev_s;
      found = true;
    }
    if (found && d <= 0.0) {
      last = s;  // extended below once we see the exit
    }
    if (found && prev_d <= 0.0 && d > 0.0)
      last = prev_s + (0.0 - prev_d) / (d - prev_d) * (s - prev_s);
    prev_s = s;
    prev_d = d;
  }
  if (!found) throw NoIntersectionError("mask_line_extremes: mask does not meet the line");

  Vec3d a = line.point + line.dir * first;
  Vec3d b = line.point + line.dir * last;
  // dir is oriented upward, so the larger parameter is superior
  return {b, a};
}

/// Spatial discrepancy between two secant-plane masks: the sum of distances
/// between their superior and inferior line crossings.
inline double zeta(const Mask2D& mask_i, const PlaneFrame& frame_i, const Mask2D& mask_j,
                   const PlaneFrame& frame_j, const SecantPair& line) {
  LineCrossings ci = mask_line_extremes(mask_i, frame_i, line);
  LineCrossings cj = mask_line_extremes(mask_j, frame_j, line);
  return (ci.superior - cj.superior).norm() + (ci.inferior - cj.inferior).norm();
}

struct ZetaRow {
  int t_idx;
  int plane_i, plane_j;
  double zeta_mm;
};

/// Discrepancy of every secant pair at every instant where both slots are
/// filled; slots whose masks miss the line are reported and excluded.
inline std::vector<ZetaRow> zeta_report(const MaskMatrix& m, int* n_skipped = nullptr) {
  std::vector<ZetaRow> rows;
  std::vector<SecantPair> pairs;
  for (int i = 0; i < m.n_planes; ++i)
    for (int j = i + 1; j < m.n_planes; ++j)
      if (auto p = make_secant_pair(i, m.frames[i], j, m.frames[j])) pairs.push_back(*p);
  int skipped = 0;
  for (int t = 0; t < m.n_instants(); ++t)
    for (const auto& pr : pairs) {
      if (m.tag(t, pr.plane_i) == SlotTag::Empty || m.tag(t, pr.plane_j) == SlotTag::Empty)
        continue;
      try {
        double z = zeta(m.mask(t, pr.plane_i), m.frames[pr.plane_i], m.mask(t, pr.plane_j),
                        m.frames[pr.plane_j], pr);
        rows.push_back({t, pr.plane_i, pr.plane_j, z});
      } catch (const NoIntersectionError&) {
        ++skipped;
      }
    }
  if (n_skipped) *n_skipped = skipped;
  return rows;
}

/// Baseline discrepancy without temporal alignment: for every cycle, pairs
/// the raw acquired masks of the two planes (nearest in time by schedule).
inline std::vector<ZetaRow> zeta_raw_report(const MaskMatrix& m, int* n_skipped = nullptr) {
  std::vector<ZetaRow> rows;
  std::vector<SecantPair> pairs;
  for (int i = 0; i < m.n_planes; ++i)
    for (int j = i + 1; j < m.n_planes; ++j)
      if (auto p = make_secant_pair(i, m.frames[i], j, m.frames[j])) pairs.push_back(*p);
  int skipped = 0;
  for (int k = 0; k < m.n_cycles; ++k)
    for (const auto& pr : pairs) {
      int ti = k * m.n_planes + pr.plane_i, tj = k * m.n_planes + pr.plane_j;
      if (m.tag(ti, pr.plane_i) != SlotTag::Acquired ||
          m.tag(tj, pr.plane_j) != SlotTag::Acquired)
        continue;
      try {
        double z = zeta(m.mask(ti, pr.plane_i), m.frames[pr.plane_i], m.mask(tj, pr.plane_j),
                        m.frames[pr.plane_j], pr);
        rows.push_back({ti, pr.plane_i, pr.plane_j, z});
      } catch (const NoIntersectionError&) {
        ++skipped;
      }
    }
  if (n_skipped) *n_skipped = skipped;
  return rows;
}

}  // namespace planerecon
