#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "planerecon/grid.hpp"
#include "planerecon/phantom.hpp"

namespace planerecon {

enum class ConfigKind { Star, Grid, Lines };

inline const char* to_string(ConfigKind k) {
  switch (k) {
    case ConfigKind::Star: return "star";
    case ConfigKind::Grid: return "grid";
    case ConfigKind::Lines: return "lines";
  }
  return "?";
}

inline ConfigKind config_kind_from_string(const std::string& s) {
  if (s == "star") return ConfigKind::Star;
  if (s == "grid") return ConfigKind::Grid;
  if (s == "lines") return ConfigKind::Lines;
  throw ConfigError("unknown configuration kind: " + s);
}

/// Tunables for building a plane configuration; negative values pick the
/// per-kind defaults (slice time, thickness and in-plane resolution follow
/// the star/grid/lines acquisition presets).
struct ConfigParams {
  double slice_time_ms{-1};
  int n_cycles{-1};
  double slice_thickness_mm{-1};
  double in_plane_resolution_mm{-1};
  double fov_mm{104.64};
  double grid_plane_spacing_mm{-1};  // default: subject_extent / 4
  double lines_pitch_mm{-1};         // default: slice thickness
  Vec3d center{};                    // all planes pass through this point
};

inline double default_slice_time_ms(ConfigKind k) {
  switch (k) {
    case ConfigKind::Star: return 183.72;
    case ConfigKind::Grid: return 124.95;
    case ConfigKind::Lines: return 91.61;
  }
  return 0;
}

inline double default_slice_thickness_mm(ConfigKind k) {
  switch (k) {
    case ConfigKind::Star: return 5.0;
    case ConfigKind::Grid: return 6.0;
    case ConfigKind::Lines: return 4.0;
  }
  return 0;
}

inline double default_in_plane_resolution_mm(ConfigKind k) {
  switch (k) {
    case ConfigKind::Star: return 1.09;
    case ConfigKind::Grid: return 1.36;
    case ConfigKind::Lines: return 1.82;
  }
  return 0;
}

inline int default_n_cycles(ConfigKind k) { return k == ConfigKind::Lines ? 60 : 100; }

/// One multi-planar geometry plus its cycle timing. A full acquisition cycle
/// visits all planes once, in index order, one slice every TS milliseconds.
struct PlaneConfiguration {
  ConfigKind kind{ConfigKind::Star};
  std::vector<PlaneFrame> frames;
  double slice_time_ms{0};
  int n_cycles{0};

  int n_planes() const { return int(frames.size()); }
  double cycle_ms() const { return n_planes() * slice_time_ms; }

  void validate() const {
    if (frames.empty() || slice_time_ms <= 0 || n_cycles <= 0)
      throw ConfigError("PlaneConfiguration: incomplete configuration");
    if (cycle_ms() > 1000.0 + 1e-9)
      throw ConfigError("PlaneConfiguration: acquisition cycle exceeds one second");
    size_t np = frames.size();
    if (kind == ConfigKind::Star && np != 4) throw ConfigError("star needs 4 planes");
    if (kind == ConfigKind::Grid && np != 5) throw ConfigError("grid needs 5 planes");
    if (kind == ConfigKind::Lines && (np < 8 || np > 12))
      throw ConfigError("lines needs 8 to 12 planes");
  }
};

namespace detail {

inline PlaneFrame make_frame(const Vec3d& e_u, const Vec3d& e_v, const Vec3d& center,
                             double fov_mm, double res_mm, double thickness_mm) {
  int n = std::max(2, int(std::ceil(fov_mm / res_mm)));
  Mat3 rot = Mat3::from_columns(e_u, e_v, e_u.cross(e_v));
  Vec3d origin = center - e_u * (0.5 * (n - 1) * res_mm) - e_v * (0.5 * (n - 1) * res_mm);
  return PlaneFrame(n, n, res_mm, res_mm, thickness_mm, RigidPose{rot, origin});
}

// world axes: x anterior-posterior, y lateral, z vertical
inline PlaneFrame sagittal_frame(double lateral_offset, const ConfigParams& p, double res,
                                 double thick) {
  Vec3d c = p.center + Vec3d{0, lateral_offset, 0};
  return make_frame({1, 0, 0}, {0, 0, 1}, c, p.fov_mm, res, thick);
}

inline PlaneFrame coronal_frame(double antpost_offset, const ConfigParams& p, double res,
                                double thick) {
  Vec3d c = p.center + Vec3d{antpost_offset, 0, 0};
  return make_frame({0, 1, 0}, {0, 0, 1}, c, p.fov_mm, res, thick);
}

inline PlaneFrame oblique_frame(double angle_rad, const ConfigParams& p, double res,
                                double thick) {
  Mat3 rz = Mat3::rotation_z(angle_rad);
  return make_frame(rz * Vec3d{1, 0, 0}, {0, 0, 1}, p.center, p.fov_mm, res, thick);
}

}  // namespace detail

/// Builds one of the three plane geometries around the subject center:
/// star = coronal + mid-sagittal + two planes at +-45 degrees to the
/// sagittal about the vertical axis; grid = three sagittal and two coronal
/// planes, evenly spaced; lines = parallel sagittal planes covering the
/// lateral extent at the slice pitch, clamped to [8,12] planes.
inline PlaneConfiguration make_configuration(ConfigKind kind, double subject_extent_mm,
                                             ConfigParams params = {}) {
  if (subject_extent_mm <= 0) throw ConfigError("make_configuration: extent must be positive");
  PlaneConfiguration cfg;
  cfg.kind = kind;
  cfg.slice_time_ms =
      params.slice_time_ms > 0 ? params.slice_time_ms : default_slice_time_ms(kind);
  cfg.n_cycles = params.n_cycles > 0 ? params.n_cycles : default_n_cycles(kind);
  double thick = params.slice_thickness_mm > 0 ? params.slice_thickness_mm
                                               : default_slice_thickness_mm(kind);
  double res = params.in_plane_resolution_mm > 0 ? params.in_plane_resolution_mm
                                                 : default_in_plane_resolution_mm(kind);

  switch (kind) {
    case ConfigKind::Star: {
      cfg.frames.push_back(detail::coronal_frame(0.0, params, res, thick));
      cfg.frames.push_back(detail::sagittal_frame(0.0, params, res, thick));
      cfg.frames.push_back(detail::oblique_frame(M_PI / 4.0, params, res, thick));
      cfg.frames.push_back(detail::oblique_frame(-M_PI / 4.0, params, res, thick));
      break;
    }
    case ConfigKind::Grid: {
      double q = params.grid_plane_spacing_mm > 0 ? params.grid_plane_spacing_mm
                                                  : subject_extent_mm / 4.0;
      cfg.frames.push_back(detail::sagittal_frame(-q, params, res, thick));
      cfg.frames.push_back(detail::sagittal_frame(0.0, params, res, thick));
      cfg.frames.push_back(detail::sagittal_frame(q, params, res, thick));
      cfg.frames.push_back(detail::coronal_frame(-0.5 * q, params, res, thick));
      cfg.frames.push_back(detail::coronal_frame(0.5 * q, params, res, thick));
      break;
    }
    case ConfigKind::Lines: {
      double pitch = params.lines_pitch_mm > 0 ? params.lines_pitch_mm : thick;
      int n_cover = int(std::ceil(subject_extent_mm / pitch));
      int cap = std::min(12, int(std::floor(1000.0 / cfg.slice_time_ms)));
      if (n_cover < 8)
        throw ConfigError("lines: subject extent too small for the minimum plane count");
      if (cap < 8)
        throw ConfigError("lines: slice time too long for the minimum plane count");
      int np = std::min(n_cover, cap);
      for (int i = 0; i < np; ++i) {
        double off = (i - 0.5 * (np - 1)) * pitch;
        cfg.frames.push_back(detail::sagittal_frame(off, params, res, thick));
      }
      break;
    }
  }
  cfg.validate();
  return cfg;
}

/// One acquisition instant: global index t_idx = cycle * N_p + plane.
struct ScheduleEntry {
  int t_idx{0};
  int cycle{0};
  int plane{0};
  double t_ms{0};
};

/// Interleaved round-robin ordering of all (cycle, plane) pairs.
struct AcquisitionSchedule {
  std::vector<ScheduleEntry> entries;
  double t0_ms{0};
  double slice_time_ms{0};
  int n_planes{0};
  int n_cycles{0};

  double total_duration_ms() const { return n_planes * slice_time_ms * n_cycles; }
  const ScheduleEntry& entry(int cycle, int plane) const {
    return entries[size_t(cycle) * n_planes + plane];
  }
};

inline AcquisitionSchedule build_schedule(const PlaneConfiguration& cfg, double t0_ms = 0.0) {
  cfg.validate();
  AcquisitionSchedule s;
  s.t0_ms = t0_ms;
  s.slice_time_ms = cfg.slice_time_ms;
  s.n_planes = cfg.n_planes();
  s.n_cycles = cfg.n_cycles;
  s.entries.reserve(size_t(s.n_planes) * s.n_cycles);
  for (int k = 0; k < cfg.n_cycles; ++k)
    for (int p = 0; p < s.n_planes; ++p) {
      int t_idx = k * s.n_planes + p;
      s.entries.push_back({t_idx, k, p, t0_ms + t_idx * cfg.slice_time_ms});
    }
  return s;
}

/// All slices of one plane across the acquisition cycles.
struct PlaneSeries {
  PlaneFrame frame;
  std::vector<Image2D> images;    // indexed by cycle
  std::vector<Mask2D> gt_masks;   // ground-truth segmentations, indexed by cycle
};

struct AcquiredSeries {
  PlaneConfiguration config;
  AcquisitionSchedule schedule;
  std::vector<PlaneSeries> planes;
};

/// Samples the phantom at every schedule instant. Planes within a cycle see
/// different phantom states; that temporal offset is what the downstream
/// interpolation has to undo.
inline AcquiredSeries acquire_series(const PlaneConfiguration& cfg, const Phantom& phantom,
                                     double t0_ms = 0.0) {
  AcquiredSeries out;
  out.config = cfg;
  out.schedule = build_schedule(cfg, t0_ms);
  out.planes.resize(cfg.n_planes());
  for (int p = 0; p < cfg.n_planes(); ++p) {
    out.planes[p].frame = cfg.frames[p];
    out.planes[p].images.resize(cfg.n_cycles);
    out.planes[p].gt_masks.resize(cfg.n_cycles);
  }
  for (const auto& e : out.schedule.entries) {
    Slice s = phantom_slice(phantom, e.t_ms / 1000.0, cfg.frames[e.plane]);
    out.planes[e.plane].images[e.cycle] = std::move(s.image);
    out.planes[e.plane].gt_masks[e.cycle] = std::move(s.mask);
  }
  return out;
}

}  // namespace planerecon
