#pragma once

#include <deque>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "planerecon/bspline.hpp"
#include "planerecon/field3d.hpp"
#include "planerecon/pse.hpp"
#include "planerecon/skeleton.hpp"

namespace planerecon {

struct Register3DParams {
  double sigma_v_mm{1.0};           // Gaussian kernel of the point-set metric
  double support_sigmas{4.0};
  std::vector<int> shrink{6, 4, 2, 1};
  std::vector<int> iterations{250, 200, 150, 100};
  double knot_spacing_mm{44.0};     // base level; halves at each finer level
  double gradient_step{0.1};        // max update per iteration, in level spacings
  double convergence_rel{1e-6};
  int convergence_window{15};
  int max_jacobian_halvings{5};
  int max_descent_halvings{8};
  double label_threshold{0.5};
};

/// One reconstructed frame. The displacement field u is the pull-back map:
/// sampling the template at v + u(v) yields the reconstruction, so h = id+u
/// carries reconstruction coordinates onto template coordinates.
struct ReconstructionResult {
  int t_idx{-1};
  Vec3d translation;         // COM alignment, mm
  VectorVolume displacement; // u on the isotropic grid
  LabelVolume labels;        // template resampled through h
  bool ok{true};
  bool converged{true};
  std::string note;
  std::vector<double> level_cost_start, level_cost_end;
  double final_cost{0};
  int pse_fallbacks{0};
  double min_organ_jacobian{1.0};
};

/// Mass-center translation carrying the template onto the skeleton.
inline Vec3d align_com(const LabelVolume& template_labels, const LabelVolume& skeleton_labels) {
  return centroid_world(skeleton_labels) - centroid_world(template_labels);
}

inline Vec3d align_com(const StaticTemplate& tmpl, const Skeleton& skel) {
  return align_com(tmpl.labels, skel.labels);
}

/// Pull-back label resampling with a partial-volume threshold.
inline LabelVolume resample_labels_through(const LabelVolume& tmpl, const VectorVolume& u,
                                           double threshold = 0.5) {
  LabelVolume out(u.nx, u.ny, u.nz, u.spacing, u.origin, 0);
  for (int k = 0; k < out.nz; ++k)
    for (int j = 0; j < out.ny; ++j)
      for (int i = 0; i < out.nx; ++i) {
        Vec3d v = out.voxel_to_world(i, j, k) + u.at(i, j, k).cast<double>();
        Vec3d t = tmpl.world_to_voxel(v);
        if (t.x < -1 || t.y < -1 || t.z < -1 || t.x > tmpl.nx || t.y > tmpl.ny ||
            t.z > tmpl.nz)
          continue;
        if (sample_trilinear(tmpl, t.x, t.y, t.z) >= threshold) out.at(i, j, k) = 1;
      }
  return out;
}

namespace detail {

struct LevelGrid {
  GridSpec spec;
  LabelVolume organ;  // template organ resampled at this level (pre-aligned)
  BBox3i organ_bbox;
};

inline LevelGrid make_level_grid(const GridSpec& base, int shrink,
                                 const LabelVolume& template_labels, const Vec3d& translation) {
  LevelGrid lg;
  lg.spec.nx = int(std::ceil(double(base.nx - 1) / shrink)) + 1;
  lg.spec.ny = int(std::ceil(double(base.ny - 1) / shrink)) + 1;
  lg.spec.nz = int(std::ceil(double(base.nz - 1) / shrink)) + 1;
  lg.spec.spacing = base.spacing * shrink;
  lg.spec.origin = base.origin;
  lg.organ = lg.spec.make_labels();
  for (int k = 0; k < lg.spec.nz; ++k)
    for (int j = 0; j < lg.spec.ny; ++j)
      for (int i = 0; i < lg.spec.nx; ++i) {
        Vec3d p = lg.organ.voxel_to_world(i, j, k) - translation;
        Vec3d t = template_labels.world_to_voxel(p);
        int ti = int(std::lround(t.x)), tj = int(std::lround(t.y)), tk = int(std::lround(t.z));
        if (template_labels.contains(ti, tj, tk) && template_labels.at(ti, tj, tk))
          lg.organ.at(i, j, k) = 1;
      }
  lg.organ_bbox = foreground_bbox(lg.organ);
  return lg;
}

}  // namespace detail

/// Deforms the pre-aligned template contour onto the skeleton contour by
/// gradient descent on the point-set expectation cost. Each iteration
/// scatters the point gradients onto the level grid, fits a cubic B-spline
/// update at the level's knot spacing, rescales it to the gradient step and
/// composes it into the running forward map; steps that would fold the map
/// or raise the cost are halved. The final forward map is inverted into the
/// pull-back field u used to resample the template labels.
inline ReconstructionResult register_partial(const StaticTemplate& tmpl, const Skeleton& skel,
                                             const Register3DParams& params = {}) {
  ReconstructionResult res;
  res.t_idx = skel.t_idx;
  res.translation = align_com(tmpl, skel);
  if (tmpl.contour.empty() || skel.contour.empty())
    throw EmptyShapeError("register_partial: empty contour point set");

  GridSpec base{skel.labels.nx, skel.labels.ny, skel.labels.nz, skel.labels.spacing,
                skel.labels.origin};

  // pre-aligned template contour
  std::vector<Vec3d> aligned(tmpl.contour.size());
  for (size_t i = 0; i < aligned.size(); ++i) aligned[i] = tmpl.contour[i] + res.translation;

  PseParams pse{params.sigma_v_mm, params.support_sigmas};
  HashGrid3 r_grid(skel.contour, pse.support_sigmas * pse.sigma_mm);

  VectorVolume f;  // forward deformation on the current level grid
  int n_levels = int(params.shrink.size());

  auto warp_points = [&](const VectorVolume& field, std::vector<Vec3d>& out) {
    out.resize(aligned.size());
    for (size_t i = 0; i < aligned.size(); ++i) {
      Vec3d v = field.world_to_voxel(aligned[i]);
      out[i] = aligned[i] + sample_trilinear(field, v.x, v.y, v.z);
    }
  };

  for (int level = 0; level < n_levels; ++level) {
    detail::LevelGrid lg =
        detail::make_level_grid(base, params.shrink[level], tmpl.labels, res.translation);
    if (level == 0)
      f = lg.spec.make_field();
    else
      f = resample_field(f, lg.spec);
    double knot = params.knot_spacing_mm / double(1 << level);
    double step_len = params.gradient_step * lg.spec.spacing;
    int max_iters = params.iterations[std::min<size_t>(level, params.iterations.size() - 1)];

    std::vector<Vec3d> warped;
    warp_points(f, warped);
    double cur_cost = pse_cost(warped, skel.contour, pse).cost;
    res.level_cost_start.push_back(cur_cost);

    std::deque<double> window;
    VectorVolume delta = lg.spec.make_field();
    std::vector<double> splat_w(delta.size());
    std::vector<Vec3d> acc(delta.size(), Vec3d{});

    for (int iter = 0; iter < max_iters; ++iter) {
      window.push_back(cur_cost);
      if (int(window.size()) > params.convergence_window + 1) window.pop_front();
      if (int(window.size()) == params.convergence_window + 1) {
        double ref = window.front();
        if (ref > 0 && std::abs(ref - cur_cost) / ref < params.convergence_rel) break;
      }

      std::vector<Vec3d> grad;
      PseValue val = pse_cost_grad(warped, skel.contour, pse, r_grid, grad);
      res.pse_fallbacks = val.n_fallback;

      // scatter the descent direction onto the level grid
      std::fill(delta.data.begin(), delta.data.end(), Vec3f{});
      std::fill(splat_w.begin(), splat_w.end(), 0.0);
      std::fill(acc.begin(), acc.end(), Vec3d{});
      BBox3i data_box;
      data_box.lo = {delta.nx, delta.ny, delta.nz};
      data_box.hi = {-1, -1, -1};
      for (size_t p = 0; p < warped.size(); ++p) {
        Vec3d v = delta.world_to_voxel(warped[p]);
        int i0 = int(std::floor(v.x)), j0 = int(std::floor(v.y)), k0 = int(std::floor(v.z));
        double tx = v.x - i0, ty = v.y - j0, tz = v.z - k0;
        for (int dk = 0; dk <= 1; ++dk)
          for (int dj = 0; dj <= 1; ++dj)
            for (int di = 0; di <= 1; ++di) {
              int ii = i0 + di, jj = j0 + dj, kk = k0 + dk;
              if (!delta.contains(ii, jj, kk)) continue;
              double w = (di ? tx : 1 - tx) * (dj ? ty : 1 - ty) * (dk ? tz : 1 - tz);
              if (w <= 0) continue;
              size_t c = delta.index(ii, jj, kk);
              acc[c] += -grad[p] * w;
              splat_w[c] += w;
              data_box.lo.x = std::min(data_box.lo.x, ii);
              data_box.lo.y = std::min(data_box.lo.y, jj);
              data_box.lo.z = std::min(data_box.lo.z, kk);
              data_box.hi.x = std::max(data_box.hi.x, ii);
              data_box.hi.y = std::max(data_box.hi.y, jj);
              data_box.hi.z = std::max(data_box.hi.z, kk);
            }
      }
      if (data_box.empty()) break;

      std::vector<Vec3d> positions, values;
      std::vector<double> weights;
      for (int k = data_box.lo.z; k <= data_box.hi.z; ++k)
        for (int j = data_box.lo.y; j <= data_box.hi.y; ++j)
          for (int i = data_box.lo.x; i <= data_box.hi.x; ++i) {
            size_t c = delta.index(i, j, k);
            if (splat_w[c] <= 0) continue;
            positions.push_back(delta.voxel_to_world(i, j, k));
            values.push_back(acc[c] / splat_w[c]);
            weights.push_back(splat_w[c]);
          }

      Vec3d box_lo = delta.voxel_to_world(data_box.lo.x, data_box.lo.y, data_box.lo.z);
      Vec3d box_hi = delta.voxel_to_world(data_box.hi.x, data_box.hi.y, data_box.hi.z);
      BSplineLattice3 lat =
          fit_bspline_scattered(positions, values, weights, box_lo, box_hi, knot);

      // dense update over the spline's support
      int support_vox = int(std::ceil(4.0 * knot / lg.spec.spacing)) + 1;
      BBox3i region = data_box;
      region.expand(support_vox, delta.nx, delta.ny, delta.nz);
      evaluate_bspline_region(lat, delta, region);

      double max_mag = 0;
      for (int k = region.lo.z; k <= region.hi.z; ++k)
        for (int j = region.lo.y; j <= region.hi.y; ++j)
          for (int i = region.lo.x; i <= region.hi.x; ++i)
            max_mag = std::max(max_mag, double(delta.at(i, j, k).cast<double>().norm()));
      if (max_mag < 1e-14) break;

      // compose region must reach every x with x + f(x) in the update support
      double f_reach = 0;
      for (const auto& v : f.data) f_reach = std::max(f_reach, double(v.cast<double>().norm()));
      BBox3i compose_box = region;
      compose_box.expand(int(std::ceil(f_reach / lg.spec.spacing)) + 1, delta.nx, delta.ny,
                         delta.nz);

      double base_scale = step_len / max_mag;
      int jac_halvings = 0, descent_halvings = 0;
      bool accepted = false, level_done = false;
      double scale = base_scale;
      VectorVolume trial = f;
      while (true) {
        trial = f;
        for (int k = compose_box.lo.z; k <= compose_box.hi.z; ++k)
          for (int j = compose_box.lo.y; j <= compose_box.hi.y; ++j)
            for (int i = compose_box.lo.x; i <= compose_box.hi.x; ++i) {
              Vec3d x = trial.voxel_to_world(i, j, k);
              Vec3d fx = f.at(i, j, k).cast<double>();
              Vec3d v = delta.world_to_voxel(x + fx);
              if (v.x < region.lo.x - 1 || v.y < region.lo.y - 1 || v.z < region.lo.z - 1 ||
                  v.x > region.hi.x + 1 || v.y > region.hi.y + 1 || v.z > region.hi.z + 1)
                continue;
              Vec3d d = sample_trilinear(delta, v.x, v.y, v.z) * scale;
              trial.at(i, j, k) = (fx + d).cast<float>();
            }

        bool folded = false;
        for (int k = lg.organ_bbox.lo.z; k <= lg.organ_bbox.hi.z && !folded; ++k)
          for (int j = lg.organ_bbox.lo.y; j <= lg.organ_bbox.hi.y && !folded; ++j)
            for (int i = lg.organ_bbox.lo.x; i <= lg.organ_bbox.hi.x; ++i) {
              if (!lg.organ.at(i, j, k)) continue;
              if (jacobian_det_at(trial, i, j, k) <= 0) {
                folded = true;
                break;
              }
            }
        if (folded) {
          if (++jac_halvings > params.max_jacobian_halvings) {
            res.ok = false;
            res.note = "aborted: jacobian stayed non-positive after " +
                       std::to_string(params.max_jacobian_halvings) + " step halvings";
            res.final_cost = cur_cost;
            return res;
          }
          scale *= 0.5;
          continue;
        }

        std::vector<Vec3d> trial_pts;
        warp_points(trial, trial_pts);
        double trial_cost = pse_cost(trial_pts, skel.contour, pse).cost;
        if (trial_cost <= cur_cost * (1.0 + 1e-12)) {
          f = std::move(trial);
          warped = std::move(trial_pts);
          cur_cost = trial_cost;
          accepted = true;
          break;
        }
        if (++descent_halvings > params.max_descent_halvings) {
          level_done = true;
          break;
        }
        scale *= 0.5;
      }
      if (!accepted && level_done) break;
    }
    res.level_cost_end.push_back(cur_cost);
  }

  res.final_cost = res.level_cost_end.empty() ? 0 : res.level_cost_end.back();

  // pull-back field and reconstruction on the base grid
  if (params.shrink.back() != 1) f = resample_field(f, base);
  VectorVolume ginv = invert_displacement(f);
  res.displacement = base.make_field();
  for (size_t c = 0; c < ginv.data.size(); ++c)
    res.displacement.data[c] = ginv.data[c] - res.translation.cast<float>();
  res.labels = resample_labels_through(tmpl.labels, res.displacement, params.label_threshold);

  double min_det = 1e300;
  for (const auto& v : boundary_voxels(res.labels))
    min_det = std::min(min_det, jacobian_det_at(res.displacement, v.x, v.y, v.z));
  LabelVolume interior = erode6(res.labels);
  for (int k = 0; k < interior.nz; ++k)
    for (int j = 0; j < interior.ny; ++j)
      for (int i = 0; i < interior.nx; ++i)
        if (interior.at(i, j, k))
          min_det = std::min(min_det, jacobian_det_at(res.displacement, i, j, k));
  res.min_organ_jacobian = min_det == 1e300 ? 1.0 : min_det;
  if (res.min_organ_jacobian <= 0) {
    res.ok = false;
    res.note = "pull-back jacobian non-positive at an organ voxel";
  }
  return res;
}

/// Independent per-frame registrations; failures are recorded and skipped.
inline void reconstruct_series(const StaticTemplate& tmpl, const std::vector<Skeleton>& skeletons,
                               const Register3DParams& params,
                               const std::function<void(ReconstructionResult&&)>& sink) {
  for (const auto& skel : skeletons) {
    ReconstructionResult r;
    try {
      r = register_partial(tmpl, skel, params);
    } catch (const Error& e) {
      r.t_idx = skel.t_idx;
      r.ok = false;
      r.note = e.what();
    }
    sink(std::move(r));
  }
}

inline std::vector<ReconstructionResult> reconstruct_series(
    const StaticTemplate& tmpl, const std::vector<Skeleton>& skeletons,
    const Register3DParams& params = {}) {
  std::vector<ReconstructionResult> out;
  reconstruct_series(tmpl, skeletons, params,
                     [&](ReconstructionResult&& r) { out.push_back(std::move(r)); });
  return out;
}

}  // namespace planerecon
