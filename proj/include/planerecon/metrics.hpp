#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "planerecon/geometry.hpp"
#include "planerecon/errors.hpp"

namespace planerecon {

/// Static 3D kd-tree for nearest-neighbor queries.
class KdTree3 {
 public:
  explicit KdTree3(std::vector<Vec3d> points) : points_(std::move(points)) {
    if (points_.empty()) throw EmptyShapeError("KdTree3: empty point set");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    build(0, int(order_.size()), 0);
  }

  size_t size() const { return points_.size(); }

  /// Index and squared distance of the nearest point to q.
  std::pair<int, double> nearest(const Vec3d& q) const {
    int best = -1;
    double best_d2 = 1e300;
    search(0, int(order_.size()), 0, q, best, best_d2);
    return {best, best_d2};
  }

 private:
  static double axis_value(const Vec3d& p, int axis) {
    return axis == 0 ? p.x : axis == 1 ? p.y : p.z;
  }

  void build(int lo, int hi, int depth) {
    if (hi - lo <= 1) return;
    int axis = depth % 3;
    int mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) {
                       return axis_value(points_[a], axis) < axis_value(points_[b], axis);
                     });
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
  }

  void search(int lo, int hi, int depth, const Vec3d& q, int& best, double& best_d2) const {
    if (hi <= lo) return;
    int axis = depth % 3;
    int mid = (lo + hi) / 2;
    const Vec3d& p = points_[order_[mid]];
    double d2 = (p - q).norm2();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = order_[mid];
    }
    double delta = axis_value(q, axis) - axis_value(p, axis);
    int near_lo = delta < 0 ? lo : mid + 1, near_hi = delta < 0 ? mid : hi;
    int far_lo = delta < 0 ? mid + 1 : lo, far_hi = delta < 0 ? hi : mid;
    search(near_lo, near_hi, depth + 1, q, best, best_d2);
    if (delta * delta < best_d2) search(far_lo, far_hi, depth + 1, q, best, best_d2);
  }

  std::vector<Vec3d> points_;
  std::vector<int> order_;
};

struct SurfaceDistances {
  double hd_mm{0};  // non-symmetric Hausdorff: max nearest-neighbor distance
  double md_mm{0};  // mean nearest-neighbor distance
};

/// For each source point, the distance to the nearest target point; HD is
/// the maximum and MD the mean. Non-symmetric: source is the skeleton
/// contour, target the reconstruction contour.
inline SurfaceDistances surface_distances(const std::vector<Vec3d>& source,
                                          const std::vector<Vec3d>& target) {
  if (source.empty() || target.empty())
    throw EmptyShapeError("surface_distances: empty point set");
  KdTree3 tree(target);
  double worst = 0, sum = 0;
  for (const auto& p : source) {
    double d = std::sqrt(tree.nearest(p).second);
    worst = std::max(worst, d);
    sum += d;
  }
  return {worst, sum / double(source.size())};
}

/// Relative absolute volume deviation in percent.
inline double ravd(double reference_count, double test_count) {
  if (reference_count <= 0)
    throw DivisionByZeroError("ravd: reference volume is empty");
  return 100.0 * std::abs(test_count - reference_count) / reference_count;
}

/// Pearson correlation of two equally long samples.
inline double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw ConfigError("pearson_correlation: need two equal samples");
  double ma = 0, mb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= double(a.size());
  mb /= double(b.size());
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0 || sbb <= 0) throw DivisionByZeroError("pearson_correlation: zero variance");
  return sab / std::sqrt(saa * sbb);
}

struct MeanStd {
  double mean{0};
  double sd{0};
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double m = 0;
  for (double x : xs) m += x;
  m /= double(xs.size());
  double v = 0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, std::sqrt(v / double(xs.size()))};
}

}  // namespace planerecon
