#pragma once

#include <cmath>
#include <unordered_map>
#include <vector>

#include "planerecon/geometry.hpp"
#include "planerecon/metrics.hpp"

namespace planerecon {

/// Spatial hash over a static point set for fixed-radius queries.
class HashGrid3 {
 public:
  HashGrid3(const std::vector<Vec3d>& points, double cell) : points_(points), cell_(cell) {
    for (int idx = 0; idx < int(points.size()); ++idx)
      cells_[key_of(points[idx])].push_back(idx);
  }

  template <typename F>
  void for_each_within(const Vec3d& q, double radius, F&& fn) const {
    double r2 = radius * radius;
    int span = int(std::ceil(radius / cell_));
    int qx = coord(q.x), qy = coord(q.y), qz = coord(q.z);
    for (int dz = -span; dz <= span; ++dz)
      for (int dy = -span; dy <= span; ++dy)
        for (int dx = -span; dx <= span; ++dx) {
          auto it = cells_.find(pack(qx + dx, qy + dy, qz + dz));
          if (it == cells_.end()) continue;
          for (int idx : it->second) {
            double d2 = (points_[idx] - q).norm2();
            if (d2 <= r2) fn(idx, d2);
          }
        }
  }

 private:
  int coord(double x) const { return int(std::floor(x / cell_)); }
  std::uint64_t pack(int x, int y, int z) const {
    auto u = [](int v) { return std::uint64_t(std::uint32_t(v + (1 << 20))); };
    return (u(x) << 42) ^ (u(y) << 21) ^ u(z);
  }
  std::uint64_t key_of(const Vec3d& p) const { return pack(coord(p.x), coord(p.y), coord(p.z)); }

  const std::vector<Vec3d>& points_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

struct PseParams {
  double sigma_mm{1.0};
  double support_sigmas{4.0};  // Gaussian truncation radius in sigmas
};

struct PseValue {
  double cost{0};
  int n_fallback{0};  // terms that used the nearest-neighbor distance
};

namespace detail {

/// Shared evaluation core. For each target point R_i, the expected match is
/// the Gaussian-weighted mean of the query points within the truncated
/// support; targets with no support fall back to their nearest query point.
/// When grad is non-null it receives d(cost)/d(V_j); with fixed_weights the
/// Gaussian weights are treated as constants (EM-style majorization), which
/// removes the degenerate pull that collapses query points onto the sparse
/// target curves.
inline PseValue pse_eval(const std::vector<Vec3d>& v_points, const std::vector<Vec3d>& r_points,
                         const PseParams& params, const HashGrid3& r_grid,
                         std::vector<Vec3d>* grad, bool fixed_weights = false) {
  const double sigma2 = params.sigma_mm * params.sigma_mm;
  const double radius = params.support_sigmas * params.sigma_mm;
  const size_t r = r_points.size(), m = v_points.size();
  if (r == 0 || m == 0) throw EmptyShapeError("pse: empty point set");

  std::vector<double> sum_w(r, 0.0);
  std::vector<Vec3d> sum_wv(r, Vec3d{});
  struct Pair {
    int i, j;
    double w;
  };
  std::vector<Pair> pairs;
  if (grad) pairs.reserve(r * 8);

  for (int j = 0; j < int(m); ++j) {
    r_grid.for_each_within(v_points[j], radius, [&](int i, double d2) {
      double w = std::exp(-0.5 * d2 / sigma2);
      sum_w[i] += w;
      sum_wv[i] += v_points[j] * w;
      if (grad) pairs.push_back({i, j, w});
    });
  }

  if (grad) grad->assign(m, Vec3d{});

  // expected-match residuals
  std::vector<Vec3d> residual(r, Vec3d{});  // E_i - R_i where supported
  PseValue out;
  std::vector<int> orphans;
  for (size_t i = 0; i < r; ++i) {
    if (sum_w[i] > 0) {
      Vec3d e = sum_wv[i] / sum_w[i];
      residual[i] = e - r_points[i];
      out.cost += residual[i].norm2();
    } else {
      orphans.push_back(int(i));
    }
  }

  if (!orphans.empty()) {
    KdTree3 v_tree(v_points);
    for (int i : orphans) {
      auto [j, d2] = v_tree.nearest(r_points[i]);
      out.cost += d2;
      ++out.n_fallback;
      if (grad) (*grad)[j] += (v_points[j] - r_points[i]) * (2.0 / double(r));
    }
  }
  out.cost /= double(r);

  if (grad) {
    for (const auto& pr : pairs) {
      const Vec3d& d = residual[pr.i];
      Vec3d first = d * (pr.w / sum_w[pr.i]);
      if (fixed_weights) {
        (*grad)[pr.j] += first * (2.0 / double(r));
        continue;
      }
      Vec3d e = sum_wv[pr.i] / sum_w[pr.i];
      double proj = d.dot(v_points[pr.j] - e);
      Vec3d second = (r_points[pr.i] - v_points[pr.j]) * (proj * pr.w / (sigma2 * sum_w[pr.i]));
      (*grad)[pr.j] += (first + second) * (2.0 / double(r));
    }
  }
  return out;
}

}  // namespace detail

/// Mean squared distance between each target point and its Gaussian-weighted
/// expected correspondent among the query points (support truncated at
/// support_sigmas via a spatial hash; orphan targets use their nearest
/// query point).
inline PseValue pse_cost(const std::vector<Vec3d>& v_points, const std::vector<Vec3d>& r_points,
                         const PseParams& params = {}) {
  HashGrid3 grid(r_points, params.support_sigmas * params.sigma_mm);
  return detail::pse_eval(v_points, r_points, params, grid, nullptr);
}

inline PseValue pse_cost_grad(const std::vector<Vec3d>& v_points,
                              const std::vector<Vec3d>& r_points, const PseParams& params,
                              const HashGrid3& r_grid, std::vector<Vec3d>& grad,
                              bool fixed_weights = false) {
  return detail::pse_eval(v_points, r_points, params, r_grid, &grad, fixed_weights);
}

}  // namespace planerecon
