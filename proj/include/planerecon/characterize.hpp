#pragma once

#include <cmath>
#include <vector>

#include "planerecon/field3d.hpp"
#include "planerecon/mesh.hpp"

namespace planerecon {

/// Voxelwise det(d h / d v) for h = id + u; dimensionless local volume
/// ratio, exactly 1 wherever u is constant.
inline ScalarVolume jacobian_map(const VectorVolume& u) {
  ScalarVolume out(u.nx, u.ny, u.nz, u.spacing, u.origin, 1.f);
  for (int k = 0; k < u.nz; ++k)
    for (int j = 0; j < u.ny; ++j)
      for (int i = 0; i < u.nx; ++i) out.at(i, j, k) = float(jacobian_det_at(u, i, j, k));
  return out;
}

/// Streaming per-voxel accumulator for the temporal standard deviation of
/// the Jacobian maps; frames may arrive in any order.
class SigmaJAccumulator {
 public:
  explicit SigmaJAccumulator(const GridSpec& spec)
      : spec_(spec), sum_(spec.nx * size_t(spec.ny) * spec.nz, 0.0),
        sum_sq_(sum_.size(), 0.0) {}

  void add(const ScalarVolume& jmap) {
    if (size_t(jmap.nx) * jmap.ny * jmap.nz != sum_.size() ||
        std::abs(jmap.spacing - spec_.spacing) > 1e-9)
      throw GridMismatchError("SigmaJAccumulator: jacobian map grid mismatch");
    for (size_t c = 0; c < sum_.size(); ++c) {
      sum_[c] += double(jmap.data[c]);
      sum_sq_[c] += double(jmap.data[c]) * double(jmap.data[c]);
    }
    ++n_;
  }

  int count() const { return n_; }

  /// Population standard deviation (divisor n) per voxel.
  ScalarVolume finish() const {
    if (n_ < 2) throw ConfigError("sigma_j: need at least two jacobian maps");
    ScalarVolume out(spec_.nx, spec_.ny, spec_.nz, spec_.spacing, spec_.origin, 0.f);
    for (size_t c = 0; c < sum_.size(); ++c) {
      double mean = sum_[c] / n_;
      double var = sum_sq_[c] / n_ - mean * mean;
      out.data[c] = float(std::sqrt(std::max(0.0, var)));
    }
    return out;
  }

 private:
  GridSpec spec_;
  std::vector<double> sum_, sum_sq_;
  int n_{0};
};

/// Temporal standard deviation of a list of Jacobian maps.
inline ScalarVolume sigma_j(const std::vector<ScalarVolume>& maps) {
  if (maps.size() < 2) throw ConfigError("sigma_j: need at least two maps");
  for (size_t m = 1; m < maps.size(); ++m)
    if (!maps[m].same_geometry(maps[0]))
      throw GridMismatchError("sigma_j: maps do not share one grid");
  GridSpec spec{maps[0].nx, maps[0].ny, maps[0].nz, maps[0].spacing, maps[0].origin};
  SigmaJAccumulator acc(spec);
  for (const auto& m : maps) acc.add(m);
  return acc.finish();
}

/// Mean |J - 1| over the 1-voxel-eroded organ interior.
inline double mean_abs_jacobian_deviation(const ScalarVolume& jmap, const LabelVolume& organ) {
  LabelVolume interior = erode6(organ);
  double sum = 0;
  size_t n = 0;
  for (size_t c = 0; c < interior.data.size(); ++c)
    if (interior.data[c]) {
      sum += std::abs(double(jmap.data[c]) - 1.0);
      ++n;
    }
  if (n == 0) throw EmptyShapeError("mean_abs_jacobian_deviation: no interior voxels");
  return sum / double(n);
}

}  // namespace planerecon
