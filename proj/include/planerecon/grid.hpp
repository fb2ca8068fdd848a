#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "planerecon/errors.hpp"
#include "planerecon/geometry.hpp"

namespace planerecon {

/// Isotropic 3D grid with world-space pose. Voxel (i,j,k) has its center at
/// origin + spacing*(i,j,k); storage is row-major with x fastest.
template <typename T>
struct Grid3 {
  int nx{0}, ny{0}, nz{0};
  double spacing{1.0};  // mm, isotropic
  Vec3d origin{};       // world position of voxel (0,0,0) center
  std::vector<T> data;

  Grid3() = default;
  Grid3(int nx_, int ny_, int nz_, double spacing_, Vec3d origin_, T fill = T{})
      : nx(nx_), ny(ny_), nz(nz_), spacing(spacing_), origin(origin_),
        data(static_cast<size_t>(nx_) * ny_ * nz_, fill) {}

  size_t size() const { return data.size(); }
  size_t index(int i, int j, int k) const {
    return static_cast<size_t>(i) + static_cast<size_t>(nx) * (static_cast<size_t>(j) + static_cast<size_t>(ny) * k);
  }
  T& at(int i, int j, int k) { return data[index(i, j, k)]; }
  const T& at(int i, int j, int k) const { return data[index(i, j, k)]; }
  bool contains(int i, int j, int k) const {
    return i >= 0 && i < nx && j >= 0 && j < ny && k >= 0 && k < nz;
  }

  Vec3d voxel_to_world(double i, double j, double k) const {
    return origin + Vec3d{i, j, k} * spacing;
  }
  Vec3d world_to_voxel(const Vec3d& p) const { return (p - origin) / spacing; }

  bool same_geometry(const Grid3& o) const {
    return nx == o.nx && ny == o.ny && nz == o.nz &&
           std::abs(spacing - o.spacing) < 1e-9 && (origin - o.origin).norm() < 1e-6;
  }

  /// New grid with identical geometry, value type U, filled with `fill`.
  template <typename U>
  Grid3<U> like(U fill = U{}) const {
    return Grid3<U>(nx, ny, nz, spacing, origin, fill);
  }
};

using LabelVolume = Grid3<std::uint8_t>;
using ScalarVolume = Grid3<float>;
using VectorVolume = Grid3<Vec3f>;  // displacement fields, mm

/// 2D pixel grid; pixel (i,j) center at (i*su, j*sv) in plane coordinates.
template <typename T>
struct Grid2 {
  int nu{0}, nv{0};
  double su{1.0}, sv{1.0};  // mm per pixel
  std::vector<T> data;

  Grid2() = default;
  Grid2(int nu_, int nv_, double su_, double sv_, T fill = T{})
      : nu(nu_), nv(nv_), su(su_), sv(sv_), data(static_cast<size_t>(nu_) * nv_, fill) {}

  size_t size() const { return data.size(); }
  size_t index(int i, int j) const { return static_cast<size_t>(i) + static_cast<size_t>(nu) * j; }
  T& at(int i, int j) { return data[index(i, j)]; }
  const T& at(int i, int j) const { return data[index(i, j)]; }
  bool contains(int i, int j) const { return i >= 0 && i < nu && j >= 0 && j < nv; }

  bool same_geometry(const Grid2& o) const {
    return nu == o.nu && nv == o.nv && std::abs(su - o.su) < 1e-9 && std::abs(sv - o.sv) < 1e-9;
  }

  template <typename U>
  Grid2<U> like(U fill = U{}) const {
    return Grid2<U>(nu, nv, su, sv, fill);
  }
};

using Mask2D = Grid2<std::uint8_t>;
using Image2D = Grid2<float>;
using Sdf2D = Grid2<float>;
using Sdf3D = Grid3<float>;

/// Oriented 2D slice grid with a rigid pose in world space. Column axis_u of
/// the pose rotation carries plane u, axis_v plane v, the third column the
/// slice normal; thickness is the physical slab depth along the normal.
struct PlaneFrame {
  int nu{0}, nv{0};
  double su{1.0}, sv{1.0};
  double thickness{1.0};  // mm
  RigidPose pose;         // plane (u_mm, v_mm, 0) -> world mm

  PlaneFrame() = default;
  PlaneFrame(int nu_, int nv_, double su_, double sv_, double thickness_, RigidPose pose_)
      : nu(nu_), nv(nv_), su(su_), sv(sv_), thickness(thickness_), pose(pose_) {
    if (su <= 0 || sv <= 0 || thickness <= 0)
      throw ConfigError("PlaneFrame: spacing and thickness must be positive");
    if (pose.rotation.orthonormality_error() > 1e-9 || pose.rotation.det() < 0)
      throw ConfigError("PlaneFrame: pose rotation must be orthonormal with det +1");
  }

  Vec3d axis_u() const { return pose.rotation.col[0]; }
  Vec3d axis_v() const { return pose.rotation.col[1]; }
  Vec3d normal() const { return pose.rotation.col[2]; }

  Vec3d pixel_to_world(double i, double j) const {
    return pose * Vec3d{i * su, j * sv, 0.0};
  }
  /// World point expressed in plane coordinates (u_mm, v_mm, n_mm).
  Vec3d world_to_plane(const Vec3d& p) const { return pose.inverse() * p; }

  template <typename T>
  Grid2<T> make_grid(T fill = T{}) const {
    return Grid2<T>(nu, nv, su, sv, fill);
  }
};

/// Slice geometry plus its pixel payload.
struct Slice {
  PlaneFrame frame;
  Image2D image;
  Mask2D mask;  // ground-truth segmentation of the slice
};

}  // namespace planerecon
