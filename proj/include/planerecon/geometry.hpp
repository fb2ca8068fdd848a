#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>

namespace planerecon {

template <typename T>
struct Vec2 {
  T x{0}, y{0};

  Vec2() = default;
  Vec2(T x_, T y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(T s) const { return {x * s, y * s}; }
  Vec2 operator/(T s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  T dot(const Vec2& o) const { return x * o.x + y * o.y; }
  T norm2() const { return x * x + y * y; }
  T norm() const { return std::sqrt(norm2()); }
};

template <typename T>
struct Vec3 {
  T x{0}, y{0}, z{0};

  Vec3() = default;
  Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(T s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(T s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  Vec3& operator*=(T s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
  T dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  T norm2() const { return x * x + y * y + z * z; }
  T norm() const { return std::sqrt(norm2()); }
  Vec3 normalized() const {
    T n = norm();
    return n > T(0) ? *this / n : Vec3{};
  }
  template <typename U>
  Vec3<U> cast() const {
    return {static_cast<U>(x), static_cast<U>(y), static_cast<U>(z)};
  }
};

using Vec2d = Vec2<double>;
using Vec2f = Vec2<float>;
using Vec3d = Vec3<double>;
using Vec3f = Vec3<float>;
using Vec3i = Vec3<int>;

template <typename T>
inline Vec3<T> operator*(T s, const Vec3<T>& v) {
  return v * s;
}
template <typename T>
inline std::ostream& operator<<(std::ostream& os, const Vec3<T>& v) {
  return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

/// Column-major 3x3 matrix; columns are the images of the basis vectors.
struct Mat3 {
  // col[c] is column c
  std::array<Vec3d, 3> col{Vec3d{1, 0, 0}, Vec3d{0, 1, 0}, Vec3d{0, 0, 1}};

  static Mat3 identity() { return {}; }

  static Mat3 from_columns(const Vec3d& c0, const Vec3d& c1, const Vec3d& c2) {
    Mat3 m;
    m.col = {c0, c1, c2};
    return m;
  }

  /// Rotation about the world z axis by angle radians.
  static Mat3 rotation_z(double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return from_columns({c, s, 0}, {-s, c, 0}, {0, 0, 1});
  }

  Vec3d operator*(const Vec3d& v) const {
    return col[0] * v.x + col[1] * v.y + col[2] * v.z;
  }

  Mat3 operator*(const Mat3& o) const {
    return from_columns(*this * o.col[0], *this * o.col[1], *this * o.col[2]);
  }

  Mat3 transposed() const {
    return from_columns({col[0].x, col[1].x, col[2].x}, {col[0].y, col[1].y, col[2].y},
                        {col[0].z, col[1].z, col[2].z});
  }

  double det() const { return col[0].dot(col[1].cross(col[2])); }

  /// Max |R^T R - I| entry; zero for an orthonormal matrix.
  double orthonormality_error() const {
    Mat3 g = transposed() * (*this);
    double e = 0;
    for (int c = 0; c < 3; ++c) {
      e = std::max(e, std::abs(g.col[c].x - (c == 0 ? 1.0 : 0.0)));
      e = std::max(e, std::abs(g.col[c].y - (c == 1 ? 1.0 : 0.0)));
      e = std::max(e, std::abs(g.col[c].z - (c == 2 ? 1.0 : 0.0)));
    }
    return e;
  }
};

/// Rigid transform p -> R*p + t.
struct RigidPose {
  Mat3 rotation;
  Vec3d translation;

  Vec3d operator*(const Vec3d& p) const { return rotation * p + translation; }

  RigidPose inverse() const {
    Mat3 rt = rotation.transposed();
    return {rt, -(rt * translation)};
  }
};

/// Determinant of the matrix with columns c0, c1, c2.
inline double det3(const Vec3d& c0, const Vec3d& c1, const Vec3d& c2) {
  return c0.dot(c1.cross(c2));
}

}  // namespace planerecon
