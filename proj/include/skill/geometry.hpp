#pragma once

#include <cmath>
#include <stdexcept>

namespace skill {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }

  Vec3 normalized() const {
    double n = norm();
    if (n == 0.0) throw std::domain_error("cannot normalize zero vector");
    return {x / n, y / n, z / n};
  }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Unit quaternion, Hamilton convention, scalar-first (w, x, y, z).
struct Quat {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  Quat normalized() const {
    double n = norm();
    if (n == 0.0) throw std::domain_error("cannot normalize zero quaternion");
    return {w / n, x / n, y / n, z / n};
  }

  Quat conjugate() const { return {w, -x, -y, -z}; }

  /// Inverse of a unit quaternion (equals the conjugate).
  Quat inverse() const { return conjugate(); }

  /// Hamilton product this * o.
  Quat operator*(const Quat& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z,
            w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x,
            w * o.z + x * o.y - y * o.x + z * o.w};
  }

  /// Sign canonicalization: w >= 0, ties broken toward the first
  /// nonzero component being positive.
  Quat canonical() const {
    if (w > 0.0) return *this;
    if (w < 0.0) return {-w, -x, -y, -z};
    if (x != 0.0) return x > 0.0 ? *this : Quat{-w, -x, -y, -z};
    if (y != 0.0) return y > 0.0 ? *this : Quat{-w, -x, -y, -z};
    return z >= 0.0 ? *this : Quat{-w, -x, -y, -z};
  }

  /// Rotate a vector by this (unit) quaternion: q v q^-1.
  Vec3 rotate(const Vec3& v) const {
    Quat p{0.0, v.x, v.y, v.z};
    Quat r = (*this) * p * conjugate();
    return {r.x, r.y, r.z};
  }

  static Quat from_axis_angle(const Vec3& axis, double angle) {
    Vec3 a = axis.normalized();
    double h = 0.5 * angle;
    double s = std::sin(h);
    return {std::cos(h), a.x * s, a.y * s, a.z * s};
  }

  static Quat identity() { return {1.0, 0.0, 0.0, 0.0}; }
};

struct Pose {
  Vec3 position;
  Quat orientation = Quat::identity();

  /// Compose: this applied after placing `local` in this frame.
  Pose compose(const Pose& local) const {
    return {position + orientation.rotate(local.position),
            (orientation * local.orientation).normalized()};
  }

  /// Express a world pose in this frame.
  Pose inverse_compose(const Pose& world) const {
    Quat inv = orientation.inverse();
    return {inv.rotate(world.position - position),
            (inv * world.orientation).normalized()};
  }
};

/// Smallest rotation angle (radians) taking a to b.
inline double quat_angle(const Quat& a, const Quat& b) {
  double d = std::abs(a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z);
  if (d > 1.0) d = 1.0;
  return 2.0 * std::acos(d);
}

/// Heading of the rotated x-axis in the xy-plane.
inline double yaw_of(const Quat& q) {
  Vec3 v = q.rotate({1.0, 0.0, 0.0});
  return std::atan2(v.y, v.x);
}

}  // namespace skill
