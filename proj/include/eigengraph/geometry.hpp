#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace eg {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

inline double dist2(const Vec3& a, const Vec3& b) { return norm2(a - b); }

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{};

  double& operator()(std::size_t r, std::size_t c) { return m[3 * r + c]; }
  double operator()(std::size_t r, std::size_t c) const { return m[3 * r + c]; }

  static Mat3 identity() {
    Mat3 a;
    a(0, 0) = a(1, 1) = a(2, 2) = 1.0;
    return a;
  }

  Vec3 col(std::size_t c) const { return {m[c], m[3 + c], m[6 + c]}; }
  Vec3 row(std::size_t r) const { return {m[3 * r], m[3 * r + 1], m[3 * r + 2]}; }

  void set_col(std::size_t c, const Vec3& v) {
    m[c] = v[0];
    m[3 + c] = v[1];
    m[6 + c] = v[2];
  }
};

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      r(i, j) = s;
    }
  return r;
}

inline Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {a(0, 0) * v[0] + a(0, 1) * v[1] + a(0, 2) * v[2],
          a(1, 0) * v[0] + a(1, 1) * v[1] + a(1, 2) * v[2],
          a(2, 0) * v[0] + a(2, 1) * v[1] + a(2, 2) * v[2]};
}

inline Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) r(i, j) = a(j, i);
  return r;
}

inline double det(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

inline double max_abs(const Mat3& a) {
  double m = 0.0;
  for (double x : a.m) m = std::max(m, std::abs(x));
  return m;
}

// Ordered list of 3D positions. Index i addresses exactly one point and all
// operations preserve order.
struct PointCloud {
  std::vector<Vec3> points;

  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> pts) : points(std::move(pts)) {}

  std::size_t size() const { return points.size(); }
  const Vec3& operator[](std::size_t i) const { return points[i]; }
  Vec3& operator[](std::size_t i) { return points[i]; }

  bool operator==(const PointCloud&) const = default;
};

inline bool is_finite(const PointCloud& cloud) {
  for (const Vec3& p : cloud.points)
    for (double c : p)
      if (!std::isfinite(c)) return false;
  return true;
}

// N >= 1 and every coordinate finite.
inline void validate(const PointCloud& cloud) {
  if (cloud.size() == 0) throw data_error("point cloud is empty");
  if (!is_finite(cloud)) throw data_error("point cloud contains non-finite coordinates");
}

struct RigidTransform {
  Mat3 rotation = Mat3::identity();
  Vec3 translation{0.0, 0.0, 0.0};

  // R^T R = I within tol per entry and det(R) = 1 within tol.
  bool is_valid(double tol = 1e-12) const {
    const Mat3 should_be_identity = transpose(rotation) * rotation;
    const Mat3 eye = Mat3::identity();
    for (std::size_t i = 0; i < 9; ++i)
      if (std::abs(should_be_identity.m[i] - eye.m[i]) > tol) return false;
    return std::abs(det(rotation) - 1.0) <= tol;
  }
};

// Applying `first` then `second`.
inline RigidTransform compose(const RigidTransform& second, const RigidTransform& first) {
  RigidTransform t;
  t.rotation = second.rotation * first.rotation;
  t.translation = second.rotation * first.translation + second.translation;
  return t;
}

inline RigidTransform inverse(const RigidTransform& t) {
  RigidTransform r;
  r.rotation = transpose(t.rotation);
  r.translation = -1.0 * (r.rotation * t.translation);
  return r;
}

// Output point i = R * x_i + translation; order preserved.
inline PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.points.push_back(t.rotation * p + t.translation);
  return out;
}

inline Mat3 rotation_x(double a) {
  Mat3 r = Mat3::identity();
  const double c = std::cos(a), s = std::sin(a);
  r(1, 1) = c;
  r(1, 2) = -s;
  r(2, 1) = s;
  r(2, 2) = c;
  return r;
}

inline Mat3 rotation_y(double a) {
  Mat3 r = Mat3::identity();
  const double c = std::cos(a), s = std::sin(a);
  r(0, 0) = c;
  r(0, 2) = s;
  r(2, 0) = -s;
  r(2, 2) = c;
  return r;
}

inline Mat3 rotation_z(double a) {
  Mat3 r = Mat3::identity();
  const double c = std::cos(a), s = std::sin(a);
  r(0, 0) = c;
  r(0, 1) = -s;
  r(1, 0) = s;
  r(1, 1) = c;
  return r;
}

// Z: rotation about the z axis, angle uniform in [0, 2*pi).
// EulerXYZ: Rz(a) * Ry(b) * Rx(c) with three independent uniform angles.
enum class RotationAxes { Z, EulerXYZ };

inline const char* to_string(RotationAxes axes) {
  return axes == RotationAxes::Z ? "z" : "euler-xyz";
}

inline RigidTransform random_rotation(RotationAxes axes, std::uint64_t seed) {
  Rng rng(seed);
  constexpr double two_pi = 6.283185307179586476925286766559;
  RigidTransform t;
  if (axes == RotationAxes::Z) {
    t.rotation = rotation_z(rng.uniform(0.0, two_pi));
  } else {
    const double a = rng.uniform(0.0, two_pi);
    const double b = rng.uniform(0.0, two_pi);
    const double c = rng.uniform(0.0, two_pi);
    t.rotation = rotation_z(a) * rotation_y(b) * rotation_x(c);
  }
  return t;
}

// Centroid to the origin, maximum point norm to 1. An all-coincident cloud
// maps to all zeros.
inline PointCloud normalize_unit_sphere(const PointCloud& cloud) {
  if (cloud.size() == 0) throw invalid_argument("normalize_unit_sphere: cloud is empty");
  Vec3 centroid{0.0, 0.0, 0.0};
  for (const Vec3& p : cloud.points) centroid = centroid + p;
  centroid = (1.0 / double(cloud.size())) * centroid;

  PointCloud out;
  out.points.reserve(cloud.size());
  double max_norm = 0.0;
  for (const Vec3& p : cloud.points) {
    const Vec3 q = p - centroid;
    out.points.push_back(q);
    max_norm = std::max(max_norm, norm(q));
  }
  const double scale = max_norm > 0.0 ? 1.0 / max_norm : 0.0;
  for (Vec3& q : out.points) q = scale * q;
  return out;
}

// Per-coordinate Gaussian noise with stddev sigma, clamped to [-clip, clip].
inline PointCloud jitter(const PointCloud& cloud, double sigma, double clip,
                         std::uint64_t seed) {
  if (sigma < 0.0) throw invalid_argument("jitter: sigma must be >= 0 (sigma=" +
                                          std::to_string(sigma) + ")");
  if (clip <= 0.0) throw invalid_argument("jitter: clip must be > 0 (clip=" +
                                          std::to_string(clip) + ")");
  if (sigma == 0.0) return cloud;
  Rng rng(seed);
  PointCloud out = cloud;
  for (Vec3& p : out.points)
    for (double& c : p) {
      const double d = std::clamp(sigma * rng.normal(), -clip, clip);
      c += d;
    }
  return out;
}

}  // namespace eg
