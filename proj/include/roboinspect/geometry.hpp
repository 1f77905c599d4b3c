#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "roboinspect/error.hpp"

namespace roboinspect {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  constexpr Vec3 operator+(const Vec3& o) const noexcept { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const noexcept { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const noexcept { return {x * s, y * s, z * s}; }
  constexpr double operator[](int i) const noexcept { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double dot(const Vec3& o) const noexcept { return x * o.x + y * o.y + z * o.z; }
  constexpr Vec3 cross(const Vec3& o) const noexcept {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const noexcept { return std::sqrt(dot(*this)); }
  Vec3 normalized() const noexcept {
    double n = norm();
    return n > 0 ? (*this) * (1.0 / n) : Vec3{};
  }

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Unit quaternion (w, x, y, z).
struct Quat {
  double w = 1, x = 0, y = 0, z = 0;

  static Quat about_z(double degrees) noexcept {
    double half = degrees * std::numbers::pi / 360.0;
    return {std::cos(half), 0, 0, std::sin(half)};
  }

  constexpr Quat operator*(const Quat& o) const noexcept {
    return {w * o.w - x * o.x - y * o.y - z * o.z, w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x, w * o.z + x * o.y - y * o.x + z * o.w};
  }
  constexpr Quat conjugate() const noexcept { return {w, -x, -y, -z}; }
  double norm() const noexcept { return std::sqrt(w * w + x * x + y * y + z * z); }
  Quat normalized() const noexcept {
    double n = norm();
    return {w / n, x / n, y / n, z / n};
  }
  Vec3 rotate(const Vec3& v) const noexcept {
    Quat p{0, v.x, v.y, v.z};
    Quat r = (*this) * p * conjugate();
    return {r.x, r.y, r.z};
  }

  friend bool operator==(const Quat&, const Quat&) = default;
};

inline double angle_between(const Vec3& a, const Vec3& b) noexcept {
  double na = a.norm(), nb = b.norm();
  if (na == 0 || nb == 0) return 0;
  double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return std::acos(c);
}

/// Axis-aligned box given by center and half-extents.
struct Box {
  Vec3 center;
  Vec3 half;

  constexpr Vec3 min() const noexcept { return center - half; }
  constexpr Vec3 max() const noexcept { return center + half; }

  constexpr bool contains(const Vec3& p, double eps = 1e-9) const noexcept {
    return std::abs(p.x - center.x) <= half.x + eps && std::abs(p.y - center.y) <= half.y + eps &&
           std::abs(p.z - center.z) <= half.z + eps;
  }

  constexpr bool contains(const Box& inner) const noexcept {
    for (int i = 0; i < 3; ++i) {
      if (inner.min()[i] < min()[i] - 1e-12 || inner.max()[i] > max()[i] + 1e-12) return false;
    }
    return true;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Entry parameter t in [0,1] at which segment a->b first meets the box, if it does.
inline std::optional<double> segment_hits_box(const Vec3& a, const Vec3& b, const Box& box) noexcept {
  double t0 = 0.0, t1 = 1.0;
  Vec3 d = b - a;
  Vec3 lo = box.min(), hi = box.max();
  for (int i = 0; i < 3; ++i) {
    double di = d[i], ai = a[i];
    if (std::abs(di) < 1e-15) {
      if (ai < lo[i] || ai > hi[i]) return std::nullopt;
      continue;
    }
    double ta = (lo[i] - ai) / di, tb = (hi[i] - ai) / di;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return t0;
}

/// Executable (reachable) box and the strictly larger perception box.
struct WorkspaceBounds {
  Box executable{{0, 0, 50}, {50, 50, 50}};
  Box perception{{0, 0, 50}, {150, 150, 150}};

  void validate() const {
    for (int i = 0; i < 3; ++i) {
      if (!(executable.half[i] > 0) || !(perception.half[i] > 0))
        throw Error(Errc::ConfigError, "workspace half-extents must be positive");
    }
    if (!perception.contains(executable))
      throw Error(Errc::ConfigError, "executable box must lie inside the perception box");
    bool strict = false;
    for (int i = 0; i < 3; ++i) {
      if (executable.min()[i] > perception.min()[i] || executable.max()[i] < perception.max()[i]) strict = true;
    }
    if (!strict) throw Error(Errc::ConfigError, "perception box must strictly contain the executable box");
  }

  /// Full extents of the executable box, as quoted in condition-level instructions.
  Vec3 executable_extents() const noexcept { return executable.half * 2.0; }

  friend bool operator==(const WorkspaceBounds&, const WorkspaceBounds&) = default;
};

/// Shortest decimal that round-trips, with integral values printed without a fraction.
inline std::string format_number(double v) {
  if (v == 0) return "0";
  if (std::abs(v) < 1e15 && std::floor(v) == v) {
    return std::to_string(static_cast<long long>(v));
  }
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

/// "(100, 100, 100)"
inline std::string format_tuple(const Vec3& v) {
  return "(" + format_number(v.x) + ", " + format_number(v.y) + ", " + format_number(v.z) + ")";
}

}  // namespace roboinspect
