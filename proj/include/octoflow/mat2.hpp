#pragma once

/// Small real 2x2 linear algebra used by the numeric side of the library.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace octoflow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
  friend Vec2 operator*(double c, Vec2 v) { return {c * v.x, c * v.y}; }
  friend Vec2 operator+(Vec2 u, Vec2 v) { return {u.x + v.x, u.y + v.y}; }
  friend Vec2 operator-(Vec2 u, Vec2 v) { return {u.x - v.x, u.y - v.y}; }
  friend double dot(Vec2 u, Vec2 v) { return u.x * v.x + u.y * v.y; }
  friend double cross(Vec2 u, Vec2 v) { return u.x * v.y - u.y * v.x; }
};

/// Row-major [[a, b], [c, d]].
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static Mat2 identity() { return {}; }
  static Mat2 from(const std::array<double, 4>& e) { return {e[0], e[1], e[2], e[3]}; }

  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }
  double frob2() const { return a * a + b * b + c * c + d * d; }
  Mat2 transpose() const { return {a, c, b, d}; }
  Mat2 inverse() const {
    const double D = det();
    if (D == 0.0) throw std::domain_error("Mat2: singular matrix");
    return {d / D, -b / D, -c / D, a / D};
  }
  Mat2 operator-() const { return {-a, -b, -c, -d}; }

  friend Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d, m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
  }
  friend Vec2 operator*(const Mat2& m, Vec2 v) { return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y}; }
  friend Mat2 operator*(double s, const Mat2& m) { return {s * m.a, s * m.b, s * m.c, s * m.d}; }
  friend Mat2 operator+(const Mat2& m, const Mat2& n) { return {m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d}; }
  friend Mat2 operator-(const Mat2& m, const Mat2& n) { return {m.a - n.a, m.b - n.b, m.c - n.c, m.d - n.d}; }

  double max_abs_diff(const Mat2& n) const {
    return std::fmax(std::fmax(std::fabs(a - n.a), std::fabs(b - n.b)), std::fmax(std::fabs(c - n.c), std::fabs(d - n.d)));
  }

  /// Largest singular value.
  double spectral_norm() const {
    const double f = frob2();
    const double D = det();
    const double disc = std::fmax(f * f - 4.0 * D * D, 0.0);
    return std::sqrt((f + std::sqrt(disc)) / 2.0);
  }
};

inline Mat2 geodesic(double t) { return {std::exp(t), 0.0, 0.0, std::exp(-t)}; }
inline Mat2 horocycle(double s) { return {1.0, s, 0.0, 1.0}; }
inline Mat2 opposite_horocycle(double r) { return {1.0, 0.0, r, 1.0}; }
inline Mat2 rotation(double theta) {
  return {std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta)};
}

/// M = rotation(phi) * diag(s1, s2) * rotation(theta), s1 >= |s2|.
struct Svd2 {
  double phi = 0.0;
  double theta = 0.0;
  double s1 = 1.0;
  double s2 = 1.0;

  /// Input direction that is contracted most.
  Vec2 contracted_input() const { return {std::sin(theta), std::cos(theta)}; }
  /// Input direction that is expanded most.
  Vec2 expanded_input() const { return {std::cos(theta), -std::sin(theta)}; }
  /// Image direction of the most expanded input.
  Vec2 expanded_output() const { return {std::cos(phi), std::sin(phi)}; }
};

inline Svd2 svd(const Mat2& m) {
  const double E = (m.a + m.d) / 2.0, F = (m.a - m.d) / 2.0;
  const double G = (m.c + m.b) / 2.0, H = (m.c - m.b) / 2.0;
  const double Q = std::hypot(E, H), R = std::hypot(F, G);
  const double a1 = std::atan2(G, F), a2 = std::atan2(H, E);
  return {(a2 + a1) / 2.0, (a2 - a1) / 2.0, Q + R, Q - R};
}

/// Angle of a line in [0, pi).
inline double line_angle(Vec2 v) {
  double t = std::atan2(v.y, v.x);
  if (t < 0) t += std::numbers::pi;
  if (t >= std::numbers::pi) t -= std::numbers::pi;
  return t;
}

/// |sin| of the angle between two lines.
inline double line_sin(Vec2 u, Vec2 v) { return std::fabs(cross(u, v)) / (u.norm() * v.norm()); }

/// Matrix with an accumulated log-scale: value = exp(log_scale) * m.
struct ScaledMat {
  Mat2 m;
  double log_scale = 0.0;

  void normalize() {
    const double n = m.spectral_norm();
    if (n > 0.0 && std::isfinite(n)) {
      m = (1.0 / n) * m;
      log_scale += std::log(n);
    }
  }
  double log_norm() const { return log_scale + std::log(m.spectral_norm()); }
  friend ScaledMat operator*(const ScaledMat& x, const ScaledMat& y) {
    ScaledMat r{x.m * y.m, x.log_scale + y.log_scale};
    r.normalize();
    return r;
  }
};

inline ScaledMat scaled_power(const Mat2& m, unsigned long long k) {
  ScaledMat base{m, 0.0};
  base.normalize();
  ScaledMat acc;
  while (k) {
    if (k & 1ULL) acc = acc * base;
    k >>= 1ULL;
    if (k) base = base * base;
  }
  return acc;
}

}  // namespace octoflow
