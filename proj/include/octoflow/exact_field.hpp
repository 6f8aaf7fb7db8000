#pragma once

/// Exact arithmetic in Q(sqrt2) and 2x2 matrices over it.

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace octoflow {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class Sign { neg = -1, zero = 0, pos = 1 };
enum class Embedding { phi1, phi2 };

inline int sign_of(const Rational& r) { return r.sign(); }

/// a + b*sqrt2 with rational a, b.
class QSqrt2 {
  Rational a_{0};
  Rational b_{0};

 public:
  QSqrt2() = default;
  QSqrt2(long long a) : a_(a) {}  // NOLINT(google-explicit-constructor)
  QSqrt2(Rational a) : a_(std::move(a)) {}  // NOLINT(google-explicit-constructor)
  QSqrt2(Rational a, Rational b) : a_(std::move(a)), b_(std::move(b)) {}

  static QSqrt2 sqrt2() { return {Rational(0), Rational(1)}; }
  static QSqrt2 frac(long long p, long long q, long long r = 0, long long s = 1) {
    return {Rational(p) / q, Rational(r) / s};
  }

  const Rational& a() const { return a_; }
  const Rational& b() const { return b_; }
  bool is_rational() const { return b_ == 0; }
  bool is_zero() const { return a_ == 0 && b_ == 0; }

  /// a^2 - 2b^2.
  Rational norm() const { return a_ * a_ - 2 * b_ * b_; }
  QSqrt2 galois() const { return {a_, -b_}; }

  QSqrt2 operator-() const { return {-a_, -b_}; }
  QSqrt2& operator+=(const QSqrt2& y) { a_ += y.a_; b_ += y.b_; return *this; }
  QSqrt2& operator-=(const QSqrt2& y) { a_ -= y.a_; b_ -= y.b_; return *this; }
  QSqrt2& operator*=(const QSqrt2& y) {
    Rational a = a_ * y.a_ + 2 * b_ * y.b_;
    Rational b = a_ * y.b_ + b_ * y.a_;
    a_ = std::move(a);
    b_ = std::move(b);
    return *this;
  }
  QSqrt2& operator/=(const QSqrt2& y) {
    if (y.is_zero()) throw std::domain_error("QSqrt2: division by zero");
    Rational n = y.norm();
    *this *= y.galois();
    a_ /= n;
    b_ /= n;
    return *this;
  }
  QSqrt2 inverse() const { return QSqrt2(1) /= *this; }

  friend QSqrt2 operator+(QSqrt2 x, const QSqrt2& y) { return x += y; }
  friend QSqrt2 operator-(QSqrt2 x, const QSqrt2& y) { return x -= y; }
  friend QSqrt2 operator*(QSqrt2 x, const QSqrt2& y) { return x *= y; }
  friend QSqrt2 operator/(QSqrt2 x, const QSqrt2& y) { return x /= y; }
  friend bool operator==(const QSqrt2& x, const QSqrt2& y) { return x.a_ == y.a_ && x.b_ == y.b_; }

  /// Real value under phi1 (sqrt2 > 0) or phi2 (sqrt2 < 0). The smaller of
  /// a +- b sqrt2 is recovered from the exact norm to avoid cancellation.
  double embed(Embedding which = Embedding::phi1) const {
    const double r2 = std::sqrt(2.0);
    const int sa = a_.sign();
    const int sb = which == Embedding::phi1 ? b_.sign() : -b_.sign();
    const double ad = a_.convert_to<double>();
    const double bd = b_.convert_to<double>();
    const double bs = which == Embedding::phi1 ? bd : -bd;
    if (sa == 0 || sb == 0 || sa == sb) return ad + bs * r2;
    const double other = ad - bs * r2;
    return norm().convert_to<double>() / other;
  }

  Sign sign() const {
    const int sa = a_.sign();
    const int sb = b_.sign();
    if (sb == 0) return static_cast<Sign>(sa);
    if (sa == 0) return static_cast<Sign>(sb);
    if (sa == sb) return static_cast<Sign>(sa);
    const Rational lhs = a_ * a_;
    const Rational rhs = 2 * b_ * b_;
    const int c = lhs.compare(rhs);
    if (c == 0) return Sign::zero;
    return static_cast<Sign>(c > 0 ? sa : sb);
  }

  friend std::strong_ordering operator<=>(const QSqrt2& x, const QSqrt2& y) {
    const Sign s = (x - y).sign();
    if (s == Sign::neg) return std::strong_ordering::less;
    if (s == Sign::pos) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  /// Largest integer n with n <= x under phi1.
  Integer floor() const {
    double approx = std::floor(embed());
    Integer n(static_cast<long long>(approx));
    while (QSqrt2(Rational(n)) > *this) --n;
    while (QSqrt2(Rational(n + 1)) <= *this) ++n;
    return n;
  }

  std::string str() const;
  static QSqrt2 parse(std::string_view text);
};

inline QSqrt2 galois(const QSqrt2& x) { return x.galois(); }
inline double embed(const QSqrt2& x, Embedding which) { return x.embed(which); }
inline Sign exact_sign(const QSqrt2& x) { return x.sign(); }

/// Square root of a non-negative rational when it is rational.
inline std::optional<Rational> rational_sqrt(const Rational& r) {
  if (r < 0) return std::nullopt;
  const Integer p = numerator(r), q = denominator(r);
  const Integer sp = boost::multiprecision::sqrt(p), sq = boost::multiprecision::sqrt(q);
  if (sp * sp != p || sq * sq != q) return std::nullopt;
  return Rational(sp, sq);
}

/// Non-negative square root inside Q(sqrt2), if one exists.
inline std::optional<QSqrt2> exact_sqrt(const QSqrt2& x) {
  if (x.sign() == Sign::neg) return std::nullopt;
  if (x.is_zero()) return QSqrt2(0);
  // (p + q sqrt2)^2 = p^2 + 2 q^2 + 2 p q sqrt2
  const auto n = rational_sqrt(x.norm());
  if (!n) return std::nullopt;
  const std::array<Rational, 2> squares{Rational((x.a() + *n) / 2), Rational((x.a() - *n) / 2)};
  for (const Rational& p2 : squares) {
    const auto p = rational_sqrt(p2);
    if (!p) continue;
    QSqrt2 cand = p->is_zero() ? QSqrt2(0) : QSqrt2(*p, Rational(x.b() / (2 * *p)));
    if (p->is_zero()) {
      const auto q = rational_sqrt(Rational(x.a() / 2));
      if (!q) continue;
      cand = QSqrt2(Rational(0), *q);
    }
    if (cand.sign() == Sign::neg) cand = -cand;
    if (cand * cand == x) return cand;
  }
  return std::nullopt;
}

inline std::string rational_str(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

/// "p/q + r/s*sqrt2"
inline std::string QSqrt2::str() const {
  return rational_str(a_) + " + " + rational_str(b_) + "*sqrt2";
}

namespace detail {
inline Rational parse_rational(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) throw std::invalid_argument("QSqrt2: empty rational");
  auto slash = s.find('/');
  try {
    if (slash == std::string_view::npos) return Rational(Integer(std::string(s)));
    Integer p(std::string(s.substr(0, slash)));
    Integer q(std::string(s.substr(slash + 1)));
    if (q == 0) throw std::domain_error("QSqrt2: zero denominator");
    return Rational(p, q);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("QSqrt2: malformed rational '" + std::string(s) + "'");
  }
}
}  // namespace detail

inline QSqrt2 QSqrt2::parse(std::string_view text) {
  auto star = text.find("*sqrt2");
  if (star == std::string_view::npos) return {detail::parse_rational(text), Rational(0)};
  auto plus = text.rfind(" + ", star);
  if (plus == std::string_view::npos) return {Rational(0), detail::parse_rational(text.substr(0, star))};
  return {detail::parse_rational(text.substr(0, plus)),
          detail::parse_rational(text.substr(plus + 3, star - plus - 3))};
}

inline std::ostream& operator<<(std::ostream& os, const QSqrt2& x) { return os << x.str(); }

enum class ConjClass { identity, elliptic, parabolic, hyperbolic, reflection };

inline const char* to_string(ConjClass c) {
  switch (c) {
    case ConjClass::identity: return "identity";
    case ConjClass::elliptic: return "elliptic";
    case ConjClass::parabolic: return "parabolic";
    case ConjClass::hyperbolic: return "hyperbolic";
    case ConjClass::reflection: return "reflection";
  }
  return "?";
}

/// Row-major 2x2 matrix over Q(sqrt2).
struct ExactMat {
  std::array<QSqrt2, 4> e{QSqrt2(1), QSqrt2(0), QSqrt2(0), QSqrt2(1)};

  ExactMat() = default;
  ExactMat(QSqrt2 e11, QSqrt2 e12, QSqrt2 e21, QSqrt2 e22)
      : e{std::move(e11), std::move(e12), std::move(e21), std::move(e22)} {}

  static ExactMat identity() { return {}; }

  const QSqrt2& operator()(int i, int j) const { return e[2 * i + j]; }
  QSqrt2& operator()(int i, int j) { return e[2 * i + j]; }

  QSqrt2 trace() const { return e[0] + e[3]; }
  QSqrt2 det() const { return e[0] * e[3] - e[1] * e[2]; }

  ExactMat transpose() const { return {e[0], e[2], e[1], e[3]}; }
  ExactMat galois() const { return {e[0].galois(), e[1].galois(), e[2].galois(), e[3].galois()}; }

  ExactMat inverse() const {
    QSqrt2 d = det();
    if (d.is_zero()) throw std::domain_error("ExactMat: singular matrix");
    return {e[3] / d, -e[1] / d, -e[2] / d, e[0] / d};
  }

  friend ExactMat operator*(const ExactMat& m, const ExactMat& n) {
    return {m.e[0] * n.e[0] + m.e[1] * n.e[2], m.e[0] * n.e[1] + m.e[1] * n.e[3],
            m.e[2] * n.e[0] + m.e[3] * n.e[2], m.e[2] * n.e[1] + m.e[3] * n.e[3]};
  }
  friend ExactMat operator*(const QSqrt2& c, const ExactMat& m) {
    return {c * m.e[0], c * m.e[1], c * m.e[2], c * m.e[3]};
  }
  friend bool operator==(const ExactMat&, const ExactMat&) = default;

  ExactMat operator-() const { return {-e[0], -e[1], -e[2], -e[3]}; }

  bool is_scalar_identity() const {
    return e[1].is_zero() && e[2].is_zero() && e[0] == e[3] && (e[0] == QSqrt2(1) || e[0] == QSqrt2(-1));
  }

  ExactMat pow(long long k) const {
    ExactMat base = k < 0 ? inverse() : *this;
    unsigned long long n = k < 0 ? static_cast<unsigned long long>(-k) : static_cast<unsigned long long>(k);
    ExactMat acc;
    while (n) {
      if (n & 1ULL) acc = acc * base;
      n >>= 1ULL;
      if (n) base = base * base;
    }
    return acc;
  }

  std::array<double, 4> embed(Embedding which = Embedding::phi1) const {
    return {e[0].embed(which), e[1].embed(which), e[2].embed(which), e[3].embed(which)};
  }

  /// Exact conjugacy type under phi1; +-I count as identity.
  ConjClass classify() const {
    QSqrt2 d = det();
    if (d == QSqrt2(-1)) return ConjClass::reflection;
    if (d != QSqrt2(1)) throw std::domain_error("ExactMat::classify: determinant is not +-1");
    if (is_scalar_identity()) return ConjClass::identity;
    QSqrt2 tr = trace();
    switch ((tr * tr - QSqrt2(4)).sign()) {
      case Sign::neg: return ConjClass::elliptic;
      case Sign::zero: return ConjClass::parabolic;
      case Sign::pos: return ConjClass::hyperbolic;
    }
    return ConjClass::identity;
  }
};

inline ExactMat galois(const ExactMat& m) { return m.galois(); }

}  // namespace octoflow
