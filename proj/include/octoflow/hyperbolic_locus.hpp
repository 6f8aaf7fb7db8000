#pragma once

/// The unit-area octagon locus as SL(2,R)/Gamma. A point is a frame g with
/// associated hyperbolic point z = g^{-1} p0, p0 = 2i. Flows act by left
/// multiplication; reduction right-multiplies by Gamma until z lies in the
/// Dirichlet domain D0 of p0, whose four faces are paired by T^{+-1}, R^{+-1}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "mat2.hpp"
#include "veech_octagon.hpp"

namespace octoflow {

using Complex = std::complex<double>;

struct LocusPoint {
  Mat2 frame;
  GroupWord word;  ///< accumulated right multiplications
  bool certified = false;
  bool tie = false;  ///< a face-pairing neighbour is within tolerance: point on the boundary of D0
};

enum class FlowKind { geodesic, horocycle, opposite_horocycle, rotation };

inline Mat2 flow_element(FlowKind kind, double p) {
  switch (kind) {
    case FlowKind::geodesic: return geodesic(p);
    case FlowKind::horocycle: return horocycle(p);
    case FlowKind::opposite_horocycle: return opposite_horocycle(p);
    case FlowKind::rotation: return rotation(p);
  }
  return {};
}

inline const char* to_string(FlowKind k) {
  switch (k) {
    case FlowKind::geodesic: return "geodesic";
    case FlowKind::horocycle: return "horocycle";
    case FlowKind::opposite_horocycle: return "opposite_horocycle";
    case FlowKind::rotation: return "rotation";
  }
  return "?";
}

struct FlowStep {
  FlowKind kind = FlowKind::geodesic;
  double param = 0.0;
};

/// Geometry of the fundamental domain: face-pairing generators and cusps.
class FundamentalDomain {
 public:
  struct Pairing {
    const char* name;
    GroupWord word;
    Mat2 m;
  };
  struct Cusp {
    Complex point;  ///< finite cusp representative
    double width;   ///< translation length after sending the cusp to infinity
    GroupWord word;  ///< primitive parabolic fixing the cusp
    Mat2 to_inf;     ///< z -> -1/(z - point)
    double shift = 0.0;  ///< the parabolic conjugated by to_inf is sign * [[1, shift], [0, 1]]
    double sign = 1.0;

    /// Numeric k-th power of the parabolic.
    Mat2 power(long long k) const {
      const double sg = (k % 2 == 0) ? 1.0 : sign;
      return sg * (to_inf.inverse() * Mat2{1.0, static_cast<double>(k) * shift, 0.0, 1.0} * to_inf);
    }
  };

  static const FundamentalDomain& get() {
    static const FundamentalDomain fd;
    return fd;
  }

  double lambda() const { return lambda_; }
  const std::vector<Pairing>& pairings() const { return pairings_; }
  const std::vector<Cusp>& finite_cusps() const { return cusps_; }

  /// cosh of the distance from p0 to M p0.
  static double cosh_dist(const Mat2& m) {
    return (m.a * m.a + 0.25 * m.b * m.b + 4.0 * m.c * m.c + m.d * m.d) / 2.0;
  }

  static Complex point_of(const Mat2& g) {
    // g^{-1} = [[d, -b], [-c, a]] applied to 2i
    const Complex num(-g.b, 2.0 * g.d), den(g.a, -2.0 * g.c);
    return num / den;
  }

  /// cosh of the hyperbolic distance between two points of the upper half-plane.
  static double cosh_between(Complex z, Complex w) {
    return 1.0 + std::norm(z - w) / (2.0 * z.imag() * w.imag());
  }

  static Complex mobius(const Mat2& m, Complex z) { return (m.a * z + m.b) / (m.c * z + m.d); }

  /// Normalized cusp height: maximum over the cusp representatives of D0.
  double height(Complex z) const {
    double h = z.imag() / lambda_;
    for (const auto& c : cusps_) h = std::max(h, z.imag() / (std::norm(z - c.point) * c.width));
    return h;
  }

  bool contains(Complex z, double tol = 1e-12) const {
    if (z.imag() <= 0) return false;
    const double c0 = cosh_between(z, p0());
    for (const auto& p : pairings_) {
      const Complex q = mobius(p.m, p0());
      if (cosh_between(z, q) < c0 * (1.0 - tol)) return false;
    }
    return true;
  }

  /// Hyperbolic area of D0 by Gauss-Bonnet: two (4, inf, inf) triangles.
  static double area() { return 1.5 * std::numbers::pi; }

  static Complex p0() { return {0.0, 2.0}; }

 private:
  FundamentalDomain() {
    const ExactMat t = eval_word(cusp_word());
    lambda_ = t(0, 1).embed(Embedding::phi1);
    const GroupWord T = cusp_word(), R = rotation_word();
    pairings_ = {{"T", T, eval_word_numeric(T)},
                 {"T^-1", T.inverse(), eval_word_numeric(T.inverse())},
                 {"R", R, eval_word_numeric(R)},
                 {"R^-1", R.inverse(), eval_word_numeric(R.inverse())}};
    // R^{-1} T is parabolic; its fixed point and the translate by T are the
    // finite ideal vertices of D0.
    const Mat2 par = eval_word_numeric(R.inverse() * T);
    // c z^2 + (d - a) z - b = 0 with a double root
    const double xi = (par.a - par.d) / (2.0 * par.c);
    for (double x : {xi, xi + lambda_}) {
      const Mat2 s{0.0, -1.0, 1.0, -x};
      const GroupWord w = x == xi ? R.inverse() * T : T * R.inverse() * T * T.inverse();
      const Mat2 conj = s * eval_word_numeric(w) * s.inverse();
      Cusp c{Complex(x, 0.0), std::fabs(conj.b / conj.a), w, s};
      c.sign = conj.a < 0 ? -1.0 : 1.0;
      c.shift = conj.b / conj.a;
      cusps_.push_back(c);
    }
  }

  double lambda_ = 0.0;
  std::vector<Pairing> pairings_;
  std::vector<Cusp> cusps_;
};

inline double point_height(const Mat2& g) {
  const auto& fd = FundamentalDomain::get();
  return fd.height(FundamentalDomain::point_of(g));
}

struct ReduceOptions {
  double tol = 1e-12;
  int max_steps = 10000;
  bool track_word = true;  ///< when false the returned word is empty
};

/// Right-multiplies by face-pairing generators while the distance from
/// frame * gamma * p0 to p0 strictly decreases; then fixes the sign so that
/// the larger entry of the first row is positive, recording -I as rho^4.
inline LocusPoint reduce(const Mat2& frame, const ReduceOptions& opt = {}) {
  const double det = frame.det();
  if (!(std::fabs(det - 1.0) < 1e-6)) throw std::domain_error("reduce: frame determinant is not 1");
  const auto& fd = FundamentalDomain::get();
  LocusPoint out;
  Mat2 m = (1.0 / std::sqrt(det)) * frame;
  double cur = FundamentalDomain::cosh_dist(m);
  int steps = 0;
  for (;; ++steps) {
    if (steps > opt.max_steps) throw std::runtime_error("reduce: no termination within step bound");
    int best = -1;
    double best_c = cur;
    bool tie = false;
    for (int i = 0; i < static_cast<int>(fd.pairings().size()); ++i) {
      const double c = FundamentalDomain::cosh_dist(m * fd.pairings()[i].m);
      if (c < cur * (1.0 - opt.tol)) {
        if (best >= 0 && std::fabs(c - best_c) <= opt.tol * cur) tie = true;
        if (c < best_c - opt.tol * cur || best < 0) {
          best = i;
          best_c = c;
        }
      }
    }
    if (best < 0) break;
    out.tie = out.tie || tie;
    // near a finite cusp the greedy walk spirals one parabolic at a time; jump instead
    bool jumped = false;
    for (const auto& c : fd.finite_cusps()) {
      const Complex zeta = FundamentalDomain::mobius(c.to_inf, FundamentalDomain::point_of(m));
      const long long k = std::llround(zeta.real() / c.shift);
      if (std::llabs(k) < 2) continue;
      const Mat2 cand = m * c.power(k);
      const double cc = FundamentalDomain::cosh_dist(cand);
      if (!(cc < cur * (1.0 - opt.tol))) continue;
      m = cand;
      if (opt.track_word) out.word *= c.word.pow(k);
      cur = cc;
      jumped = true;
      break;
    }
    if (jumped) continue;
    if (best <= 1) {
      // translations commute, so take the whole run of T^{+-1} at once
      const double x = FundamentalDomain::point_of(m).real();
      const long long k = std::max(1LL, std::llround(std::fabs(x) / fd.lambda()));
      const Mat2 jump{1.0, (best == 0 ? 1.0 : -1.0) * static_cast<double>(k) * fd.lambda(), 0.0, 1.0};
      m = m * jump;
      if (opt.track_word) out.word *= fd.pairings()[best].word.pow(k);
      cur = FundamentalDomain::cosh_dist(m);
    } else {
      m = m * fd.pairings()[best].m;
      if (opt.track_word) out.word *= fd.pairings()[best].word;
      cur = best_c;
    }
    if ((steps & 63) == 63) m = (1.0 / std::sqrt(m.det())) * m;
  }
  for (const auto& p : fd.pairings())
    if (std::fabs(FundamentalDomain::cosh_dist(m * p.m) - cur) <= opt.tol * cur) out.tie = true;
  const double lead = std::fabs(m.a) >= std::fabs(m.b) ? m.a : m.b;
  if (lead < 0) {
    m = -m;
    if (opt.track_word) out.word *= minus_identity_word();
  }
  out.frame = m;
  out.certified = true;
  return out;
}

struct Advance {
  LocusPoint point;
  GroupWord step_word;  ///< reduction words produced along the way
};

/// Step length bound for one flow kind at normalized height h.
inline double flow_step_bound(FlowKind kind, double h) {
  const double scale = 1.0 / std::max(1.0, h);
  switch (kind) {
    case FlowKind::geodesic: return 0.05 * scale;
    case FlowKind::horocycle: return 0.2 * scale;
    case FlowKind::opposite_horocycle: return 0.05 * scale;
    case FlowKind::rotation: return 0.05 * scale;
  }
  return 0.05 * scale;
}

/// Flows a reduced point by small steps, re-reducing after each one.
inline Advance advance(const LocusPoint& x, FlowKind kind, double param, const ReduceOptions& opt = {}) {
  Advance out{x, {}};
  out.point.word = x.word;
  double remaining = param;
  while (remaining != 0.0) {
    const double bound = flow_step_bound(kind, point_height(out.point.frame));
    const double dt = std::fabs(remaining) <= bound ? remaining : std::copysign(bound, remaining);
    remaining = std::fabs(remaining) <= bound ? 0.0 : remaining - dt;
    LocusPoint r = reduce(flow_element(kind, dt) * out.point.frame, opt);
    out.step_word *= r.word;
    out.point.frame = r.frame;
    out.point.tie = r.tie;
    out.point.certified = r.certified;
  }
  out.point.word *= out.step_word;
  return out;
}

inline LocusPoint flow(const LocusPoint& x, FlowKind kind, double param) { return advance(x, kind, param).point; }

/// Frame of omega1: conjugates the horizontal cusp parabolic to u_1.
inline Mat2 omega1_frame() {
  const double lam = FundamentalDomain::get().lambda();
  return {1.0 / std::sqrt(lam), 0.0, 0.0, std::sqrt(lam)};
}

inline LocusPoint omega1_point() { return reduce(omega1_frame()); }

/// Angle coordinate in [0, pi) of a frame relative to the standard frame at z.
inline double frame_angle(const Mat2& g) {
  const Complex z = FundamentalDomain::point_of(g);
  const double sy = std::sqrt(z.imag());
  const Mat2 az_inv{1.0 / sy, -z.real() / sy, 0.0, sy};
  const Mat2 p{std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0)};
  const Mat2 k = az_inv * g.inverse() * p;
  double th = std::atan2(k.c, k.a);
  th = std::fmod(th + 2.0 * std::numbers::pi, std::numbers::pi);
  return th;
}

/// Frame with point z and angle theta.
inline Mat2 frame_at(Complex z, double theta) {
  const double sy = std::sqrt(z.imag());
  const Mat2 az{sy, z.real() / sy, 0.0, 1.0 / sy};
  const Mat2 pinv{1.0 / std::sqrt(2.0), 0.0, 0.0, std::sqrt(2.0)};
  return (az * rotation(theta) * pinv).inverse();
}

struct FlowBoxCoords {
  double u_hat = 0.0;
  double a = 0.0;
  double u = 0.0;
};

/// y = uhat_{u_hat} g_a u_u.
inline FlowBoxCoords flowbox_split(const Mat2& y) {
  if (!(y.a > 0.0)) throw std::domain_error("flowbox_split: outside the product chart");
  return {y.c / y.a, std::log(y.a), y.b / y.a};
}

inline Mat2 flowbox_compose(const FlowBoxCoords& c) {
  return opposite_horocycle(c.u_hat) * geodesic(c.a) * horocycle(c.u);
}

/// d/ds of e^{-2t} s / (1 + s r).
inline double weak_stable_holonomy_jacobian(double t, double r, double s) {
  const double q = 1.0 + s * r;
  if (!(q > 0.0)) throw std::domain_error("weak_stable_holonomy_jacobian: 1 + s r must be positive");
  return std::exp(-2.0 * t) / (q * q);
}

/// Frobenius norm of log(A) for A in SL(2,R) near the identity.
inline double log_norm_near_identity(const Mat2& A) {
  const double h = A.trace() / 2.0;
  Mat2 X = A - Mat2::identity();
  double f = 1.0;
  if (h > 1.0 + 1e-14) {
    const double mu = std::acosh(h);
    X = A - h * Mat2::identity();
    f = mu / std::sinh(mu);
  } else if (h < 1.0 - 1e-14 && h > -1.0) {
    const double mu = std::acos(h);
    X = A - h * Mat2::identity();
    f = mu / std::sin(mu);
  }
  return f * std::sqrt(X.frob2());
}

/// Distance in a right-invariant metric between frames g and h of nearby points.
inline double local_distance(const Mat2& g, const Mat2& h) { return log_norm_near_identity(g * h.inverse()); }

/// Haar samples on D0 truncated at normalized cusp height y_max.
class HaarSampler {
 public:
  explicit HaarSampler(double y_max = 50.0) : y_max_(y_max) {
    const auto& fd = FundamentalDomain::get();
    y_hi_ = fd.lambda() * y_max;
    double lo = FundamentalDomain::p0().imag();
    for (const auto& c : fd.finite_cusps()) {
      const double r = 1.0 / (2.0 * c.width * y_max);
      for (int k = 1; k < 20000; ++k) {
        const double th = std::numbers::pi * k / 20000.0;
        const Complex z = c.point + Complex(r * std::sin(th), r * (1.0 - std::cos(th)));
        if (fd.contains(z, 0.0)) lo = std::min(lo, z.imag());
      }
    }
    y_lo_ = 0.9 * lo;
  }

  double y_max() const { return y_max_; }
  /// Area of the sampling box in the hyperbolic metric.
  double box_area() const { return FundamentalDomain::get().lambda() * (1.0 / y_lo_ - 1.0 / y_hi_); }
  /// Hyperbolic area above height y_max in the two cusps.
  double truncated_area() const { return 2.0 / y_max_; }

  template <class Rng>
  bool try_point(Rng& rng, Complex& z) const {
    const auto& fd = FundamentalDomain::get();
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double x = (U(rng) - 0.5) * fd.lambda();
    const double inv = 1.0 / y_hi_ + U(rng) * (1.0 / y_lo_ - 1.0 / y_hi_);
    z = Complex(x, 1.0 / inv);
    return fd.contains(z, 0.0) && fd.height(z) <= y_max_;
  }

  template <class Rng>
  Mat2 sample(Rng& rng, std::uint64_t* attempts = nullptr) const {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Complex z;
    std::uint64_t n = 0;
    do ++n; while (!try_point(rng, z));
    if (attempts) *attempts += n;
    return frame_at(z, 2.0 * std::numbers::pi * U(rng));
  }

 private:
  double y_max_, y_lo_ = 0, y_hi_ = 0;
};

inline std::vector<LocusPoint> haar_sample(std::size_t n, std::uint64_t seed, double y_max = 50.0) {
  HaarSampler s(y_max);
  std::mt19937_64 rng(seed);
  std::vector<LocusPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(reduce(s.sample(rng)));
  return out;
}

}  // namespace octoflow
