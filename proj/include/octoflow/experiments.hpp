#pragma once

/// Monte-Carlo drivers over the periodic horocycle through omega1: cocycle
/// norm scans, equidistribution and recurrence, Bowen balls, matching of
/// pseudo-Anosov visits, and tremor avoidance of the locus.
///
/// Every driver is deterministic for a fixed seed and independent of the
/// worker count: samples are split into fixed chunks, each chunk draws from
/// its own generator seeded by (seed, chunk index), and results are merged
/// in index order.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hyperbolic_locus.hpp"
#include "kz_cocycle.hpp"
#include "surfaces_tremor.hpp"
#include "veech_octagon.hpp"

namespace octoflow {

inline constexpr std::size_t kChunk = 256;
/// Above this normalized height both cusp regions of D0 are embedded horoball
/// pieces, and the Haar law of the height is 2 dh / (area h^2).
inline constexpr double kCleanHeight = 0.6;

namespace detail {

inline std::mt19937_64 chunk_rng(std::uint64_t seed, std::size_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  return std::mt19937_64(seq);
}

/// Runs fn(chunk) for chunk in [0, n_chunks) on up to `workers` threads.
template <class F>
void parallel_chunks(std::size_t n_chunks, unsigned workers, F&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n_chunks, 1))));
  if (workers == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= n_chunks || failed.load()) return;
        try {
          fn(c);
        } catch (...) {
          if (!failed.exchange(true)) err = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

/// out[i] = f(i, rng) where rng is the generator of i's chunk, advanced in index order.
template <class T, class F>
std::vector<T> chunked_map(std::size_t n, std::uint64_t seed, unsigned workers, F&& f) {
  std::vector<T> out(n);
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  parallel_chunks(n_chunks, workers, [&](std::size_t c) {
    auto rng = chunk_rng(seed, c);
    const std::size_t hi = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < hi; ++i) out[i] = f(i, rng);
  });
  return out;
}

inline double bump(double u) { return std::fabs(u) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - u * u)) : 0.0; }

/// Distance on the circle R / pi Z.
inline double angle_gap(double a, double b) {
  const double d = std::fmod(std::fabs(a - b), std::numbers::pi);
  return std::min(d, std::numbers::pi - d);
}

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double std_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace detail

/// Stratified sample s_i = (i + U_i) / n of [0, 1].
inline std::vector<double> stratified_unit(std::size_t n, std::uint64_t seed, unsigned workers = 1) {
  return detail::chunked_map<double>(n, seed, workers, [n](std::size_t i, std::mt19937_64& rng) {
    return (static_cast<double>(i) + std::uniform_real_distribution<double>(0.0, 1.0)(rng)) / static_cast<double>(n);
  });
}

/// KZ(g_t, u_s omega1) in the marking of omega1: the reduction word of
/// u_s omega1 followed by the return words of the geodesic segment.
inline CocycleValue kz_push(double s, double t) {
  const LocusPoint x = reduce(horocycle(s) * omega1_frame());
  CocycleValue v;
  v.append(x.word);
  v.append(kz_geodesic(x, t).word);
  return v;
}

/// Reduced frame of g_t u_s omega1 without word bookkeeping.
inline Mat2 push_frame(double s, double t) {
  ReduceOptions opt;
  opt.track_word = false;
  return reduce(geodesic(t) * horocycle(s) * omega1_frame(), opt).frame;
}

// ---------------------------------------------------------------------------
// Histograms

struct Histogram {
  std::vector<double> edges;  ///< size bins + 1, increasing
  std::vector<double> mass;   ///< fraction of samples per bin
};

inline Histogram make_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw std::invalid_argument("make_histogram: bins must be positive");
  Histogram h;
  if (values.empty()) return h;
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  h.edges.resize(bins + 1);
  for (int k = 0; k <= bins; ++k) h.edges[k] = lo + (hi - lo) * k / bins;
  h.mass.assign(bins, 0.0);
  for (double v : values) {
    int k = static_cast<int>((v - lo) / (hi - lo) * bins);
    h.mass[std::clamp(k, 0, bins - 1)] += 1.0;
  }
  for (double& m : h.mass) m /= static_cast<double>(values.size());
  return h;
}

// ---------------------------------------------------------------------------
// Norm scan

struct ScanOptions {
  double tail = 0.01;  ///< threshold of the distribution function defining r0
  int bins = 64;
  unsigned workers = 1;
};

struct ScanReport {
  double t = 0;
  std::size_t n_samples = 0;
  double kappa = 0;
  double v_angle = 0;
  std::uint64_t seed = 0;
  double tail = 0;
  Histogram histogram;  ///< of log |KZ(g_t, u_s omega1) v|
  double log_r0 = 0;
  double log_C_t = 0;  ///< C_t = kappa r0
  double big = 0;      ///< mass of {|KZ v| >= C_t / kappa}
  double small = 0;    ///< mass of {|KZ v| < C_t kappa}
  double middle = 0;
  std::size_t big_count = 0, small_count = 0, middle_count = 0;
  double concentration = 0;  ///< sup_r mass{|KZ v| in [kappa r, r / kappa]}
  bool degenerate = false;   ///< all norms equal
  std::vector<double> log_norms;

  static constexpr double asymptotic_tail = 0.01;
  static constexpr double desk_tail = 0.005;
  static constexpr double desk_concentration = 0.995;
  double asymptotic_concentration() const { return 49.0 / 50.0 + kappa; }
  bool desk_pass() const {
    return big >= desk_tail && small >= desk_tail && concentration <= desk_concentration;
  }
};

/// Largest mass of a window of log-width `width` over sorted values.
inline double window_concentration(const std::vector<double>& sorted, double width) {
  double best = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    j = std::max(j, i);
    while (j < sorted.size() && sorted[j] <= sorted[i] + width) ++j;
    best = std::max(best, static_cast<double>(j - i));
  }
  return sorted.empty() ? 0.0 : best / static_cast<double>(sorted.size());
}

/// Fills the C_t statistics of a report from its log-norms.
inline void classify_norms(ScanReport& r) {
  std::vector<double> L = r.log_norms;
  std::sort(L.begin(), L.end());
  const std::size_t n = L.size();
  if (n == 0) return;
  r.degenerate = L.back() - L.front() < 1e-12;
  // r0 = sup{r : mass[r, inf) > tail}: the m-th largest value, m the least integer above tail n
  const double dn = static_cast<double>(n);
  std::size_t m = static_cast<std::size_t>(std::floor(r.tail * dn)) + 1;
  while (m > 1 && static_cast<double>(m - 1) / dn > r.tail) --m;
  while (m < n && !(static_cast<double>(m) / dn > r.tail)) ++m;
  r.log_r0 = L[n - m];
  const double lk = std::log(r.kappa);
  r.log_C_t = r.log_r0 + lk;
  // cuts C_t / kappa = r0 and C_t kappa = kappa^2 r0
  const double big_cut = r.log_r0, small_cut = r.log_r0 + 2.0 * lk;
  r.big_count = r.small_count = r.middle_count = 0;
  for (double x : L) {
    if (x >= big_cut)
      ++r.big_count;
    else if (x < small_cut)
      ++r.small_count;
    else
      ++r.middle_count;
  }
  r.big = static_cast<double>(r.big_count) / dn;
  r.small = static_cast<double>(r.small_count) / dn;
  r.middle = static_cast<double>(r.middle_count) / dn;
  r.concentration = window_concentration(L, -2.0 * lk);
}

inline ScanReport norm_scan(double t, const Direction& v, std::size_t n, double kappa, std::uint64_t seed,
                            const ScanOptions& opt = {}) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("norm_scan: t must be a finite number >= 0");
  if (n < 1000) throw std::invalid_argument("norm_scan: n must be at least 1000");
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("norm_scan: kappa must lie in (0,1)");
  if (!(opt.tail > 0.0 && opt.tail < 1.0)) throw std::invalid_argument("norm_scan: tail must lie in (0,1)");
  ScanReport r;
  r.t = t;
  r.n_samples = n;
  r.kappa = kappa;
  r.v_angle = v.angle;
  r.seed = seed;
  r.tail = opt.tail;
  const std::vector<double> s = stratified_unit(n, seed, opt.workers);
  const Vec2 u = v.unit();
  r.log_norms = detail::chunked_map<double>(n, seed, opt.workers, [&](std::size_t i, std::mt19937_64&) {
    return log_norm_and_vector(kz_push(s[i], t).numeric, u);
  });
  classify_norms(r);
  r.histogram = make_histogram(r.log_norms, opt.bins);
  return r;
}

// ---------------------------------------------------------------------------
// Equidistribution and recurrence

/// Smooth bump in the normalized height and the frame angle.
struct BumpSpec {
  bool constant = false;
  double height_center = 1.5;
  double height_width = 0.5;
  double angle_center = std::numbers::pi / 2;
  double angle_width = std::numbers::pi / 4;

  void validate() const {
    if (constant) return;
    if (!(height_width > 0.0) || !(angle_width > 0.0 && angle_width <= std::numbers::pi / 2))
      throw std::invalid_argument("BumpSpec: widths must be positive, angle width at most pi/2");
    if (height_center - height_width < kCleanHeight)
      throw std::invalid_argument("BumpSpec: support must lie above normalized height 0.6");
  }

  double operator()(const Mat2& frame) const {
    if (constant) return 1.0;
    const double h = point_height(frame);
    return detail::bump((h - height_center) / height_width) *
           detail::bump(detail::angle_gap(frame_angle(frame), angle_center) / angle_width);
  }
};

/// Haar average of the bump: 2 / area * int b(h) dh / h^2 times the angular mean.
inline double bump_haar_average(const BumpSpec& f, int nodes = 20000) {
  if (f.constant) return 1.0;
  f.validate();
  // midpoint rule; the integrands are smooth and compactly supported
  double I = 0, J = 0;
  for (int k = 0; k < nodes; ++k) {
    const double u = -1.0 + 2.0 * (k + 0.5) / nodes;
    const double h = f.height_center + f.height_width * u;
    I += detail::bump(u) / (h * h);
    J += detail::bump(u);
  }
  I *= 2.0 * f.height_width / nodes;
  J *= 2.0 * f.angle_width / nodes / std::numbers::pi;
  return 2.0 / FundamentalDomain::area() * I * J;
}

struct EquiReport {
  double t = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  BumpSpec f;
  double orbit_avg = 0, orbit_se = 0;
  double haar_avg = 0;                ///< exact
  double haar_mc = 0, haar_mc_se = 0;  ///< haar_sample estimate, for reference
  double deviation = 0;               ///< |orbit - haar| / haar
};

inline EquiReport equidistribution_test(double t, const BumpSpec& f, std::size_t n, std::uint64_t seed,
                                        unsigned workers = 1, std::size_t haar_n = 0) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("equidistribution_test: t must be >= 0");
  if (n == 0) throw std::invalid_argument("equidistribution_test: n must be positive");
  f.validate();
  EquiReport r;
  r.t = t;
  r.n = n;
  r.seed = seed;
  r.f = f;
  const auto s = stratified_unit(n, seed, workers);
  const auto vals = detail::chunked_map<double>(n, seed, workers, [&](std::size_t i, std::mt19937_64&) {
    return f(push_frame(s[i], t));
  });
  r.orbit_avg = detail::mean(vals);
  r.orbit_se = detail::std_error(vals);
  r.haar_avg = bump_haar_average(f);
  if (haar_n > 0) {
    std::vector<double> hv;
    for (const auto& p : haar_sample(haar_n, seed ^ 0x9e3779b97f4a7c15ULL)) hv.push_back(f(p.frame));
    r.haar_mc = detail::mean(hv);
    r.haar_mc_se = detail::std_error(hv);
  }
  r.deviation = std::fabs(r.orbit_avg - r.haar_avg) / r.haar_avg;
  return r;
}

/// Haar mass of {height > H}; exact above the clean height, else estimated.
inline double haar_height_tail(double H, std::size_t n_mc = 200000, std::uint64_t seed = 1) {
  if (H >= kCleanHeight) return 2.0 / (H * FundamentalDomain::area());
  HaarSampler hs;
  std::mt19937_64 rng(seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_mc; ++i) hits += point_height(hs.sample(rng)) > H;
  // the sampler truncates the cusps above its y_max, where every point counts
  const double trunc = hs.truncated_area() / FundamentalDomain::area();
  return (1.0 - trunc) * static_cast<double>(hits) / static_cast<double>(n_mc) + trunc;
}

struct RecurrenceRow {
  double t = 0;
  double fraction = 0;          ///< mass of s with height(g_t u_s omega1) > cut
  double mean_sqrt_height = 0;  ///< integrable proxy for the height function
};

struct RecurrenceReport {
  double height_cut = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double haar_tail_half = 0;  ///< Haar mass above cut / 2
  double bound = 0;           ///< 4 * haar_tail_half
  std::vector<RecurrenceRow> rows;
  bool bounded() const {
    return std::all_of(rows.begin(), rows.end(), [&](const RecurrenceRow& r) { return r.fraction <= bound; });
  }
};

inline RecurrenceReport recurrence_profile(const std::vector<double>& ts, double height_cut, std::size_t n,
                                           std::uint64_t seed, unsigned workers = 1) {
  if (!(height_cut > 0.0)) throw std::invalid_argument("recurrence_profile: height_cut must be positive");
  if (n == 0) throw std::invalid_argument("recurrence_profile: n must be positive");
  RecurrenceReport rep;
  rep.height_cut = height_cut;
  rep.n = n;
  rep.seed = seed;
  rep.haar_tail_half = std::isfinite(height_cut) ? haar_height_tail(height_cut / 2.0) : 0.0;
  rep.bound = 4.0 * rep.haar_tail_half;
  const auto s = stratified_unit(n, seed, workers);
  for (double t : ts) {
    if (!(t >= 0.0)) throw std::invalid_argument("recurrence_profile: times must be >= 0");
    const auto h = detail::chunked_map<double>(n, seed, workers, [&](std::size_t i, std::mt19937_64&) {
      return point_height(push_frame(s[i], t));
    });
    RecurrenceRow row{t, 0.0, 0.0};
    for (double x : h) {
      row.fraction += x > height_cut;
      row.mean_sqrt_height += std::sqrt(x);
    }
    row.fraction /= static_cast<double>(n);
    row.mean_sqrt_height /= static_cast<double>(n);
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Periodic orbits and Bowen balls

struct PeriodicOrbit {
  LocusPoint center;
  double period = 0;
  GroupWord word;
};

/// Closed geodesic through a frame g with g_l g = g M for the hyperbolic
/// element M = eval(word), l its period.
inline PeriodicOrbit periodic_orbit(const GroupWord& word) {
  const Mat2 t = eval_word_numeric(word);
  if (!(std::fabs(t.trace()) > 2.0)) throw std::domain_error("periodic_orbit: word is not hyperbolic");
  const Mat2 m = t.trace() < 0 ? -1.0 * t : t;
  const double ell = std::acosh(m.trace() / 2.0);
  const double lam = std::exp(ell);
  Vec2 v1{m.b, lam - m.a}, v2{m.b, 1.0 / lam - m.a};
  if (std::fabs(m.b) < 1e-12) {
    v1 = {lam - m.d, m.c};
    v2 = {1.0 / lam - m.d, m.c};
  }
  Mat2 Q{v1.x, v2.x, v1.y, v2.y};
  if (Q.det() < 0) Q = Mat2{-v1.x, v2.x, -v1.y, v2.y};
  Q = (1.0 / std::sqrt(Q.det())) * Q;
  return {reduce(Q.inverse()), ell, word};
}

/// Representative of frame x closest to the frame c, over words of length <= 2 in the face pairings.
inline Mat2 lift_near(const Mat2& x, const Mat2& c) {
  const auto& P = FundamentalDomain::get().pairings();
  Mat2 best = x;
  double bd = local_distance(x, c);
  auto consider = [&](const Mat2& y) {
    const double d = local_distance(y, c);
    if (d < bd) {
      bd = d;
      best = y;
    }
  };
  for (const auto& p : P) {
    consider(x * p.m);
    consider(-1.0 * (x * p.m));
    for (const auto& q : P) consider(x * p.m * q.m);
  }
  consider(-1.0 * x);
  return best;
}

struct BowenBall {
  LocusPoint center;
  double period = 0;  ///< window length
  double radius = 0;

  /// r-grid of step at most radius / 4.
  std::vector<double> grid() const {
    const int k = std::max(1, static_cast<int>(std::ceil(period / (radius / 4.0))));
    std::vector<double> out(k + 1);
    for (int i = 0; i <= k; ++i) out[i] = period * i / k;
    return out;
  }

  /// Bowen distance of the group element h = x c^{-1} near the identity.
  double bowen_distance(const Mat2& h) const {
    double d = 0;
    for (double r : grid()) d = std::max(d, log_norm_near_identity(geodesic(r) * h * geodesic(-r)));
    return d;
  }

  bool contains(const Mat2& frame) const {
    const Mat2 y = lift_near(frame, center.frame);
    if (local_distance(y, center.frame) > radius) return false;
    return bowen_distance(y * center.frame.inverse()) <= radius;
  }
};

/// Density of Haar measure in the chart h = uhat_X g_a u_Y is e^{2a}; this is
/// the constant converting dX da dY at the identity to the probability
/// measure (area of D0 times the angle range pi, in frame coordinates).
inline double chart_to_probability() {
  // d(z, theta) / d(X, a, Y) at the identity for the frame map g -> (g^{-1} p0, angle)
  const double e = 1e-6;
  const Mat2 id = Mat2::identity();
  auto coords = [&](const Mat2& g) {
    const Complex z = FundamentalDomain::point_of(g);
    double th = frame_angle(g) - frame_angle(id);
    th = std::remainder(th, std::numbers::pi);
    return std::array<double, 3>{z.real(), z.imag(), th};
  };
  const std::array<Mat2, 3> dirs{opposite_horocycle(e), geodesic(e), horocycle(e)};
  double J[3][3];
  const auto c0 = coords(id);
  for (int j = 0; j < 3; ++j) {
    const auto c = coords(dirs[j]);
    for (int i = 0; i < 3; ++i) J[i][j] = (c[i] - c0[i]) / e;
  }
  const double det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                     J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                     J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
  const double y0 = FundamentalDomain::p0().imag();
  return std::fabs(det) / (y0 * y0) / (FundamentalDomain::area() * std::numbers::pi);
}

struct DoublingReport {
  double radius = 0;
  double window = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double mass = 0;       ///< Haar probability of B(center, window, radius)
  double mass_half = 0;  ///< same for radius / 2
  std::size_t hits = 0, hits_half = 0;
  double ratio() const { return mass_half > 0 ? mass / mass_half : std::numeric_limits<double>::infinity(); }
};

/// Monte-Carlo masses of the Bowen balls of radius rho and rho/2 about the
/// periodic orbit, sampled in the chart uhat_X g_a u_Y around its center.
inline DoublingReport bowen_doubling(const PeriodicOrbit& orbit, double rho, std::size_t n, std::uint64_t seed,
                                     double window = -1.0, unsigned workers = 1) {
  if (!(rho > 0.0 && rho < 0.5)) throw std::invalid_argument("bowen_doubling: radius must lie in (0, 0.5)");
  DoublingReport rep;
  rep.radius = rho;
  rep.window = window > 0 ? window : orbit.period;
  rep.n = n;
  rep.seed = seed;
  const BowenBall big{orbit.center, rep.window, rho};
  // the Bowen ball lies in |X| <= rho, |a| <= rho, |Y| <= rho e^{-2 window}, up to second order
  const double bx = 1.5 * rho, ba = 1.5 * rho, by = 1.5 * rho * std::exp(-2.0 * rep.window);
  struct Hit {
    double w = 0, w_half = 0;
    int in = 0, in_half = 0;
  };
  const auto hits = detail::chunked_map<Hit>(n, seed, workers, [&](std::size_t, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const FlowBoxCoords c{bx * U(rng), ba * U(rng), by * U(rng)};
    const Mat2 h = flowbox_compose(c);
    Hit out;
    const double d = big.bowen_distance(h);
    if (d <= rho) {
      out.in = 1;
      out.w = std::exp(2.0 * c.a);
    }
    if (d <= rho / 2.0) {
      out.in_half = 1;
      out.w_half = std::exp(2.0 * c.a);
    }
    return out;
  });
  double w = 0, wh = 0;
  for (const auto& h : hits) {
    w += h.w;
    wh += h.w_half;
    rep.hits += h.in;
    rep.hits_half += h.in_half;
  }
  const double box = 8.0 * bx * ba * by / static_cast<double>(n) * chart_to_probability();
  rep.mass = w * box;
  rep.mass_half = wh * box;
  return rep;
}

// ---------------------------------------------------------------------------
// Matching of pseudo-Anosov visits

struct Visit {
  double s = 0;
  double tau = 0;
};

struct MatchingReport {
  double eps = 0, eps2 = 0, t = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool conclusive = false;
  std::string note;
  double window_a = 0, window_b = 0;  ///< Bowen windows used
  double period_a = 0, period_b = 0;  ///< periods of the pair
  double pair_ratio = 0;              ///< |sigma(a)| / |sigma(b)| of the pair
  std::size_t visits_a = 0, visits_b = 0;
  double visit_freq_a = 0, visit_freq_b = 0;  ///< fraction of (s, tau) grid points inside
  double haar_mass_a = 0, haar_mass_b = 0;
  std::size_t matched = 0;
  std::vector<double> log_ratios;  ///< log(|KZ(g_t,u_{s_b})v| / |KZ(g_t,u_{s_a})v|) per matched pair
  Histogram ratio_histogram;
  double c_tilde = 1.0;
  double fraction_below = 0;  ///< of ratios below c_tilde * eps
};

/// Greedy injective matching of visits with |s_a - s_b| <= eps2 e^{-2 tau} / 1000 (tau of the a-visit).
inline std::vector<std::pair<std::size_t, std::size_t>> match_visits(const std::vector<Visit>& a,
                                                                    const std::vector<Visit>& b, double eps2) {
  std::vector<std::size_t> ib(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) ib[i] = i;
  std::sort(ib.begin(), ib.end(), [&](std::size_t x, std::size_t y) { return b[x].s < b[y].s; });
  std::vector<bool> used(b.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double tol = eps2 * std::exp(-2.0 * a[i].tau) / 1000.0;
    auto it = std::lower_bound(ib.begin(), ib.end(), a[i].s - tol, [&](std::size_t k, double v) { return b[k].s < v; });
    std::optional<std::size_t> best;
    double bd = std::numeric_limits<double>::infinity();
    for (; it != ib.end() && b[*it].s <= a[i].s + tol; ++it) {
      if (used[*it]) continue;
      const double d = std::fabs(b[*it].s - a[i].s);
      if (d < bd) {
        bd = d;
        best = *it;
      }
    }
    if (best) {
      used[*best] = true;
      out.emplace_back(i, *best);
    }
  }
  return out;
}

struct MatchingOptions {
  double window = -1.0;  ///< caps the Bowen windows; <= 0 uses the full periods of the pair
  double c_tilde = 1.0;
  std::size_t doubling_samples = 20000;
  unsigned workers = 1;
};

inline MatchingReport matching_demo(double eps, double eps2, double t, std::size_t n, std::uint64_t seed,
                                    const MatchingOptions& opt = {}) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("matching_demo: eps must lie in (0,1)");
  if (!(eps2 > 0.0 && eps2 < 0.5)) throw std::invalid_argument("matching_demo: eps2 must lie in (0,0.5)");
  if (!(t > 0.0) || n == 0) throw std::invalid_argument("matching_demo: t and n must be positive");
  MatchingReport rep;
  rep.eps = eps;
  rep.eps2 = eps2;
  rep.t = t;
  rep.n = n;
  rep.seed = seed;
  rep.c_tilde = opt.c_tilde;
  PseudoAnosovPair pr;
  try {
    pr = pseudo_anosov_pair(eps);
  } catch (const std::exception& e) {
    rep.note = std::string("no pseudo-Anosov pair: ") + e.what();
    return rep;
  }
  rep.period_a = pr.ell_a;
  rep.period_b = pr.ell_b;
  rep.pair_ratio = pr.ratio();
  const PeriodicOrbit oa = periodic_orbit(pr.word_a), ob = periodic_orbit(pr.word_b);
  rep.window_a = opt.window > 0 ? std::min(opt.window, pr.ell_a) : pr.ell_a;
  rep.window_b = opt.window > 0 ? std::min(opt.window, pr.ell_b) : pr.ell_b;
  const BowenBall ba{oa.center, rep.window_a, eps2}, bb{ob.center, rep.window_b, eps2};
  const double wmax = std::max(rep.window_a, rep.window_b);
  if (t <= wmax) {
    rep.note = "t does not exceed the Bowen window";
    return rep;
  }
  const double dtau = eps2 / 4.0;
  const auto s = stratified_unit(n, seed, opt.workers);
  struct Row {
    std::vector<Visit> a, b;
    std::size_t in_a = 0, in_b = 0, points = 0;
  };
  const auto rows = detail::chunked_map<Row>(n, seed, opt.workers, [&](std::size_t i, std::mt19937_64&) {
    Row row;
    LocusPoint y = reduce(horocycle(s[i]) * omega1_frame());
    bool prev_a = false, prev_b = false;
    for (double tau = 0.0; tau <= t - wmax; tau += dtau) {
      ++row.points;
      const bool ia = ba.contains(y.frame), ib = bb.contains(y.frame);
      row.in_a += ia;
      row.in_b += ib;
      if (ia && !prev_a) row.a.push_back({s[i], tau});
      if (ib && !prev_b) row.b.push_back({s[i], tau});
      prev_a = ia;
      prev_b = ib;
      y = flow(y, FlowKind::geodesic, dtau);
    }
    return row;
  });
  std::vector<Visit> va, vb;
  std::size_t in_a = 0, in_b = 0, pts = 0;
  for (const auto& r : rows) {
    va.insert(va.end(), r.a.begin(), r.a.end());
    vb.insert(vb.end(), r.b.begin(), r.b.end());
    in_a += r.in_a;
    in_b += r.in_b;
    pts += r.points;
  }
  rep.visits_a = va.size();
  rep.visits_b = vb.size();
  rep.visit_freq_a = pts ? static_cast<double>(in_a) / static_cast<double>(pts) : 0.0;
  rep.visit_freq_b = pts ? static_cast<double>(in_b) / static_cast<double>(pts) : 0.0;
  rep.haar_mass_a = bowen_doubling(oa, eps2, opt.doubling_samples, seed, rep.window_a, opt.workers).mass;
  rep.haar_mass_b = bowen_doubling(ob, eps2, opt.doubling_samples, seed + 1, rep.window_b, opt.workers).mass;
  if (va.empty() || vb.empty()) {
    rep.note = "no visits found for one of the balls";
    return rep;
  }
  const auto pairs = match_visits(va, vb, eps2);
  rep.matched = pairs.size();
  if (pairs.empty()) {
    rep.note = "visits found but none matched";
    return rep;
  }
  const Vec2 v0{0.0, 1.0};
  for (const auto& [i, j] : pairs) {
    const double la = log_norm_and_vector(kz_push(va[i].s, t).numeric, v0);
    const double lb = log_norm_and_vector(kz_push(vb[j].s, t).numeric, v0);
    rep.log_ratios.push_back(lb - la);
  }
  std::size_t below = 0;
  for (double lr : rep.log_ratios) below += lr < std::log(opt.c_tilde * eps);
  rep.fraction_below = static_cast<double>(below) / static_cast<double>(rep.log_ratios.size());
  rep.ratio_histogram = make_histogram(rep.log_ratios, 32);
  rep.conclusive = true;
  return rep;
}

// ---------------------------------------------------------------------------
// Tremor avoidance

/// Period point of g_t applied to a surface in the omega1 marking, moved to
/// the reduced chart of g_t u_s omega1 by the cocycle on the balanced plane.
inline std::array<double, 8> reduced_chart_point(const std::array<double, 8>& p, double t, const CocycleValue& kz) {
  std::array<double, 8> q = p;
  const double et = std::exp(t);
  for (int i = 0; i < 4; ++i) {
    q[i] *= et;
    q[4 + i] /= et;
  }
  const Mat2 M = std::exp(kz.numeric.log_scale) * kz.numeric.m;
  for (int comp = 0; comp < 2; ++comp) {
    const Vec2 b = M * Vec2{q[4 * comp + 2], q[4 * comp + 3]};
    q[4 * comp + 2] = b.x;
    q[4 * comp + 3] = b.y;
  }
  return q;
}

struct AvoidanceReport {
  double t = 0, rho = 0, kappa = 0;
  std::size_t n_s = 0, n_l = 0;
  std::uint64_t seed = 0;
  double log_C_t = 0;
  double ell_max = 0;  ///< e^{-t} / C_t
  // S_t branch
  std::size_t small_s = 0, small_points = 0, small_within = 0;
  double small_max_distance = 0;
  // B_t branch: mean over s in B_t of |{l : d(l) < delta}| / |I|
  std::size_t big_s = 0;
  std::vector<double> deltas;
  std::vector<double> occupancy;
  double linear_ratio_worst = 0;  ///< max over consecutive deltas of |occ(d)/occ(2d) / 0.5 - 1|
  bool s_branch_pass() const { return small_points > 0 && small_within == small_points; }
  bool b_branch_pass(double tol = 0.3) const { return big_s > 0 && linear_ratio_worst <= tol; }
};

inline AvoidanceReport avoidance_scan(double t, double rho, std::size_t n_s, std::size_t n_l, std::uint64_t seed,
                                      double kappa = 0.1, unsigned workers = 1,
                                      std::vector<double> deltas = {1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2, 3.2e-2, 6.4e-2, 1.28e-1}) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("avoidance_scan: t must be >= 0");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("avoidance_scan: rho must lie in (0,1)");
  if (n_s < 1000 || n_l < 2) throw std::invalid_argument("avoidance_scan: need n_s >= 1000 and n_l >= 2");
  AvoidanceReport rep;
  rep.t = t;
  rep.rho = rho;
  rep.kappa = kappa;
  rep.n_s = n_s;
  rep.n_l = n_l;
  rep.seed = seed;
  rep.deltas = deltas;

  const TwoCylinderSurface<double> w = omega1_surface().numeric();
  const TremorVector<double> sig = sigma_tremor(w);
  const Vec2 v = Vec2{0.0, 1.0};
  const auto s = stratified_unit(n_s, seed, workers);
  const auto kz = detail::chunked_map<CocycleValue>(n_s, seed, workers,
                                                    [&](std::size_t i, std::mt19937_64&) { return kz_push(s[i], t); });
  ScanReport scan;
  scan.kappa = kappa;
  scan.tail = 0.01;
  for (const auto& k : kz) scan.log_norms.push_back(log_norm_and_vector(k.numeric, v));
  classify_norms(scan);
  rep.log_C_t = scan.log_C_t;
  rep.ell_max = std::exp(-t - scan.log_C_t);

  const std::vector<std::array<double, 8>> taut{{1, 0, 0, 0, 0, 0, 0, 0}, {0, 1, 0, 0, 0, 0, 0, 0},
                                                {0, 0, 0, 0, 1, 0, 0, 0}, {0, 0, 0, 0, 0, 1, 0, 0}};
  const double lr = std::log(rho);
  std::vector<double> occ_sum(deltas.size(), 0.0);
  for (std::size_t i = 0; i < n_s; ++i) {
    const double ln = scan.log_norms[i];
    const bool is_small = ln < scan.log_C_t + lr, is_big = ln >= scan.log_C_t - lr;
    if (!is_small && !is_big) continue;
    const auto x = horocycle_act(w, s[i], Twist::lifted);
    const auto q0 = reduced_chart_point(period_point(period_coordinates(x)), t, kz[i]);
    if (is_small) {
      ++rep.small_s;
      for (std::size_t j = 0; j < n_l; ++j) {
        const double ell = rep.ell_max * (-1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(n_l - 1));
        const auto y = tremor_path(x, sig, ell, Twist::lifted);
        const double d = bal_part_norm(reduced_chart_point(period_point(period_coordinates(y)), t, kz[i]));
        ++rep.small_points;
        rep.small_within += d < 2.0 * rho;
        rep.small_max_distance = std::max(rep.small_max_distance, d);
      }
    } else {
      ++rep.big_s;
      const auto beta = reduced_chart_point(period_point(tremor_class(x, sig)), t, kz[i]);
      // the g_t scaling of the tremor direction is already in beta; l is the original parameter
      const Quadratic P = distance_polynomial(q0, beta, taut);
      for (std::size_t k = 0; k < deltas.size(); ++k)
        occ_sum[k] += sublevel_measure(P, -rep.ell_max, rep.ell_max, deltas[k] * deltas[k]) / (2.0 * rep.ell_max);
    }
  }
  rep.occupancy.resize(deltas.size());
  for (std::size_t k = 0; k < deltas.size(); ++k) rep.occupancy[k] = rep.big_s ? occ_sum[k] / rep.big_s : 0.0;
  rep.linear_ratio_worst = 0;
  for (std::size_t k = 0; k + 1 < deltas.size(); ++k) {
    if (!(rep.occupancy[k + 1] > 0)) {
      rep.linear_ratio_worst = std::numeric_limits<double>::infinity();
      break;
    }
    const double expect = deltas[k] / deltas[k + 1];
    rep.linear_ratio_worst = std::max(rep.linear_ratio_worst, std::fabs(rep.occupancy[k] / rep.occupancy[k + 1] / expect - 1.0));
  }
  return rep;
}

}  // namespace octoflow
