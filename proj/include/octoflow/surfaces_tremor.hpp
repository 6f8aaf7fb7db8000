#pragma once

/// Horizontally two-cylinder surfaces in the octagon's combinatorics,
/// cylinder tremors and period coordinates.
///
/// Homology basis of a two-cylinder surface: core curves alpha_a, alpha_b
/// and saddle connections beta_a, beta_b crossing one cylinder each, with
/// hol(alpha_i) = (c_i, 0) and hol(beta_i) = (tw_i, h_i).

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "exact_field.hpp"
#include "veech_octagon.hpp"

namespace octoflow {

namespace detail {

inline double to_double(double x) { return x; }
inline double to_double(const QSqrt2& x) { return x.embed(); }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

inline double wrap(double x, double c) { return x - c * std::floor(x / c); }
inline QSqrt2 wrap(const QSqrt2& x, const QSqrt2& c) { return x - c * QSqrt2(Rational((x / c).floor())); }

template <class T>
bool is_zero_value(const T& x) {
  if constexpr (std::is_same_v<T, double>) return x == 0.0;
  else return x == T(0);
}

/// Gauss-Jordan inverse; partial pivoting for doubles, first non-zero pivot otherwise.
template <class T, std::size_t N>
std::array<std::array<T, N>, N> invert(std::array<std::array<T, N>, N> a) {
  std::array<std::array<T, N>, N> inv{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) inv[i][j] = T(i == j ? 1 : 0);
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = N;
    if constexpr (std::is_same_v<T, double>) {
      double best = 0;
      for (std::size_t r = col; r < N; ++r)
        if (std::fabs(a[r][col]) > best) {
          best = std::fabs(a[r][col]);
          piv = r;
        }
      if (best < 1e-300) piv = N;
    } else {
      for (std::size_t r = col; r < N && piv == N; ++r)
        if (!is_zero_value(a[r][col])) piv = r;
    }
    if (piv == N) throw std::domain_error("invert: singular matrix");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const T p = a[col][col];
    for (std::size_t j = 0; j < N; ++j) {
      a[col][j] = a[col][j] / p;
      inv[col][j] = inv[col][j] / p;
    }
    for (std::size_t r = 0; r < N; ++r) {
      if (r == col || is_zero_value(a[r][col])) continue;
      const T f = a[r][col];
      for (std::size_t j = 0; j < N; ++j) {
        a[r][j] = a[r][j] - f * a[col][j];
        inv[r][j] = inv[r][j] - f * inv[col][j];
      }
    }
  }
  return inv;
}

}  // namespace detail

template <class S>
struct TwoCylinderSurface {
  S c_a, c_b;    ///< circumferences, c_a < c_b
  S h_a, h_b;    ///< heights
  S tw_a, tw_b;  ///< horizontal holonomy of beta_a, beta_b

  S area_a() const { return c_a * h_a; }
  S area_b() const { return c_b * h_b; }
  S area() const { return area_a() + area_b(); }

  /// Twists reduced to [0, c).
  TwoCylinderSurface wrapped() const {
    TwoCylinderSurface w = *this;
    w.tw_a = detail::wrap(tw_a, c_a);
    w.tw_b = detail::wrap(tw_b, c_b);
    return w;
  }

  TwoCylinderSurface<double> numeric() const {
    using detail::to_double;
    return {to_double(c_a), to_double(c_b), to_double(h_a), to_double(h_b), to_double(tw_a), to_double(tw_b)};
  }

  friend bool operator==(const TwoCylinderSurface& x, const TwoCylinderSurface& y) {
    return x.c_a == y.c_a && x.c_b == y.c_b && x.h_a == y.h_a && x.h_b == y.h_b && x.tw_a == y.tw_a &&
           x.tw_b == y.tw_b;
  }
};

/// Signed transverse measure w_a dy on cylinder a plus w_b dy on cylinder b.
template <class S>
struct TremorVector {
  S w_a, w_b;
  static TremorVector dy() { return {S(1), S(1)}; }
};

/// Holonomies of (alpha_a, alpha_b, beta_a, beta_b).
template <class S>
struct PeriodVector {
  std::array<std::array<S, 2>, 4> hol{};

  friend PeriodVector operator+(PeriodVector x, const PeriodVector& y) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 2; ++j) x.hol[i][j] = x.hol[i][j] + y.hol[i][j];
    return x;
  }
  friend PeriodVector operator-(PeriodVector x, const PeriodVector& y) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 2; ++j) x.hol[i][j] = x.hol[i][j] - y.hol[i][j];
    return x;
  }
  friend PeriodVector operator*(const S& s, PeriodVector x) {
    for (auto& v : x.hol)
      for (auto& e : v) e = s * e;
    return x;
  }
  friend bool operator==(const PeriodVector& x, const PeriodVector& y) { return x.hol == y.hol; }

  /// Values of one component (0 = x, 1 = y) on the basis.
  std::array<S, 4> component(int k) const { return {hol[0][k], hol[1][k], hol[2][k], hol[3][k]}; }
};

template <class S>
PeriodVector<S> period_coordinates(const TwoCylinderSurface<S>& x) {
  PeriodVector<S> p;
  p.hol[0] = {x.c_a, S(0)};
  p.hol[1] = {x.c_b, S(0)};
  p.hol[2] = {x.tw_a, x.h_a};
  p.hol[3] = {x.tw_b, x.h_b};
  return p;
}

/// Horizontal class of a tremor: zero on the core curves, w_i h_i across cylinder i.
template <class S>
PeriodVector<S> tremor_class(const TwoCylinderSurface<S>& x, const TremorVector<S>& t) {
  PeriodVector<S> p;
  for (auto& v : p.hol) v = {S(0), S(0)};
  p.hol[2][0] = t.w_a * x.h_a;
  p.hol[3][0] = t.w_b * x.h_b;
  return p;
}

enum class Twist { wrapped, lifted };

template <class S>
TwoCylinderSurface<S> horocycle_act(const TwoCylinderSurface<S>& x, const S& s, Twist mode = Twist::wrapped) {
  TwoCylinderSurface<S> y = x;
  y.tw_a = x.tw_a + s * x.h_a;
  y.tw_b = x.tw_b + s * x.h_b;
  return mode == Twist::wrapped ? y.wrapped() : y;
}

template <class S>
TwoCylinderSurface<S> tremor_path(const TwoCylinderSurface<S>& x, const TremorVector<S>& t, const S& ell,
                                  Twist mode = Twist::wrapped) {
  TwoCylinderSurface<S> y = x;
  y.tw_a = x.tw_a + ell * t.w_a * x.h_a;
  y.tw_b = x.tw_b + ell * t.w_b * x.h_b;
  return mode == Twist::wrapped ? y.wrapped() : y;
}

/// g_t with et = e^t: (c, h, tw) -> (e^t c, e^-t h, e^t tw).
template <class S>
TwoCylinderSurface<S> geodesic_act(const TwoCylinderSurface<S>& x, const S& et) {
  return {et * x.c_a, et * x.c_b, x.h_a / et, x.h_b / et, et * x.tw_a, et * x.tw_b};
}

/// Tremor vector with the same cohomology class after g_t: weights scale by e^t.
template <class S>
TremorVector<S> renormalized_tremor(const TremorVector<S>& t, const S& et) {
  return {et * t.w_a, et * t.w_b};
}

/// Right-hand side of g_t Trem_{x,tau}(l) = Trem_{g_t x, tau'}(e^t l).
template <class S>
TwoCylinderSurface<S> geodesic_renorm(const TwoCylinderSurface<S>& x, const TremorVector<S>& t, const S& et,
                                      const S& ell, Twist mode = Twist::wrapped) {
  return tremor_path(geodesic_act(x, et), renormalized_tremor(t, et), et * ell, mode);
}

/// Balanced cylinder tremor b chi_a dy - a chi_b dy.
template <class S>
TremorVector<S> sigma_tremor(const TwoCylinderSurface<S>& x) {
  return {x.area_b(), -x.area_a()};
}

/// Least s > 0 with s h_i in c_i Z for both cylinders.
inline QSqrt2 horocycle_period(const TwoCylinderSurface<QSqrt2>& x) {
  const QSqrt2 ma = x.c_a / x.h_a, mb = x.c_b / x.h_b;
  const QSqrt2 r = mb / ma;
  if (!r.is_rational() || r.sign() != Sign::pos)
    throw std::runtime_error("horocycle_period: cylinder moduli are not commensurable");
  // lcm(ma, mb) = ma * numerator(r)
  return ma * QSqrt2(Rational(numerator(r.a())));
}

/// Horizontal cylinders of the octagon surface read off the polygon: bands
/// between vertex heights, glued through the side identifications.
inline TwoCylinderSurface<QSqrt2> octagon_cylinders() {
  const OctagonPolygon poly = octagon_polygon();
  std::vector<QSqrt2> levels;
  for (const auto& v : poly.vert)
    if (std::find(levels.begin(), levels.end(), v[1]) == levels.end()) levels.push_back(v[1]);
  std::sort(levels.begin(), levels.end());
  const int nb = static_cast<int>(levels.size()) - 1;
  auto band_of = [&](const QSqrt2& y0, const QSqrt2& y1) {
    const QSqrt2 lo = std::min(y0, y1), hi = std::max(y0, y1);
    for (int b = 0; b < nb; ++b)
      if (levels[b] == lo && levels[b + 1] == hi) return b;
    throw std::runtime_error("octagon_cylinders: side spans several bands");
  };
  std::array<int, 8> side_band;
  for (int k = 0; k < 8; ++k) {
    const auto& p = poly.vert[k];
    const QSqrt2 y1 = p[1] + poly.side[k][1];
    side_band[k] = poly.side[k][1].is_zero() ? -1 : band_of(p[1], y1);
  }
  std::vector<int> parent(nb);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int b) {
    while (parent[b] != b) b = parent[b];
    return b;
  };
  for (int k = 0; k < 4; ++k)
    if (side_band[k] >= 0) parent[find(side_band[k])] = find(side_band[k + 4]);

  // width of the convex polygon at mid-height of each band, from its two boundary sides
  std::vector<QSqrt2> width(nb, QSqrt2(0));
  for (int k = 0; k < 8; ++k) {
    if (side_band[k] < 0) continue;
    const int b = side_band[k];
    const QSqrt2 ym = (levels[b] + levels[b + 1]) / QSqrt2(2);
    const auto& p = poly.vert[k];
    const QSqrt2 x = p[0] + poly.side[k][0] * ((ym - p[1]) / poly.side[k][1]);
    // counterclockwise: upward sides bound on the right, downward on the left
    width[b] += poly.side[k][1].sign() == Sign::pos ? x : -x;
  }

  struct Cyl {
    QSqrt2 c{0}, h{0}, tw{0};
    bool has_tw = false;
  };
  std::map<int, Cyl> cyl;
  for (int b = 0; b < nb; ++b) {
    Cyl& c = cyl[find(b)];
    const QSqrt2 h = levels[b + 1] - levels[b];
    if (!c.h.is_zero() && c.h != h) throw std::runtime_error("octagon_cylinders: bands of unequal height glued");
    c.h = h;
    c.c += width[b];
  }
  for (int k = 0; k < 8; ++k) {
    if (side_band[k] < 0 || poly.side[k][1].sign() != Sign::pos) continue;
    Cyl& c = cyl[find(side_band[k])];
    if (!c.has_tw) {
      c.tw = poly.side[k][0];
      c.has_tw = true;
    }
  }
  if (cyl.size() != 2) throw std::runtime_error("octagon_cylinders: expected two horizontal cylinders");
  Cyl a = cyl.begin()->second, b = std::next(cyl.begin())->second;
  if (b.c < a.c) std::swap(a, b);
  return {a.c, b.c, a.h, b.h, a.tw, b.tw};
}

/// The unit-area surface on the octagon locus with horocycle period 1.
inline TwoCylinderSurface<QSqrt2> omega1_surface() {
  const TwoCylinderSurface<QSqrt2> oct = octagon_cylinders();
  const QSqrt2 area = oct.area();
  const QSqrt2 period = horocycle_period(oct);
  // scale x by mu e^t and y by mu e^-t with mu^2 = 1/area and e^{2t} = 1/period
  const auto sx = exact_sqrt(QSqrt2(1) / (area * period));
  const auto sy = exact_sqrt(period / area);
  if (!sx || !sy) throw std::runtime_error("omega1_surface: scale factors leave Q(sqrt2)");
  TwoCylinderSurface<QSqrt2> w{*sx * oct.c_a, *sx * oct.c_b, *sy * oct.h_a,
                               *sy * oct.h_b, *sx * oct.tw_a, *sx * oct.tw_b};
  w = w.wrapped();
  if (w.area() != QSqrt2(1)) throw std::runtime_error("omega1_surface: area is not 1");
  if (horocycle_act(w, QSqrt2(1)) != w) throw std::runtime_error("omega1_surface: u_1 does not fix the surface");
  return w;
}

/// Cylinder basis in terms of the octagon curves c_k: row j gives the integer
/// coefficients of alpha_a, alpha_b, beta_a, beta_b, solved from holonomies.
inline std::array<std::array<Rational, 4>, 4> cylinder_basis_in_c() {
  const PairingData& pd = octagon_pairing();
  const PeriodVector<QSqrt2> cyl = period_coordinates(octagon_cylinders());
  // rational coordinates of a holonomy vector in Q^4
  auto flat = [](const std::array<QSqrt2, 2>& v) {
    return std::array<Rational, 4>{v[0].a(), v[0].b(), v[1].a(), v[1].b()};
  };
  std::array<std::array<Rational, 4>, 4> H;
  for (int k = 0; k < 4; ++k) {
    const auto f = flat(pd.holonomy[k]);
    for (int r = 0; r < 4; ++r) H[r][k] = f[r];
  }
  const auto Hinv = detail::invert(H);
  std::array<std::array<Rational, 4>, 4> M;
  for (int j = 0; j < 4; ++j) {
    const auto f = flat(cyl.hol[j]);
    for (int k = 0; k < 4; ++k) {
      Rational s = 0;
      for (int r = 0; r < 4; ++r) s += Hinv[k][r] * f[r];
      if (denominator(s) != 1) throw std::runtime_error("cylinder_basis_in_c: non-integral relation");
      M[j][k] = s;
    }
  }
  return M;
}

/// Intersection numbers of the cylinder basis.
inline std::array<std::array<int, 4>, 4> cylinder_intersection() {
  const auto M = cylinder_basis_in_c();
  const auto& J = octagon_pairing().intersection;
  std::array<std::array<int, 4>, 4> out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Rational s = 0;
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) s += M[i][k] * J[k][l] * M[j][l];
      out[i][j] = static_cast<int>(s.convert_to<long long>());
    }
  return out;
}

/// Values on the curves c_k of a class given by its values on the cylinder basis.
inline Covector to_octagon_covector(const std::array<QSqrt2, 4>& on_cylinders) {
  static const auto Minv = detail::invert(cylinder_basis_in_c());
  Covector c;
  for (int k = 0; k < 4; ++k) {
    QSqrt2 s(0);
    for (int j = 0; j < 4; ++j)
      if (Minv[k][j] != 0) s += QSqrt2(Minv[k][j]) * on_cylinders[j];
    c[k] = s;
  }
  return c;
}

/// Cup product of the x-components of two period vectors.
inline QSqrt2 cup(const PeriodVector<QSqrt2>& p, int kp, const PeriodVector<QSqrt2>& q, int kq) {
  return octagon_pairing().pair(to_octagon_covector(p.component(kp)), to_octagon_covector(q.component(kq)));
}

/// A horizontal tremor class is balanced at a locus surface x when it pairs
/// to zero with both components of hol(x).
inline bool is_balanced(const TwoCylinderSurface<QSqrt2>& x, const TremorVector<QSqrt2>& t) {
  const PeriodVector<QSqrt2> tau = tremor_class(x, t), hol = period_coordinates(x);
  return cup(tau, 0, hol, 0).is_zero() && cup(tau, 0, hol, 1).is_zero();
}

/// Coordinates of cohomology classes in the basis (dx0, dy0, dxbar0, dybar0)
/// of the octagon; this basis is declared orthonormal, which makes the
/// tautological and balanced planes orthogonal.
class CohomologyFrame {
 public:
  static const CohomologyFrame& get() {
    static const CohomologyFrame f;
    return f;
  }

  /// From values on the cylinder basis to frame coordinates.
  std::array<double, 4> coords(const std::array<double, 4>& on_cylinders) const {
    std::array<double, 4> out{};
    for (int m = 0; m < 4; ++m)
      for (int j = 0; j < 4; ++j) out[m] += K_[m][j] * on_cylinders[j];
    return out;
  }

  /// Exact counterpart of coords.
  std::array<QSqrt2, 4> coords_exact(const std::array<QSqrt2, 4>& on_cylinders) const {
    std::array<QSqrt2, 4> out;
    for (int m = 0; m < 4; ++m) {
      out[m] = QSqrt2(0);
      for (int j = 0; j < 4; ++j) out[m] += Kx_[m][j] * on_cylinders[j];
    }
    return out;
  }

 private:
  CohomologyFrame() {
    const PairingData& pd = octagon_pairing();
    // E[k][m] = value of basis class m on curve c_k; theta(c) = E x
    std::array<std::array<QSqrt2, 4>, 4> E;
    const std::array<const Covector*, 4> basis{&pd.dx, &pd.dy, &pd.dx_bal, &pd.dy_bal};
    for (int k = 0; k < 4; ++k)
      for (int m = 0; m < 4; ++m) E[k][m] = (*basis[m])[k];
    const auto Einv = detail::invert(E);
    const auto Minv = detail::invert(cylinder_basis_in_c());
    for (int m = 0; m < 4; ++m)
      for (int j = 0; j < 4; ++j) {
        QSqrt2 s(0);
        for (int k = 0; k < 4; ++k) s += Einv[m][k] * QSqrt2(Minv[k][j]);
        Kx_[m][j] = s;
        K_[m][j] = s.embed();
      }
  }
  std::array<std::array<QSqrt2, 4>, 4> Kx_;
  std::array<std::array<double, 4>, 4> K_{};
};

/// Period vector as a point of R^8: frame coordinates of the x then y components.
template <class S>
std::array<double, 8> period_point(const PeriodVector<S>& p) {
  std::array<double, 8> out{};
  for (int k = 0; k < 2; ++k) {
    std::array<double, 4> v;
    for (int j = 0; j < 4; ++j) v[j] = detail::to_double(p.hol[j][k]);
    const auto c = CohomologyFrame::get().coords(v);
    for (int m = 0; m < 4; ++m) out[4 * k + m] = c[m];
  }
  return out;
}

/// Norm of the balanced part (frame coordinates 2, 3 of each component).
inline double bal_part_norm(const std::array<double, 8>& v) {
  return std::sqrt(v[2] * v[2] + v[3] * v[3] + v[6] * v[6] + v[7] * v[7]);
}

/// Distance from a two-cylinder surface to the octagon locus in period
/// coordinates. The twists carry the marking, so pass lifted twists.
template <class S>
double distance_to_locus(const TwoCylinderSurface<S>& x) {
  return bal_part_norm(period_point(period_coordinates(x)));
}

struct Quadratic {
  double p0 = 0, p1 = 0, p2 = 0;
  double operator()(double l) const { return p0 + l * (p1 + l * p2); }
};

/// P(l) = |(q + l beta) - pi(q + l beta)|^2 with pi the orthogonal projection
/// onto the span of vst in R^8.
inline Quadratic distance_polynomial(const std::array<double, 8>& q, const std::array<double, 8>& beta,
                                     const std::vector<std::array<double, 8>>& vst) {
  // Gram-Schmidt
  std::vector<std::array<double, 8>> e;
  for (auto v : vst) {
    double n0 = 0;
    for (double x : v) n0 += x * x;
    for (const auto& u : e) {
      double d = 0;
      for (int i = 0; i < 8; ++i) d += v[i] * u[i];
      for (int i = 0; i < 8; ++i) v[i] -= d * u[i];
    }
    double n = 0;
    for (double x : v) n += x * x;
    if (n <= 1e-20 * std::max(n0, 1e-300)) throw std::domain_error("distance_polynomial: degenerate basis");
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    e.push_back(v);
  }
  auto residual = [&](std::array<double, 8> v) {
    for (const auto& u : e) {
      double d = 0;
      for (int i = 0; i < 8; ++i) d += v[i] * u[i];
      for (int i = 0; i < 8; ++i) v[i] -= d * u[i];
    }
    return v;
  };
  const auto rq = residual(q), rb = residual(beta);
  Quadratic P;
  for (int i = 0; i < 8; ++i) {
    P.p0 += rq[i] * rq[i];
    P.p1 += 2 * rq[i] * rb[i];
    P.p2 += rb[i] * rb[i];
  }
  return P;
}

/// Tautological plane at a locus surface: dx and dy in each component.
template <class S>
std::vector<std::array<double, 8>> tautological_basis(const TwoCylinderSurface<S>& x) {
  const PeriodVector<S> hol = period_coordinates(x);
  std::vector<std::array<double, 8>> out;
  for (int comp = 0; comp < 2; ++comp)
    for (int k = 0; k < 2; ++k) {
      PeriodVector<double> v;
      for (int j = 0; j < 4; ++j) v.hol[j] = {0.0, 0.0};
      for (int j = 0; j < 4; ++j) v.hol[j][comp] = detail::to_double(hol.hol[j][k]);
      out.push_back(period_point(v));
    }
  return out;
}

/// Lebesgue measure of {l in [lo, hi] : P(l) < d2} for P >= 0 of degree <= 2.
inline double sublevel_measure(const Quadratic& P, double lo, double hi, double d2) {
  const double a = P.p2, b = P.p1, c = P.p0 - d2;
  std::vector<double> cuts{lo, hi};
  if (a != 0) {
    const double disc = b * b - 4 * a * c;
    if (disc > 0) {
      const double s = std::sqrt(disc);
      const double q = -0.5 * (b + std::copysign(s, b));
      cuts.push_back(q / a);
      if (q != 0) cuts.push_back(c / q);
    }
  } else if (b != 0) {
    cuts.push_back(-c / b);
  }
  std::sort(cuts.begin(), cuts.end());
  double m = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double x0 = std::max(cuts[i], lo), x1 = std::min(cuts[i + 1], hi);
    if (x1 <= x0) continue;
    if (P(0.5 * (x0 + x1)) < d2) m += x1 - x0;
  }
  return m;
}

/// Supremum of P on [lo, hi].
inline double sup_on(const Quadratic& P, double lo, double hi) {
  double s = std::max(P(lo), P(hi));
  if (P.p2 != 0) {
    const double v = -P.p1 / (2 * P.p2);
    if (v > lo && v < hi) s = std::max(s, P(v));
  }
  return s;
}

/// Constant of the (C, 1/d)-good property of degree-d polynomials.
inline double good_constant(int degree) { return 2.0 * degree * std::pow(degree + 1.0, 1.0 / degree); }

}  // namespace octoflow
