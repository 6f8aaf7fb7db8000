#pragma once

/// Veech group of the regular octagon surface: generators, words, the
/// Galois-conjugate representation on the balanced plane, the pseudo-Anosov
/// pair search and the symplectic pairing on the octagon's homology.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "exact_field.hpp"
#include "mat2.hpp"

namespace octoflow {

enum class Gen { gamma = 0, nu3 = 1, nu4 = 2, rho = 3 };

inline constexpr std::array<const char*, 4> kGenNames{"gamma", "nu3", "nu4", "rho"};
inline constexpr std::array<int, 4> kGenOrder{2, 2, 4, 8};

inline const char* gen_name(Gen g) { return kGenNames[static_cast<int>(g)]; }

inline Gen gen_from_name(const std::string& s) {
  for (int i = 0; i < 4; ++i)
    if (s == kGenNames[i]) return static_cast<Gen>(i);
  throw std::invalid_argument("unknown generator '" + s + "'");
}

/// lambda = 2 + 2 sqrt2, translation length of the horizontal cusp.
inline QSqrt2 octagon_lambda() { return {2, 2}; }

inline ExactMat generator(Gen g) {
  const QSqrt2 h = QSqrt2::frac(0, 1, 1, 2);  // sqrt2 / 2
  switch (g) {
    case Gen::gamma: return {QSqrt2(-1), octagon_lambda(), QSqrt2(0), QSqrt2(1)};
    case Gen::nu3: return {QSqrt2(0), QSqrt2(1), QSqrt2(1), QSqrt2(0)};
    case Gen::nu4: return {QSqrt2(0), QSqrt2(1), QSqrt2(-1), QSqrt2(0)};
    case Gen::rho: return {h, -h, h, h};
  }
  throw std::logic_error("generator");
}

inline std::map<std::string, ExactMat> generators() {
  std::map<std::string, ExactMat> out;
  for (int i = 0; i < 4; ++i) out.emplace(kGenNames[i], generator(static_cast<Gen>(i)));
  return out;
}

namespace detail {
struct PowerTable {
  std::array<std::vector<ExactMat>, 4> exact;
  std::array<std::vector<Mat2>, 4> phi1, phi2;
  PowerTable() {
    for (int g = 0; g < 4; ++g) {
      ExactMat acc;
      const ExactMat m = generator(static_cast<Gen>(g));
      for (int k = 0; k < kGenOrder[g]; ++k) {
        exact[g].push_back(acc);
        phi1[g].push_back(Mat2::from(acc.embed(Embedding::phi1)));
        phi2[g].push_back(Mat2::from(acc.embed(Embedding::phi2)));
        acc = acc * m;
      }
    }
  }
};
inline const PowerTable& powers() {
  static const PowerTable table;
  return table;
}
}  // namespace detail

struct Letter {
  Gen gen = Gen::gamma;
  int exp = 1;  ///< reduced to [1, order)
  friend bool operator==(const Letter&, const Letter&) = default;
};

/// Word in the Veech generators; adjacent equal generators are merged and
/// exponents reduced modulo the generator's order.
class GroupWord {
  std::vector<Letter> letters_;

 public:
  GroupWord() = default;
  GroupWord(std::initializer_list<Letter> ls) {
    for (const auto& l : ls) push(l.gen, l.exp);
  }

  static GroupWord letter(Gen g, int e = 1) {
    GroupWord w;
    w.push(g, e);
    return w;
  }

  void push(Gen g, long long e) {
    const int ord = kGenOrder[static_cast<int>(g)];
    int r = static_cast<int>(((e % ord) + ord) % ord);
    if (r == 0) return;
    if (!letters_.empty() && letters_.back().gen == g) {
      r = (letters_.back().exp + r) % ord;
      if (r == 0)
        letters_.pop_back();
      else
        letters_.back().exp = r;
      return;
    }
    letters_.push_back({g, r});
  }

  GroupWord& operator*=(const GroupWord& w) {
    for (const auto& l : w.letters_) push(l.gen, l.exp);
    return *this;
  }
  friend GroupWord operator*(GroupWord u, const GroupWord& w) { return u *= w; }
  friend bool operator==(const GroupWord&, const GroupWord&) = default;

  GroupWord inverse() const {
    GroupWord w;
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) w.push(it->gen, -it->exp);
    return w;
  }

  GroupWord pow(long long k) const {
    GroupWord base = k < 0 ? inverse() : *this;
    GroupWord acc;
    for (long long i = 0; i < (k < 0 ? -k : k); ++i) acc *= base;
    return acc;
  }

  const std::vector<Letter>& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }

  /// Tokens like "gamma", "rho^3".
  std::vector<std::string> tokens() const {
    std::vector<std::string> out;
    out.reserve(letters_.size());
    for (const auto& l : letters_) {
      std::string s = gen_name(l.gen);
      if (l.exp != 1) s += "^" + std::to_string(l.exp);
      out.push_back(std::move(s));
    }
    return out;
  }

  static GroupWord from_tokens(const std::vector<std::string>& tokens) {
    GroupWord w;
    for (const auto& t : tokens) {
      auto caret = t.find('^');
      if (caret == std::string::npos) {
        w.push(gen_from_name(t), 1);
      } else {
        w.push(gen_from_name(t.substr(0, caret)), std::stoll(t.substr(caret + 1)));
      }
    }
    return w;
  }

  std::string str() const {
    std::string s;
    for (const auto& t : tokens()) s += (s.empty() ? "" : " ") + t;
    return s.empty() ? "1" : s;
  }
};

/// Exact product of the letters, left to right.
inline ExactMat eval_word(const GroupWord& w) {
  const auto& P = detail::powers();
  ExactMat acc;
  for (const auto& l : w.letters()) acc = acc * P.exact[static_cast<int>(l.gen)][l.exp];
  return acc;
}

/// Numeric product under one embedding.
inline Mat2 eval_word_numeric(const GroupWord& w, Embedding which = Embedding::phi1) {
  const auto& P = detail::powers();
  const auto& tab = which == Embedding::phi1 ? P.phi1 : P.phi2;
  Mat2 acc;
  for (const auto& l : w.letters()) acc = acc * tab[static_cast<int>(l.gen)][l.exp];
  return acc;
}

/// Monodromy on the balanced plane: transpose of the Galois conjugate.
inline ExactMat galois_rep(const GroupWord& w) { return eval_word(w).galois().transpose(); }

/// Numeric galois_rep with a running log-scale, accumulated letter by letter
/// so that later letters multiply on the left.
inline ScaledMat galois_rep_numeric(const GroupWord& w) {
  const auto& tab = detail::powers().phi2;
  ScaledMat acc;
  int since = 0;
  for (const auto& l : w.letters()) {
    acc.m = tab[static_cast<int>(l.gen)][l.exp].transpose() * acc.m;
    if (++since == 16) {
      acc.normalize();
      since = 0;
    }
  }
  acc.normalize();
  return acc;
}

/// tau1 = gamma nu3.
inline GroupWord tau1_word() { return {{Gen::gamma, 1}, {Gen::nu3, 1}}; }
/// tau2 = (gamma nu4)^2.
inline GroupWord tau2_word() { return {{Gen::gamma, 1}, {Gen::nu4, 1}, {Gen::gamma, 1}, {Gen::nu4, 1}}; }
/// Horizontal cusp parabolic [[1, lambda], [0, 1]] = gamma nu4^-1 nu3.
inline GroupWord cusp_word() { return {{Gen::gamma, 1}, {Gen::nu4, -1}, {Gen::nu3, 1}}; }
inline GroupWord rotation_word() { return GroupWord::letter(Gen::rho, 1); }
inline GroupWord minus_identity_word() { return GroupWord::letter(Gen::rho, 4); }

/// Translation length of the geodesic fixed by M (0 unless hyperbolic).
inline double period(const ExactMat& m) {
  const double t = std::fabs(m.trace().embed(Embedding::phi1)) / 2.0;
  return t > 1.0 ? std::acosh(t) : 0.0;
}
inline double period(const GroupWord& w) { return period(eval_word(w)); }

inline GroupWord schottky_element(long long m, long long n, long long N) {
  return tau2_word().pow(m * N) * tau1_word().pow(n * N);
}

/// Smallest N <= max_N making every tau2^(mN) tau1^(nN), 1 <= m, n <= range,
/// hyperbolic by exact trace test.
inline long long schottky_power(long long max_N, int range = 10) {
  if (max_N < 1) throw std::invalid_argument("schottky_power: max_N must be >= 1");
  const ExactMat t1 = eval_word(tau1_word());
  const ExactMat t2 = eval_word(tau2_word());
  for (long long N = 1; N <= max_N; ++N) {
    const ExactMat a = t2.pow(N), b = t1.pow(N);
    std::vector<ExactMat> apow{a}, bpow{b};
    for (int k = 1; k < range; ++k) {
      apow.push_back(apow.back() * a);
      bpow.push_back(bpow.back() * b);
    }
    bool ok = true;
    for (int m = 0; m < range && ok; ++m)
      for (int n = 0; n < range && ok; ++n) ok = (apow[m] * bpow[n]).classify() == ConjClass::hyperbolic;
    if (ok) return N;
  }
  throw std::runtime_error("schottky_power: no N <= " + std::to_string(max_N) + " works");
}

/// Real matrix of a balanced-plane monodromy. galois_rep already applies the
/// conjugation, so this is the phi2-embedding of the underlying group element.
inline Mat2 balanced_numeric(const ExactMat& rep) { return Mat2::from(rep.embed(Embedding::phi1)); }

/// Spectral norm of a balanced-plane monodromy.
inline double balanced_norm(const ExactMat& rep) { return balanced_numeric(rep).spectral_norm(); }

/// |sigma(tau1^n)| / |sigma(tau2^m tau1^n)| computed from exact matrices.
inline double norm_ratio(long long m, long long n, long long N = 1) {
  const ExactMat b = galois_rep(tau1_word().pow(n * N));
  const ExactMat a = galois_rep(schottky_element(m, n, N));
  return balanced_norm(b) / balanced_norm(a);
}

struct PseudoAnosovPair {
  GroupWord word_a;  ///< primitive word tau2^(m0 N) tau1^(n0 N)
  GroupWord word_b;  ///< primitive word tau1^(n0 N)
  long long N = 1, m0 = 1, n0 = 1;
  long long p = 1, q = 1;  ///< repetitions
  double ell_a0 = 0, ell_b0 = 0;
  double ell_a = 0, ell_b = 0;
  double eps = 0;
  double log_norm_a = 0, log_norm_b = 0;  ///< log of balanced norms of the repeated words
  double ratio() const { return std::exp(log_norm_b - log_norm_a); }
};

namespace detail {
/// Convergents p/q of x with q > q_min and q <= q_max.
inline std::optional<std::pair<long long, long long>> dirichlet(double x, double q_min, long long q_max) {
  long long p0 = 1, q0 = 0, p1 = static_cast<long long>(std::floor(x)), q1 = 1;
  double r = x - std::floor(x);
  for (int it = 0; it < 64; ++it) {
    if (q1 > q_min && p1 >= 1 && std::fabs(static_cast<double>(p1) - static_cast<double>(q1) * x) <= 1.0 / q1)
      return std::make_pair(p1, q1);
    if (r < 1e-15) break;
    const double inv = 1.0 / r;
    const long long a = static_cast<long long>(std::floor(inv));
    r = inv - static_cast<double>(a);
    const long long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > q_max) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
  }
  return std::nullopt;
}
}  // namespace detail

/// Two periodic geodesics with periods within 1/2 of each other and balanced
/// norms differing by at least the factor 1/eps.
inline PseudoAnosovPair pseudo_anosov_pair(double eps, long long n0 = 1, long long max_m0 = 60,
                                           long long q_max = 1000000) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("pseudo_anosov_pair: eps must lie in (0,1)");
  PseudoAnosovPair best;
  double best_ratio = std::numeric_limits<double>::infinity();
  const long long N = schottky_power(20);
  const GroupWord wb = tau1_word().pow(n0 * N);
  const double lb0 = period(wb);
  const Mat2 sb = balanced_numeric(galois_rep(wb));
  for (long long m0 = 1; m0 <= max_m0; ++m0) {
    PseudoAnosovPair pr;
    pr.word_b = wb;
    pr.word_a = schottky_element(m0, n0, N);
    pr.N = N;
    pr.m0 = m0;
    pr.n0 = n0;
    pr.eps = eps;
    pr.ell_b0 = lb0;
    pr.ell_a0 = period(pr.word_a);
    auto pq = detail::dirichlet(lb0 / pr.ell_a0, 2.0 * pr.ell_a0, q_max);
    if (!pq) continue;
    pr.p = pq->first;
    pr.q = pq->second;
    pr.ell_a = static_cast<double>(pr.p) * pr.ell_a0;
    pr.ell_b = static_cast<double>(pr.q) * pr.ell_b0;
    const Mat2 sa = balanced_numeric(galois_rep(pr.word_a));
    pr.log_norm_a = scaled_power(sa, static_cast<unsigned long long>(pr.p)).log_norm();
    pr.log_norm_b = scaled_power(sb, static_cast<unsigned long long>(pr.q)).log_norm();
    if (pr.ratio() < best_ratio) {
      best_ratio = pr.ratio();
      best = pr;
    }
    if (pr.ratio() <= eps && std::fabs(pr.ell_a - pr.ell_b) < 1.0) return pr;
  }
  std::ostringstream os;
  os << "pseudo_anosov_pair: eps=" << eps << " not reached; best ratio " << best_ratio;
  throw std::runtime_error(os.str());
}

using Covector = std::array<QSqrt2, 4>;

/// Homology of the octagon surface, the intersection form and the
/// tautological and balanced covectors.
struct PairingData {
  std::array<std::string, 4> labels;
  std::array<std::array<QSqrt2, 2>, 4> holonomy;  ///< of the basis curves c_k
  std::array<std::array<int, 4>, 4> intersection{};
  std::array<std::array<Rational, 4>, 4> form;  ///< Gram matrix of the cup product on dual coordinates
  Covector dx, dy, dx_bal, dy_bal;
  QSqrt2 area;  ///< polygon area

  /// Cup product of two classes given by their values on the basis curves.
  QSqrt2 pair(const Covector& theta, const Covector& eta) const {
    QSqrt2 s(0);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (form[i][j] != 0) s += QSqrt2(form[i][j]) * theta[i] * eta[j];
    return s;
  }

  /// Covector with the given holonomy values on the basis.
  Covector evaluate(const std::array<std::array<QSqrt2, 2>, 4>& hol, int component) const {
    Covector c;
    for (int k = 0; k < 4; ++k) c[k] = hol[k][component];
    return c;
  }
};

namespace detail {
using XY = std::array<QSqrt2, 2>;
inline XY sub(const XY& u, const XY& v) { return {u[0] - v[0], u[1] - v[1]}; }
inline QSqrt2 cross(const XY& u, const XY& v) { return u[0] * v[1] - u[1] * v[0]; }

/// Signed crossings of the open segments p + s u and q + t v, s, t in (0, 1).
inline int signed_crossings(const XY& p, const XY& u, const XY& q, const XY& v) {
  const QSqrt2 den = cross(u, v);
  if (den.is_zero()) return 0;
  const XY w = sub(q, p);
  const QSqrt2 s = cross(w, v) / den;
  const QSqrt2 t = cross(w, u) / den;
  if (s <= QSqrt2(0) || s >= QSqrt2(1) || t <= QSqrt2(0) || t >= QSqrt2(1)) return 0;
  return den.sign() == Sign::pos ? 1 : -1;
}

inline std::array<std::array<Rational, 4>, 4> invert4(const std::array<std::array<int, 4>, 4>& J) {
  std::array<std::array<Rational, 8>, 4> a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 8; ++j) a[i][j] = j < 4 ? Rational(J[i][j]) : Rational(j - 4 == i ? 1 : 0);
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    while (piv < 4 && a[piv][col] == 0) ++piv;
    if (piv == 4) throw std::runtime_error("symplectic_check: degenerate intersection matrix");
    std::swap(a[piv], a[col]);
    const Rational inv = 1 / a[col][col];
    for (auto& x : a[col]) x *= inv;
    for (int r = 0; r < 4; ++r) {
      if (r == col || a[r][col] == 0) continue;
      const Rational f = a[r][col];
      for (int j = 0; j < 8; ++j) a[r][j] -= f * a[col][j];
    }
  }
  std::array<std::array<Rational, 4>, 4> out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i][j] = a[i][j + 4];
  return out;
}
}  // namespace detail

/// Regular octagon with unit sides, counterclockwise from the origin; side k
/// is glued to side k+4 by translation.
struct OctagonPolygon {
  std::array<detail::XY, 8> side;
  std::array<detail::XY, 8> vert;
};

inline OctagonPolygon octagon_polygon() {
  using detail::XY;
  const QSqrt2 h = QSqrt2::frac(0, 1, 1, 2);
  const std::array<XY, 4> half{XY{QSqrt2(1), QSqrt2(0)}, XY{h, h}, XY{QSqrt2(0), QSqrt2(1)}, XY{-h, h}};
  OctagonPolygon poly;
  for (int k = 0; k < 4; ++k) {
    poly.side[k] = half[k];
    poly.side[k + 4] = {-half[k][0], -half[k][1]};
  }
  poly.vert[0] = {QSqrt2(0), QSqrt2(0)};
  for (int k = 0; k < 7; ++k) poly.vert[k + 1] = {poly.vert[k][0] + poly.side[k][0], poly.vert[k][1] + poly.side[k][1]};
  return poly;
}

/// Basis curve c_k runs from the midpoint of side k to the midpoint of side
/// k+4 through the centre.
inline PairingData symplectic_check() {
  using detail::XY;
  const OctagonPolygon poly = octagon_polygon();
  const auto& side = poly.side;
  const auto& vert = poly.vert;

  PairingData pd;
  QSqrt2 twice_area(0);
  for (int k = 0; k < 8; ++k) twice_area += detail::cross(vert[k], vert[(k + 1) % 8]);
  pd.area = twice_area / QSqrt2(2);

  const QSqrt2 half_q = QSqrt2::frac(1, 2);
  std::array<XY, 8> mid;
  for (int k = 0; k < 8; ++k) mid[k] = {vert[k][0] + half_q * side[k][0], vert[k][1] + half_q * side[k][1]};
  std::array<XY, 4> start, dir;
  for (int k = 0; k < 4; ++k) {
    start[k] = mid[k];
    dir[k] = detail::sub(mid[k + 4], mid[k]);
    pd.holonomy[k] = dir[k];
    pd.labels[k] = "c" + std::to_string(k);
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      pd.intersection[i][j] = i == j ? 0 : detail::signed_crossings(start[i], dir[i], start[j], dir[j]);

  const auto inv = detail::invert4(pd.intersection);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) pd.form[i][j] = -inv[i][j];

  for (int k = 0; k < 4; ++k) {
    pd.dx[k] = pd.holonomy[k][0];
    pd.dy[k] = pd.holonomy[k][1];
    pd.dx_bal[k] = galois(pd.dx[k]);
    pd.dy_bal[k] = galois(pd.dy[k]);
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (pd.intersection[i][j] != -pd.intersection[j][i])
        throw std::runtime_error("symplectic_check: intersection matrix is not antisymmetric");
  for (const Covector* t : {&pd.dx, &pd.dy})
    for (const Covector* b : {&pd.dx_bal, &pd.dy_bal})
      if (!pd.pair(*t, *b).is_zero()) throw std::runtime_error("symplectic_check: taut and bal not orthogonal");
  return pd;
}

/// Shared instance.
inline const PairingData& octagon_pairing() {
  static const PairingData pd = symplectic_check();
  return pd;
}

}  // namespace octoflow
