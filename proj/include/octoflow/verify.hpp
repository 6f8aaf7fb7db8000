#pragma once

/// Exact-algebra verification suite: traces, Schottky power, norm ratios,
/// symplectic orthogonality, the cocycle identity and tremor laws.

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kz_cocycle.hpp"
#include "surfaces_tremor.hpp"
#include "veech_octagon.hpp"

namespace octoflow::verify {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Values printed in the literature for tr(tau2) and tr(sigma(tau1)).
inline QSqrt2 stated_trace_tau2() { return {8, 4}; }
inline QSqrt2 stated_trace_sigma_tau1() { return {2, -1}; }

struct TraceData {
  QSqrt2 tau1, tau2, sigma_tau1, sigma_tau2;
};

inline TraceData traces() {
  const ExactMat t1 = eval_word(tau1_word()), t2 = eval_word(tau2_word());
  return {t1.trace(), t2.trace(), t1.galois().trace(), t2.galois().trace()};
}

inline Check check_traces() {
  Check c{"traces", true, ""};
  const ExactMat g = generator(Gen::gamma);
  const ExactMat t1 = eval_word(tau1_word()), t2 = eval_word(tau2_word());
  const TraceData tr = traces();
  std::ostringstream os;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) {
      c.pass = false;
      os << "FAILED " << what << "; ";
    }
  };
  need(tr.tau1 == QSqrt2(2, 2), "tr(tau1) = 2+2sqrt2");
  need(g.det() == QSqrt2(-1), "det(gamma) = -1");
  need(g * g == ExactMat::identity(), "gamma^2 = 1");
  need(t1.galois().classify() == ConjClass::elliptic, "sigma(tau1) elliptic");
  need(t2.galois().classify() == ConjClass::hyperbolic, "sigma(tau2) hyperbolic");
  need(t2.det() == QSqrt2(1), "det(tau2) = 1");
  os << "tr(tau2) = " << tr.tau2 << (tr.tau2 == stated_trace_tau2() ? "" : " (stated 8+4sqrt2: mismatch)")
     << "; tr(sigma(tau1)) = " << tr.sigma_tau1
     << (tr.sigma_tau1 == stated_trace_sigma_tau1() ? "" : " (stated 2-sqrt2: mismatch)");
  c.detail = os.str();
  return c;
}

inline Check check_schottky(long long max_N = 20) {
  Check c{"schottky", false, ""};
  try {
    const long long N = schottky_power(max_N);
    c.pass = true;
    c.detail = "N = " + std::to_string(N);
  } catch (const std::runtime_error& e) {
    c.detail = e.what();
  }
  return c;
}

struct NormRatioTable {
  int m_max = 0, n_max = 0;
  std::vector<std::vector<double>> ratio;  ///< ratio[n-1][m-1]
};

/// |sigma(tau1^n)| / |sigma(tau2^m tau1^n)| for 1 <= m <= m_max, 1 <= n <= n_max.
inline NormRatioTable norm_ratio_table(int m_max, int n_max) {
  NormRatioTable tab{m_max, n_max, {}};
  const ExactMat t1 = eval_word(tau1_word()), t2 = eval_word(tau2_word());
  ExactMat p = ExactMat::identity();
  for (int n = 1; n <= n_max; ++n) {
    p = p * t1;
    const double nb = Mat2::from(p.embed(Embedding::phi2)).spectral_norm();
    std::vector<double> row;
    ExactMat q = p;
    for (int m = 1; m <= m_max; ++m) {
      q = t2 * q;
      row.push_back(nb / Mat2::from(q.embed(Embedding::phi2)).spectral_norm());
    }
    tab.ratio.push_back(std::move(row));
  }
  return tab;
}

inline Check check_norm_ratio(int m_max = 60, int n_max = 20, int m_small = 40, double bound = 1e-3) {
  Check c{"norm_ratio", true, ""};
  const NormRatioTable tab = norm_ratio_table(m_max, n_max);
  double worst_tail = 0;
  int nonmono = 0;
  for (int n = 1; n <= n_max; ++n) {
    const auto& row = tab.ratio[n - 1];
    for (int m = 2; m <= m_max; ++m) nonmono += !(row[m - 1] < row[m - 2]);
    for (int m = m_small; m <= m_max; ++m) worst_tail = std::max(worst_tail, row[m - 1]);
  }
  c.pass = nonmono == 0 && worst_tail < bound;
  std::ostringstream os;
  os << "non-monotone steps " << nonmono << "; max ratio for m >= " << m_small << ": " << worst_tail;
  c.detail = os.str();
  return c;
}

inline Check check_symplectic() {
  const PairingData& pd = octagon_pairing();
  bool ok = true;
  for (const Covector* t : {&pd.dx, &pd.dy})
    for (const Covector* b : {&pd.dx_bal, &pd.dy_bal}) ok = ok && pd.pair(*t, *b).is_zero();
  const bool area = pd.pair(pd.dx, pd.dy) == pd.area && pd.area == QSqrt2(2, 2);
  return {"symplectic", ok && area, "<dx,dy> = " + pd.pair(pd.dx, pd.dy).str() + ", area " + pd.area.str()};
}

/// Random flow compositions h then g from Haar points: word-level and numeric cocycle identity.
inline Check check_cocycle(int trials = 200, std::uint64_t seed = 1, double tol = 1e-9) {
  Check c{"cocycle", true, ""};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kind(0, 3), len(1, 4);
  std::uniform_real_distribution<double> p(-1.5, 1.5);
  auto path = [&] {
    std::vector<FlowStep> out;
    for (int i = len(rng); i > 0; --i) out.push_back({static_cast<FlowKind>(kind(rng)), p(rng)});
    return out;
  };
  auto value = [](const ScaledMat& s) { return std::exp(s.log_scale) * s.m; };
  int word_fail = 0;
  double worst = 0;
  for (const auto& x : haar_sample(static_cast<std::size_t>(trials), seed)) {
    const auto h = path(), g = path();
    auto gh = h;
    gh.insert(gh.end(), g.begin(), g.end());
    const CocycleRun whole = kz_along(x, gh), first = kz_along(x, h), second = kz_along(first.end, g);
    word_fail += !(whole.value.word == first.value.word * second.value.word);
    const Mat2 prod = value(second.value.numeric) * value(first.value.numeric);
    worst = std::max(worst, value(whole.value.numeric).max_abs_diff(prod) / std::max(1.0, prod.spectral_norm()));
  }
  c.pass = word_fail == 0 && worst < tol;
  std::ostringstream os;
  os << trials << " compositions, word mismatches " << word_fail << ", numeric mismatch " << worst;
  c.detail = os.str();
  return c;
}

/// Exact tremor linearity and horocycle commutation on rational data, and the
/// renormalization identity at random real times.
inline Check check_tremor(int trials = 100, std::uint64_t seed = 2, double tol = 1e-12) {
  using Surf = TwoCylinderSurface<QSqrt2>;
  Check c{"tremor", true, ""};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> num(-9, 9), den(1, 9);
  auto q = [&] { return QSqrt2(Rational(num(rng), den(rng)), Rational(num(rng), den(rng))); };
  const Surf w = omega1_surface();
  const TremorVector<QSqrt2> sig = sigma_tremor(w);
  int lin = 0, comm = 0, per = 0;
  for (int i = 0; i < trials; ++i) {
    const TremorVector<QSqrt2> t{q(), q()};
    const QSqrt2 ell = q(), s = q();
    const Surf x = horocycle_act(w, q());
    lin += !(period_coordinates(tremor_path(x, t, ell, Twist::lifted)) - period_coordinates(x) ==
             ell * tremor_class(x, t));
    comm += !(horocycle_act(tremor_path(w, sig, ell), s) == tremor_path(horocycle_act(w, s), sig, ell));
    per += !(horocycle_act(tremor_path(w, sig, ell), QSqrt2(1)) == tremor_path(w, sig, ell));
  }
  std::uniform_real_distribution<double> U(-3, 3);
  const auto wn = w.numeric();
  const auto sn = sigma_tremor(wn);
  double worst = 0;
  for (int i = 0; i < 10 * trials; ++i) {
    const double et = std::exp(U(rng)), ell = U(rng);
    const auto lhs = geodesic_act(tremor_path(wn, sn, ell, Twist::lifted), et);
    const auto rhs = geodesic_renorm(wn, sn, et, ell, Twist::lifted);
    const double scale = std::max(1.0, et * et);
    for (auto [a, b] : {std::pair{lhs.c_a, rhs.c_a}, {lhs.c_b, rhs.c_b}, {lhs.h_a, rhs.h_a}, {lhs.h_b, rhs.h_b},
                        {lhs.tw_a, rhs.tw_a}, {lhs.tw_b, rhs.tw_b}})
      worst = std::max(worst, std::fabs(a - b) / scale);
  }
  c.pass = lin == 0 && comm == 0 && per == 0 && worst <= tol;
  std::ostringstream os;
  os << "linearity failures " << lin << ", commutation failures " << comm << ", period failures " << per
     << ", renormalization mismatch " << worst;
  c.detail = os.str();
  return c;
}

inline std::vector<Check> run_suite(std::uint64_t seed = 1) {
  return {check_traces(), check_schottky(), check_norm_ratio(), check_symplectic(), check_cocycle(200, seed),
          check_tremor(100, seed + 1)};
}

}  // namespace octoflow::verify
