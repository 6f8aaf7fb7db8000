#include <octoflow/surfaces_tremor.hpp>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <random>

using namespace octoflow;

namespace {

using Surf = TwoCylinderSurface<QSqrt2>;

QSqrt2 rnd_q(std::mt19937_64& rng, int range = 9) {
  std::uniform_int_distribution<int> num(-range, range), den(1, range);
  return {Rational(num(rng), den(rng)), Rational(num(rng), den(rng))};
}

const QSqrt2 kHalf = QSqrt2::frac(1, 2);
const QSqrt2 kHalfRoot2 = QSqrt2::frac(0, 1, 1, 2);

}  // namespace

TEST(Octagon, CylinderDecomposition) {
  Surf oct = octagon_cylinders();
  EXPECT_EQ(oct.c_a, QSqrt2(1, 1));
  EXPECT_EQ(oct.h_a, QSqrt2(1));
  EXPECT_EQ(oct.c_b, QSqrt2(2, 1));
  EXPECT_EQ(oct.h_b, kHalfRoot2);
  EXPECT_EQ(oct.tw_a, QSqrt2(0));
  EXPECT_EQ(oct.tw_b, kHalfRoot2);
  EXPECT_LT(oct.c_a, oct.c_b);
  // oracle: shoelace area of the polygon
  EXPECT_EQ(oct.area(), octagon_pairing().area);
}

TEST(Octagon, CylinderBasisRelations) {
  const auto M = cylinder_basis_in_c();
  // hand derivation: alpha_a = -c2, alpha_b = -c1 - c3, beta_a = -c0 + c1 - c3, beta_b = c0 - c2 + c3
  const int expect[4][4] = {{0, 0, -1, 0}, {0, -1, 0, -1}, {-1, 1, 0, -1}, {1, 0, -1, 1}};
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) EXPECT_EQ(M[j][k], Rational(expect[j][k])) << j << "," << k;
  const auto I = cylinder_intersection();
  EXPECT_EQ(std::abs(I[0][2]), 1);
  EXPECT_EQ(I[0][2], I[1][3]);
  EXPECT_EQ(I[0][1], 0);
  EXPECT_EQ(I[0][3], 0);
  EXPECT_EQ(I[1][2], 0);
  // the crossing saddle connections meet at the cone point, so beta_a . beta_b need not vanish,
  // but the form is still unimodular
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(I[i][j], -I[j][i]);
  EXPECT_EQ(std::abs(I[0][1] * I[2][3] - I[0][2] * I[1][3] + I[0][3] * I[1][2]), 1);
}

TEST(OmegaOne, ExactData) {
  Surf w = omega1_surface();
  EXPECT_EQ(w.c_a, kHalf);
  EXPECT_EQ(w.h_a, QSqrt2(1));
  EXPECT_EQ(w.c_b, kHalfRoot2);
  EXPECT_EQ(w.h_b, kHalfRoot2);
  EXPECT_EQ(w.tw_a, QSqrt2(0));
  EXPECT_EQ(w.tw_b, QSqrt2::frac(1, 2, -1, 4));
  EXPECT_EQ(w.area(), QSqrt2(1));
  EXPECT_LT(w.c_a, w.c_b);
}

TEST(OmegaOne, PeriodIsOne) {
  Surf w = omega1_surface();
  EXPECT_EQ(horocycle_period(w), QSqrt2(1));
  EXPECT_EQ(horocycle_act(w, QSqrt2(1)), w);
  // oracle: no rational s = p/q < 1 with q <= 40 closes up
  for (int q = 2; q <= 40; ++q)
    for (int p = 1; p < q; ++p) EXPECT_NE(horocycle_act(w, QSqrt2(Rational(p, q))), w) << p << "/" << q;
}

TEST(Horocycle, FlowProperty) {
  std::mt19937_64 rng(1);
  Surf w = omega1_surface();
  EXPECT_EQ(horocycle_act(w, QSqrt2(0)), w);
  for (int i = 0; i < 100; ++i) {
    QSqrt2 s1 = rnd_q(rng), s2 = rnd_q(rng);
    EXPECT_EQ(horocycle_act(w, s1 + s2), horocycle_act(horocycle_act(w, s1), s2));
  }
}

TEST(Horocycle, IncommensurableRejected) {
  Surf bad{QSqrt2(1), QSqrt2(0, 1), QSqrt2(1), QSqrt2(1), QSqrt2(0), QSqrt2(0)};
  EXPECT_THROW(horocycle_period(bad), std::runtime_error);
}

TEST(Tremor, Linearity) {
  std::mt19937_64 rng(2);
  Surf w = omega1_surface();
  for (int i = 0; i < 100; ++i) {
    TremorVector<QSqrt2> t{rnd_q(rng), rnd_q(rng)};
    QSqrt2 ell = rnd_q(rng);
    Surf x = horocycle_act(w, rnd_q(rng));
    Surf y = tremor_path(x, t, ell, Twist::lifted);
    EXPECT_EQ(period_coordinates(y) - period_coordinates(x), ell * tremor_class(x, t));
  }
}

TEST(Tremor, CommutesWithHorocycle) {
  std::mt19937_64 rng(3);
  Surf w = omega1_surface();
  TremorVector<QSqrt2> sig = sigma_tremor(w);
  for (int i = 0; i < 100; ++i) {
    QSqrt2 s = rnd_q(rng), ell = rnd_q(rng);
    EXPECT_EQ(horocycle_act(tremor_path(w, sig, ell), s), tremor_path(horocycle_act(w, s), sig, ell));
    Surf y = tremor_path(w, sig, ell);
    EXPECT_EQ(horocycle_act(y, QSqrt2(1)), y);
  }
}

TEST(Tremor, DyIsHorocycle) {
  std::mt19937_64 rng(4);
  Surf w = omega1_surface();
  for (int i = 0; i < 50; ++i) {
    QSqrt2 ell = rnd_q(rng);
    EXPECT_EQ(tremor_path(w, TremorVector<QSqrt2>::dy(), ell), horocycle_act(w, ell));
  }
}

TEST(Tremor, SigmaIsBalanced) {
  Surf w = omega1_surface();
  TremorVector<QSqrt2> sig = sigma_tremor(w);
  EXPECT_EQ(sig.w_a, w.area_b());
  EXPECT_EQ(sig.w_b, -w.area_a());
  EXPECT_TRUE(is_balanced(w, sig));
  EXPECT_FALSE(is_balanced(w, TremorVector<QSqrt2>::dy()));
  // cup product of dx and dy is the area
  const auto hol = period_coordinates(w);
  EXPECT_EQ(cup(hol, 0, hol, 1), QSqrt2(1));
  const auto hol0 = period_coordinates(octagon_cylinders());
  EXPECT_EQ(cup(hol0, 0, hol0, 1), octagon_pairing().area);
}

TEST(Tremor, SigmaIsGaloisConjugateOfDy) {
  // independent oracle: sigma lies on the line of the Galois conjugate of dy
  Surf w = omega1_surface();
  const auto c = CohomologyFrame::get().coords_exact(tremor_class(w, sigma_tremor(w)).component(0));
  EXPECT_TRUE(c[0].is_zero());
  EXPECT_TRUE(c[1].is_zero());
  EXPECT_TRUE(c[2].is_zero());
  EXPECT_EQ(c[3], kHalf);
}

TEST(Tremor, BalancedAlongPath) {
  std::mt19937_64 rng(5);
  Surf w = omega1_surface();
  TremorVector<QSqrt2> sig = sigma_tremor(w);
  for (int i = 0; i < 30; ++i) {
    Surf y = tremor_path(w, sig, rnd_q(rng), Twist::lifted);
    const auto tau = tremor_class(y, sig), hol = period_coordinates(y);
    EXPECT_TRUE(cup(tau, 0, hol, 0).is_zero());
    EXPECT_TRUE(cup(tau, 0, hol, 1).is_zero());
  }
}

TEST(Renorm, ZeroTime) {
  Surf w = omega1_surface();
  auto sig = sigma_tremor(w);
  EXPECT_EQ(geodesic_renorm(w, sig, QSqrt2(1), kHalf), tremor_path(w, sig, kHalf));
}

TEST(Renorm, ExactUnitTime) {
  // e^t = 1 + sqrt2 is a unit of Z[sqrt2], so both sides are exact
  std::mt19937_64 rng(6);
  Surf w = omega1_surface();
  auto sig = sigma_tremor(w);
  const QSqrt2 et(1, 1);
  for (int i = 0; i < 30; ++i) {
    QSqrt2 ell = rnd_q(rng);
    Surf lhs = geodesic_act(tremor_path(w, sig, ell, Twist::lifted), et);
    Surf rhs = geodesic_renorm(w, sig, et, ell, Twist::lifted);
    EXPECT_EQ(lhs, rhs);
    // the renormalized vector carries the same cohomology class
    EXPECT_EQ(tremor_class(geodesic_act(w, et), renormalized_tremor(sig, et)), tremor_class(w, sig));
    EXPECT_EQ(geodesic_act(w, et).area(), w.area());
  }
}

TEST(Renorm, RandomTimesNumeric) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-3, 3);
  auto w = omega1_surface().numeric();
  auto sig = sigma_tremor(w);
  for (int i = 0; i < 1000; ++i) {
    const double et = std::exp(U(rng)), ell = U(rng);
    auto lhs = geodesic_act(tremor_path(w, sig, ell, Twist::lifted), et);
    auto rhs = geodesic_renorm(w, sig, et, ell, Twist::lifted);
    const double scale = std::max(1.0, et * et);
    EXPECT_NEAR(lhs.c_a, rhs.c_a, 1e-12 * scale);
    EXPECT_NEAR(lhs.c_b, rhs.c_b, 1e-12 * scale);
    EXPECT_NEAR(lhs.h_a, rhs.h_a, 1e-12 * scale);
    EXPECT_NEAR(lhs.h_b, rhs.h_b, 1e-12 * scale);
    EXPECT_NEAR(lhs.tw_a, rhs.tw_a, 1e-12 * scale);
    EXPECT_NEAR(lhs.tw_b, rhs.tw_b, 1e-12 * scale);
    EXPECT_NEAR(geodesic_act(w, et).area(), 1.0, 1e-12);
  }
}

TEST(DistancePolynomial, TautologicalDirectionIsConstant) {
  auto w = omega1_surface().numeric();
  const auto q = period_point(period_coordinates(w));
  const auto vst = tautological_basis(w);
  for (const auto& beta : vst) {
    Quadratic P = distance_polynomial(q, beta, vst);
    EXPECT_NEAR(P.p2, 0, 1e-24);
    EXPECT_NEAR(P.p1, 0, 1e-24);
  }
  EXPECT_NEAR(distance_to_locus(w), 0, 1e-14);
  EXPECT_THROW(distance_polynomial(q, q, {vst[0], vst[0]}), std::domain_error);
}

TEST(DistancePolynomial, MarkingMatters) {
  // wrapping a single cylinder twist is a Dehn twist, which leaves the linear locus
  auto w = omega1_surface().numeric();
  auto lifted = horocycle_act(w, 0.75, Twist::lifted);
  EXPECT_NEAR(distance_to_locus(lifted), 0, 1e-14);
  EXPECT_GT(distance_to_locus(horocycle_act(w, 0.75)), 0.1);
}

TEST(DistancePolynomial, LeadingCoefficientMatchesFit) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-1, 1);
  auto w = omega1_surface().numeric();
  for (int trial = 0; trial < 20; ++trial) {
    auto x = horocycle_act(w, U(rng), Twist::lifted);
    TremorVector<double> t{U(rng), U(rng)};
    const auto q = period_point(period_coordinates(x));
    const auto beta = period_point(tremor_class(x, t));
    Quadratic P = distance_polynomial(q, beta, tautological_basis(x));
    // oracle: least-squares quadratic through squared distances of tremored surfaces
    const int n = 41;
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
      const double l = -2 + 4.0 * i / (n - 1);
      const double d = distance_to_locus(tremor_path(x, t, l, Twist::lifted));
      A(i, 0) = 1;
      A(i, 1) = l;
      A(i, 2) = l * l;
      b(i) = d * d;
    }
    Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
    EXPECT_NEAR(c(2), P.p2, 1e-8);
    EXPECT_NEAR(P.p2, std::pow(bal_part_norm(beta), 2), 1e-12);
  }
}

TEST(Sublevel, MatchesGridAndGoodBound) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-1, 1), D(0.001, 0.5);
  const double C = good_constant(2);
  for (int i = 0; i < 2000; ++i) {
    // non-negative quadratic: a (l - r)^2 + m
    const double a = std::fabs(U(rng)) + 1e-3, r = 2 * U(rng), m = std::fabs(U(rng)) * 0.1;
    Quadratic P{a * r * r + m, -2 * a * r, a};
    const double lo = -1, hi = 1.5, delta = D(rng);
    const double meas = sublevel_measure(P, lo, hi, delta * delta);
    int cnt = 0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) cnt += P(lo + (hi - lo) * (k + 0.5) / n) < delta * delta;
    EXPECT_NEAR(meas, (hi - lo) * cnt / n, 3 * (hi - lo) / n);
    EXPECT_LE(meas, C * delta * (hi - lo) / std::sqrt(sup_on(P, lo, hi)));
  }
}
