#include <octoflow/kz_cocycle.hpp>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <random>

using namespace octoflow;

namespace {

Mat2 random_sl2(std::mt19937_64& rng, double log_lo, double log_hi) {
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi), ls(log_lo, log_hi);
  return rotation(ang(rng)) * geodesic(ls(rng)) * rotation(ang(rng));
}

std::vector<FlowStep> random_path(std::mt19937_64& rng, int len) {
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_real_distribution<double> p(-1.5, 1.5);
  std::vector<FlowStep> out;
  for (int i = 0; i < len; ++i) out.push_back({static_cast<FlowKind>(kind(rng)), p(rng)});
  return out;
}

Mat2 scaled_value(const ScaledMat& s) { return std::exp(s.log_scale) * s.m; }

}  // namespace

TEST(Cocycle, IdentityAtWordLevel) {
  std::mt19937_64 rng(31);
  auto pts = haar_sample(40, 5);
  for (const auto& x : pts) {
    auto h = random_path(rng, 3), g = random_path(rng, 3);
    std::vector<FlowStep> gh = h;
    gh.insert(gh.end(), g.begin(), g.end());
    CocycleRun whole = kz_along(x, gh);
    CocycleRun first = kz_along(x, h);
    CocycleRun second = kz_along(first.end, g);
    EXPECT_EQ(whole.value.word, first.value.word * second.value.word);
    EXPECT_EQ(whole.value.exact(), second.value.exact() * first.value.exact());
    Mat2 num = scaled_value(second.value.numeric) * scaled_value(first.value.numeric);
    EXPECT_LT(scaled_value(whole.value.numeric).max_abs_diff(num), 1e-9 * std::max(1.0, num.spectral_norm()));
  }
}

TEST(Cocycle, NumericMatchesExact) {
  std::mt19937_64 rng(32);
  for (const auto& x : haar_sample(30, 6)) {
    CocycleValue v = kz_along(x, random_path(rng, 6)).value;
    Mat2 ex = balanced_numeric(v.exact());
    Mat2 nu = scaled_value(v.numeric);
    EXPECT_LT(nu.max_abs_diff(ex), 1e-9 * std::max(1.0, ex.spectral_norm()));
    EXPECT_NEAR(std::fabs(nu.det()), 1.0, 1e-9);
  }
}

TEST(Cocycle, OmegaOnePeriod) {
  CocycleValue v = kz_along(omega1_point(), {{FlowKind::horocycle, 1.0}}).value;
  EXPECT_EQ(v.exact(), galois_rep(cusp_word().inverse()));
  EXPECT_EQ(v.exact().classify(), ConjClass::parabolic);
}

TEST(Cocycle, ClosedGeodesicOfTauOne) {
  // frame g = Q^{-1} where tau1 = Q diag(e^l, e^-l) Q^{-1}, so g_l g = g tau1
  const Mat2 t = eval_word_numeric(tau1_word());
  const double ell = period(tau1_word());
  const double lam = std::exp(ell);
  Vec2 v1{t.b, lam - t.a}, v2{t.b, 1 / lam - t.a};
  Mat2 Q{v1.x, v2.x, v1.y, v2.y};
  if (Q.det() < 0) Q = Mat2{-v1.x, v2.x, -v1.y, v2.y};
  Q = (1.0 / std::sqrt(Q.det())) * Q;
  const Mat2 g = Q.inverse();
  ASSERT_LT((geodesic(ell) * g).max_abs_diff(g * t), 1e-9);
  LocusPoint x = reduce(g);
  CocycleRun run = kz_along(x, {{FlowKind::geodesic, ell}});
  EXPECT_LT(run.end.frame.max_abs_diff(x.frame), 1e-8);
  const GroupWord expect = x.word.inverse() * tau1_word().inverse() * x.word;
  EXPECT_EQ(eval_word(run.value.word), eval_word(expect));
  EXPECT_EQ(run.value.exact(), galois_rep(expect));
  EXPECT_EQ(run.value.exact().classify(), ConjClass::elliptic);
}

TEST(Cocycle, EllipticBoundedHyperbolicGrows) {
  double max_b = 0, prev_a = 0;
  for (int k = 1; k <= 20; ++k) {
    max_b = std::max(max_b, balanced_norm(galois_rep(tau1_word().pow(k))));
    const double a = std::log(balanced_norm(galois_rep(tau2_word().pow(k))));
    EXPECT_GT(a, prev_a);
    prev_a = a;
  }
  EXPECT_LT(max_b, 10.0);
  // log |sigma(tau2)^k| grows linearly with slope acosh(7 - 4 sqrt2)
  EXPECT_NEAR(prev_a / 20, std::acosh(7 - 4 * std::sqrt(2.0)), 0.1);
}

TEST(Cocycle, WordLengthGuard) {
  CocycleValue v;
  GroupWord big;
  for (int i = 0; i < 600000; ++i) big *= tau1_word();
  EXPECT_THROW(v.append(big), std::length_error);
}

TEST(Xi, Diagonal) {
  XiPair x = xi_directions(Mat2{2, 0, 0, 0.5});
  EXPECT_NEAR(x.in.sin_dist(Direction::of({0, 1})), 0, 1e-15);
  EXPECT_NEAR(x.out.sin_dist(Direction::of({1, 0})), 0, 1e-15);
  EXPECT_THROW(xi_directions(rotation(0.3)), std::domain_error);
}

TEST(Xi, SvdOracle) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> U(-3, 3);
  for (int i = 0; i < 10000; ++i) {
    Mat2 m{U(rng), U(rng), U(rng), U(rng)};
    Eigen::Matrix2d e;
    e << m.a, m.b, m.c, m.d;
    Eigen::JacobiSVD<Eigen::Matrix2d> s(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (s.singularValues()(0) < s.singularValues()(1) * (1 + 1e-6)) continue;
    XiPair x = xi_directions(m);
    Direction vin = Direction::of({s.matrixV()(0, 1), s.matrixV()(1, 1)});
    Direction uout = Direction::of({s.matrixU()(0, 0), s.matrixU()(1, 0)});
    const double gap = s.singularValues()(0) / s.singularValues()(1) - 1;
    EXPECT_LT(x.in.sin_dist(vin), 1e-8 / std::min(1.0, gap));
    EXPECT_LT(x.out.sin_dist(uout), 1e-8 / std::min(1.0, gap));
  }
}

TEST(Xi, RotationEquivariance) {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> U(0, 2 * std::numbers::pi);
  for (int i = 0; i < 1000; ++i) {
    Mat2 m = random_sl2(rng, 0.1, 3);
    const double th = U(rng);
    Direction lhs = xi_in(m * rotation(th));
    Direction rhs = Direction::of(rotation(-th) * xi_in(m).unit());
    EXPECT_LT(lhs.sin_dist(rhs), 1e-9);
  }
}

TEST(Xi, OseledetsStabilization) {
  // per-orbit growth fluctuates, so the typical (median) orbit is tested
  std::vector<double> d15, d25;
  for (const auto& x : haar_sample(21, 41)) {
    CocycleRun a = kz_along(x, {{FlowKind::geodesic, 15.0}});
    CocycleRun b = kz_along(a.end, {{FlowKind::geodesic, 1.0}});
    CocycleValue ab = a.value;
    ab.append(b.value.word);
    d15.push_back(xi_in(a.value.numeric.m).sin_dist(xi_in(ab.numeric.m)));
    CocycleRun c = kz_along(b.end, {{FlowKind::geodesic, 9.0}});
    CocycleRun d = kz_along(c.end, {{FlowKind::geodesic, 1.0}});
    CocycleValue abc = ab, abcd;
    abc.append(c.value.word);
    abcd = abc;
    abcd.append(d.value.word);
    d25.push_back(xi_in(abc.numeric.m).sin_dist(xi_in(abcd.numeric.m)));
  }
  std::nth_element(d15.begin(), d15.begin() + 10, d15.end());
  std::nth_element(d25.begin(), d25.begin() + 10, d25.end());
  EXPECT_LT(d15[10], 1e-3);
  EXPECT_LT(d25[10], d15[10]);
}

TEST(SingularProduct, IdentityOuterFactors) {
  Mat2 B = geodesic(2.0) * rotation(0.4);
  SingularProductReport r = singular_product_check(Mat2::identity(), B, Mat2::identity(), 1.0);
  ASSERT_FALSE(r.skipped);
  EXPECT_NEAR(r.lhs3, 0.0, 1e-20);
  EXPECT_NEAR(r.rhs3, 2 / std::pow(B.spectral_norm(), 2), 1e-15);
  EXPECT_TRUE(r.holds());
}

TEST(SingularProduct, DominantMiddleFactor) {
  std::mt19937_64 rng(35);
  const Mat2 B{100, 0, 0, 0.01};
  for (int i = 0; i < 1000; ++i) {
    Mat2 A = random_sl2(rng, 0, std::log(2.0)), C = random_sl2(rng, 0, std::log(2.0));
    SingularProductReport r = singular_product_check(A, B, C, 1.0);
    ASSERT_FALSE(r.skipped);
    EXPECT_LE(r.lhs3, (4.0 + 4.0) / 1e4);
    EXPECT_GE(r.margin1(), 0);
    EXPECT_GE(r.margin2(), 0);
    EXPECT_GE(r.margin_chain(), 0);
  }
}

TEST(SingularProduct, PairBoundsAndChain) {
  // the two pair bounds and their triangle-inequality consequence hold for every triple
  std::mt19937_64 rng(36);
  int used = 0;
  for (int i = 0; i < 20000; ++i) {
    Mat2 A = random_sl2(rng, std::log(2.0), 5), B = random_sl2(rng, std::log(2.0), 5), C = random_sl2(rng, std::log(2.0), 5);
    SingularProductReport r = singular_product_check(A, B, C, 2.0);
    if (r.skipped) continue;
    ++used;
    EXPECT_GE(r.margin1(), -1e-12);
    EXPECT_GE(r.margin2(), -1e-12);
    EXPECT_GE(r.margin_chain(), -1e-12);
  }
  EXPECT_GT(used, 10000);
}

TEST(NormAndVector, Sandwich) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    Mat2 m = random_sl2(rng, 0.05, 4);
    const double n = m.spectral_norm();
    Svd2 s = svd(m);
    EXPECT_NEAR(norm_and_vector(m, s.expanded_input()), n, 1e-8 * n);
    XiPair x = xi_directions(m);
    EXPECT_NEAR(norm_and_vector(m, x.in.unit()), 1 / n, 1e-8);
    Vec2 v{U(rng), U(rng)};
    const double mv = norm_and_vector(m, v);
    EXPECT_LE(mv, n * v.norm() * (1 + 1e-12));
    EXPECT_GE(mv, v.norm() / n * (1 - 1e-12));
    ScaledMat sm{m, 0};
    sm.normalize();
    EXPECT_NEAR(log_norm_and_vector(sm, v), std::log(mv), 1e-12);
  }
}
