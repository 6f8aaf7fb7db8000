#include <octoflow/hyperbolic_locus.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace octoflow;

namespace {

GroupWord random_det1_word(std::mt19937_64& rng, int max_len = 6) {
  std::uniform_int_distribution<int> len(1, max_len), pick(0, 3);
  const GroupWord T = cusp_word(), R = rotation_word();
  const GroupWord g[4] = {T, T.inverse(), R, R.inverse()};
  GroupWord w;
  for (int i = len(rng); i > 0; --i) w *= g[pick(rng)];
  return w;
}

// Reduction with a random choice among all decreasing moves.
double random_order_reduce(Mat2 m, std::mt19937_64& rng) {
  const auto& fd = FundamentalDomain::get();
  for (int step = 0; step < 100000; ++step) {
    const double cur = FundamentalDomain::cosh_dist(m);
    std::vector<int> down;
    for (int i = 0; i < 4; ++i)
      if (FundamentalDomain::cosh_dist(m * fd.pairings()[i].m) < cur * (1 - 1e-12)) down.push_back(i);
    if (down.empty()) return std::acosh(cur);
    m = m * fd.pairings()[down[rng() % down.size()]].m;
  }
  return -1.0;
}

double ks_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double D = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    D = std::max(D, std::fabs(double(i) / a.size() - double(j) / b.size()));
  }
  const double ne = double(a.size()) * b.size() / (a.size() + b.size());
  const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * D;
  double p = 0, sgn = 1;
  for (int k = 1; k <= 100; ++k, sgn = -sgn) p += 2 * sgn * std::exp(-2.0 * k * k * lam * lam);
  return std::clamp(p, 0.0, 1.0);
}

bool same_group_element(const GroupWord& u, const GroupWord& v) { return eval_word(u) == eval_word(v); }

}  // namespace

TEST(Domain, CuspGeometry) {
  const auto& fd = FundamentalDomain::get();
  EXPECT_NEAR(fd.lambda(), 2 + 2 * std::sqrt(2.0), 1e-14);
  ASSERT_EQ(fd.finite_cusps().size(), 2u);
  EXPECT_NEAR(fd.finite_cusps()[0].point.real(), -(1 + std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(fd.finite_cusps()[1].point.real(), 1 + std::sqrt(2.0), 1e-12);
  EXPECT_EQ(eval_word(rotation_word().inverse() * cusp_word()).trace(), QSqrt2(-2));
  for (const auto& c : fd.finite_cusps()) {
    EXPECT_GT(c.width, 0.0);
    EXPECT_TRUE(fd.contains(c.point + Complex(0, 1e-3)) || fd.contains(c.point + Complex(0, 1e-6)));
  }
}

TEST(Reduce, Identity) {
  LocusPoint p = reduce(Mat2::identity());
  EXPECT_TRUE(p.word.empty());
  EXPECT_TRUE(p.certified);
  EXPECT_LT(p.frame.max_abs_diff(Mat2::identity()), 1e-15);
}

TEST(Reduce, RejectsBadDeterminant) { EXPECT_THROW(reduce(Mat2{2, 0, 0, 1}), std::domain_error); }

TEST(Reduce, GammaInvariance) {
  std::mt19937_64 rng(21);
  auto pts = haar_sample(200, 3);
  for (const auto& x : pts) {
    GroupWord g = random_det1_word(rng);
    LocusPoint r = reduce(x.frame * eval_word_numeric(g));
    EXPECT_LT(r.frame.max_abs_diff(x.frame), 1e-9);
    EXPECT_TRUE(same_group_element(g * r.word, GroupWord{}));
  }
}

TEST(Reduce, PathIndependence) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N(0, 1.5);
  for (int i = 0; i < 300; ++i) {
    Mat2 m = geodesic(N(rng)) * rotation(N(rng)) * horocycle(3 * N(rng)) * rotation(N(rng));
    const double d1 = random_order_reduce(m, rng), d2 = random_order_reduce(m, rng);
    const double d = std::acosh(FundamentalDomain::cosh_dist(reduce(m).frame));
    EXPECT_NEAR(d1, d, 1e-9);
    EXPECT_NEAR(d2, d, 1e-9);
  }
}

TEST(Reduce, CertifiedInDomain) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> N(0, 2);
  const auto& fd = FundamentalDomain::get();
  for (int i = 0; i < 500; ++i) {
    Mat2 m = geodesic(N(rng)) * horocycle(N(rng)) * rotation(N(rng));
    LocusPoint p = reduce(m);
    EXPECT_TRUE(p.certified);
    EXPECT_TRUE(fd.contains(FundamentalDomain::point_of(p.frame), 1e-10));
    EXPECT_NEAR(p.frame.det(), 1.0, 1e-12);
    // frame * word^{-1} reproduces the input
    Mat2 back = p.frame * eval_word_numeric(p.word.inverse());
    EXPECT_LT(back.max_abs_diff(m), 1e-8 * std::max(1.0, m.spectral_norm()));
  }
}

TEST(Flow, GeodesicInverse) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-3, 3);
  for (const auto& x : haar_sample(50, 17)) {
    const double t = U(rng);
    LocusPoint y = flow(flow(x, FlowKind::geodesic, t), FlowKind::geodesic, -t);
    EXPECT_LT(y.frame.max_abs_diff(x.frame), 1e-9);
    EXPECT_TRUE(same_group_element(y.word, x.word));
  }
}

TEST(Flow, HorocyclePeriodAtOmegaOne) {
  LocusPoint w = omega1_point();
  EXPECT_TRUE(w.word.empty());
  Advance a = advance(w, FlowKind::horocycle, 1.0);
  EXPECT_LT(a.point.frame.max_abs_diff(w.frame), 1e-12);
  EXPECT_TRUE(same_group_element(a.step_word, cusp_word().inverse()));
  EXPECT_FALSE(a.step_word.empty());
  EXPECT_EQ(eval_word(a.step_word).classify(), ConjClass::parabolic);
}

TEST(Flow, CommutationRelation) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int i = 0; i < 100; ++i) {
    const double t = U(rng), s = U(rng);
    Mat2 lhs = geodesic(t) * horocycle(s), rhs = horocycle(std::exp(2 * t) * s) * geodesic(t);
    EXPECT_LT(lhs.max_abs_diff(rhs), 1e-12 * std::max(1.0, lhs.spectral_norm()));
  }
}

TEST(Flow, ReduceAfterFlowKeepsOrbit) {
  for (const auto& x : haar_sample(50, 23)) {
    for (FlowKind k : {FlowKind::geodesic, FlowKind::horocycle, FlowKind::opposite_horocycle, FlowKind::rotation}) {
      Advance a = advance(x, k, 0.7);
      Mat2 lifted = flow_element(k, 0.7) * x.frame * eval_word_numeric(a.step_word);
      EXPECT_LT(lifted.max_abs_diff(a.point.frame), 1e-9);
      LocusPoint again = reduce(a.point.frame);
      EXPECT_TRUE(again.word.empty());
    }
  }
}

TEST(FlowBox, ClosedFormFactorization) {
  const double s = 0.3, r = 0.2, q = 1 + s * r;
  FlowBoxCoords c = flowbox_split(horocycle(s) * opposite_horocycle(r));
  EXPECT_NEAR(c.u_hat, r / q, 1e-12);
  EXPECT_NEAR(c.a, std::log(q), 1e-12);
  EXPECT_NEAR(c.u, s / q, 1e-12);
  // oracle: the displayed product with diagonal entries 1+sr and 1/(1+sr)
  Mat2 lower = opposite_horocycle(r / q), diag{q, 0, 0, 1 / q}, upper = horocycle(s / q);
  EXPECT_LT((lower * diag * upper).max_abs_diff(horocycle(s) * opposite_horocycle(r)), 1e-14);
}

TEST(FlowBox, IdentityAndRoundTrip) {
  FlowBoxCoords z = flowbox_split(Mat2::identity());
  EXPECT_EQ(z.u_hat, 0.0);
  EXPECT_EQ(z.a, 0.0);
  EXPECT_EQ(z.u, 0.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (int i = 0; i < 10000; ++i) {
    Mat2 y = opposite_horocycle(U(rng)) * geodesic(U(rng)) * horocycle(U(rng));
    EXPECT_LT(flowbox_compose(flowbox_split(y)).max_abs_diff(y), 1e-12);
  }
  EXPECT_THROW(flowbox_split(horocycle(-2) * opposite_horocycle(1)), std::domain_error);
}

TEST(Jacobian, Identity) {
  for (double s : {-0.4, 0.0, 0.3, 2.0}) EXPECT_EQ(weak_stable_holonomy_jacobian(0, 0, s), 1.0);
  EXPECT_THROW(weak_stable_holonomy_jacobian(0, 1, -1), std::domain_error);
}

TEST(Jacobian, FiniteDifference) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (int i = 0; i < 1000; ++i) {
    const double t = U(rng), r = U(rng), s = U(rng), h = 1e-5;
    auto f = [&](double x) { return std::exp(-2 * t) * x / (1 + x * r); };
    const double fd = (f(s + h) - f(s - h)) / (2 * h);
    EXPECT_NEAR(weak_stable_holonomy_jacobian(t, r, s), fd, 1e-6);
  }
}

TEST(Jacobian, TendsToOneOnShrinkingBoxes) {
  double prev = 1e9;
  for (double eps : {0.1, 0.03, 0.01, 0.003, 0.001}) {
    double worst = 0;
    for (int i = -10; i <= 10; ++i)
      for (int j = -10; j <= 10; ++j)
        for (int k = -10; k <= 10; ++k)
          worst = std::max(worst, std::fabs(weak_stable_holonomy_jacobian(eps * i / 10, eps * j / 10, eps * k / 10) - 1));
    EXPECT_LT(worst, prev);
    EXPECT_LT(worst, 5 * eps);
    prev = worst;
  }
}

TEST(Frames, AngleRoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0, std::numbers::pi);
  for (int i = 0; i < 200; ++i) {
    Complex z(U(rng) - 1.5, 0.2 + U(rng));
    const double th = U(rng);
    Mat2 g = frame_at(z, th);
    EXPECT_NEAR(g.det(), 1.0, 1e-12);
    EXPECT_LT(std::abs(FundamentalDomain::point_of(g) - z), 1e-12);
    const double back = frame_angle(g);
    EXPECT_LT(std::min(std::fabs(back - th), std::numbers::pi - std::fabs(back - th)), 1e-9);
  }
}

TEST(Haar, AreaMatchesGaussBonnet) {
  HaarSampler s(50.0);
  std::mt19937_64 rng(12);
  const int n = 100000;
  std::uint64_t attempts = 0;
  for (int i = 0; i < n; ++i) s.sample(rng, &attempts);
  const double area = s.box_area() * n / double(attempts) + s.truncated_area();
  EXPECT_NEAR(area / FundamentalDomain::area(), 1.0, 0.02);
}

TEST(Haar, SamplesCertified) {
  const auto& fd = FundamentalDomain::get();
  for (const auto& p : haar_sample(2000, 1)) {
    EXPECT_TRUE(p.certified);
    EXPECT_TRUE(fd.contains(FundamentalDomain::point_of(p.frame), 1e-10));
    EXPECT_LE(point_height(p.frame), 50.0 + 1e-9);
  }
}

TEST(Haar, SeedsIndistinguishable) {
  std::vector<double> a, b;
  for (const auto& p : haar_sample(20000, 101)) a.push_back(point_height(p.frame));
  for (const auto& p : haar_sample(20000, 202)) b.push_back(point_height(p.frame));
  EXPECT_GT(ks_pvalue(a, b), 0.01);
}

TEST(Haar, AngleUniform) {
  std::vector<double> a, b;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0, std::numbers::pi);
  for (const auto& p : haar_sample(20000, 303)) a.push_back(frame_angle(p.frame));
  for (int i = 0; i < 20000; ++i) b.push_back(U(rng));
  EXPECT_GT(ks_pvalue(a, b), 0.01);
}

TEST(LocalDistance, MatchesLogNorm) {
  EXPECT_NEAR(log_norm_near_identity(geodesic(0.1)), 0.1 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(log_norm_near_identity(rotation(0.2)), 0.2 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(log_norm_near_identity(horocycle(0.3)), 0.3, 1e-15);
  EXPECT_EQ(local_distance(geodesic(0.4), geodesic(0.4)), 0.0);
}
