#pragma once

/// Balanced-plane cocycle over the octagon locus. KZ(g, x) is the Galois
/// representation of the reduction word accumulated while flowing x by g.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperbolic_locus.hpp"
#include "mat2.hpp"
#include "veech_octagon.hpp"

namespace octoflow {

inline constexpr std::size_t kMaxWordLetters = 1'000'000;

struct CocycleValue {
  GroupWord word;
  ScaledMat numeric;         ///< phi1 value of galois_rep(word), log-scaled
  double horizontal_log = 0;  ///< exponent of the scalar factor on the horizontal line

  ExactMat exact() const { return galois_rep(word); }
  double log_norm() const { return numeric.log_norm(); }
  double norm() const { return std::exp(log_norm()); }

  /// Post-composes with the cocycle of a later segment: word w then v gives rep(v) rep(w).
  void append(const GroupWord& later) {
    word *= later;
    if (word.size() > kMaxWordLetters)
      throw std::length_error("cocycle word exceeds " + std::to_string(kMaxWordLetters) + " letters");
    const ScaledMat step = galois_rep_numeric(later);
    numeric = step * numeric;
  }
};

struct CocycleRun {
  CocycleValue value;
  LocusPoint end;
};

/// Follows the path step by step from a reduced point.
inline CocycleRun kz_along(const LocusPoint& x, const std::vector<FlowStep>& path) {
  CocycleRun run{{}, x};
  for (const auto& st : path) {
    Advance a = advance(run.end, st.kind, st.param);
    run.value.append(a.step_word);
    if (st.kind == FlowKind::geodesic) run.value.horizontal_log += st.param;
    run.end = a.point;
  }
  return run;
}

inline CocycleValue kz_geodesic(const LocusPoint& x, double t) { return kz_along(x, {{FlowKind::geodesic, t}}).value; }

/// A line through the origin, stored as an angle in [0, pi).
struct Direction {
  double angle = 0.0;

  static Direction of(Vec2 v) { return {line_angle(v)}; }
  Vec2 unit() const { return {std::cos(angle), std::sin(angle)}; }
  Vec2 perp() const { return {-std::sin(angle), std::cos(angle)}; }
  double sin_dist(const Direction& o) const { return std::fabs(std::sin(angle - o.angle)); }
};

struct XiPair {
  Direction in;
  Direction out;
};

/// Most contracted input and most expanded output singular directions.
inline XiPair xi_directions(const Mat2& m) {
  const Svd2 s = svd(m);
  if (!(std::fabs(s.s1) >= std::fabs(s.s2) * (1.0 + 1e-9)))
    throw std::domain_error("xi_directions: singular values not separated");
  return {Direction::of(s.contracted_input()), Direction::of(s.expanded_output())};
}

inline Direction xi_in(const Mat2& m) { return xi_directions(m).in; }

struct SingularProductReport {
  bool skipped = false;
  // |<C^{-1} xi_in(B), xi_in(BC)^perp>| <= (|C| / |B|)^2
  double lhs1 = 0, rhs1 = 0;
  // |<xi_in(BC), xi_in(ABC)^perp>| <= (|A| / |BC|)^2
  double lhs2 = 0, rhs2 = 0;
  // sin^2 of the angle between xi_in(ABC) and C^{-1} xi_in(B) <= (|A|^2 + |C|^2) / |B|^2
  double lhs3 = 0, rhs3 = 0;
  // |sin| of the same angle <= |C|^2/|B|^2 + |A|^2/|BC|^2, from the first two by the triangle inequality
  double lhs_chain = 0, rhs_chain = 0;

  double margin1() const { return rhs1 - lhs1; }
  double margin2() const { return rhs2 - lhs2; }
  double margin3() const { return rhs3 - lhs3; }
  double margin_chain() const { return rhs_chain - lhs_chain; }
  bool holds() const { return !skipped && margin1() >= 0 && margin2() >= 0 && margin3() >= 0; }
};

inline SingularProductReport singular_product_check(const Mat2& A, const Mat2& B, const Mat2& C, double min_norm) {
  SingularProductReport r;
  const Mat2 BC = B * C, ABC = A * BC;
  const double nA = A.spectral_norm(), nB = B.spectral_norm(), nC = C.spectral_norm(), nBC = BC.spectral_norm();
  if (nB < min_norm || nBC < min_norm || ABC.spectral_norm() < min_norm) {
    r.skipped = true;
    return r;
  }
  const Direction xb = xi_in(B), xbc = xi_in(BC), xabc = xi_in(ABC);
  const Vec2 cv = C.inverse() * xb.unit();
  const Direction pulled = Direction::of(cv);
  r.lhs1 = std::fabs(dot(pulled.unit(), xbc.perp()));
  r.rhs1 = (nC / nB) * (nC / nB);
  r.lhs2 = std::fabs(dot(xbc.unit(), xabc.perp()));
  r.rhs2 = (nA / nBC) * (nA / nBC);
  const double s = xabc.sin_dist(pulled);
  r.lhs3 = s * s;
  r.rhs3 = (nA * nA + nC * nC) / (nB * nB);
  r.lhs_chain = s;
  r.rhs_chain = r.rhs1 + r.rhs2;
  return r;
}

/// |M v|.
inline double norm_and_vector(const Mat2& m, Vec2 v) { return (m * v).norm(); }

/// log |M v| for a log-scaled matrix.
inline double log_norm_and_vector(const ScaledMat& m, Vec2 v) { return m.log_scale + std::log((m.m * v).norm()); }

}  // namespace octoflow
