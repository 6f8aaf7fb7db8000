#pragma once

/// JSON and CSV emission for experiment reports. Output is byte-stable:
/// object keys are sorted and floats carry 17 significant digits.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "experiments.hpp"
#include "surfaces_tremor.hpp"

namespace octoflow::report {

using json = nlohmann::json;

/// %.17g, with a trailing ".0" when the text would otherwise parse as an integer.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "\"nan\"";
  if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

namespace detail {

inline void indent(std::string& out, int depth) { out.append(static_cast<std::size_t>(2 * depth), ' '); }

inline void write(const json& j, std::string& out, int depth) {
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map storage: keys already sorted
        if (!first) out += ",\n";
        first = false;
        indent(out, depth + 1);
        out += json(it.key()).dump();
        out += ": ";
        write(it.value(), out, depth + 1);
      }
      out += "\n";
      indent(out, depth);
      out += "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      out += "[";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) {
          out += "\n";
          indent(out, depth + 1);
        }
        write(e, out, depth + 1);
      }
      if (!flat) {
        out += "\n";
        indent(out, depth);
      }
      out += "]";
      return;
    }
    case json::value_t::number_float: out += format_double(j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

}  // namespace detail

/// Deterministic pretty-printed dump.
inline std::string dump(const json& j) {
  std::string out;
  detail::write(j, out, 0);
  out += "\n";
  return out;
}

/// Inverse of the non-finite encoding used by format_double.
inline double as_double(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw std::invalid_argument("as_double: not a number: " + s);
  }
  return j.get<double>();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing: " + std::strerror(errno));
  f << content;
  f.flush();
  if (!f) throw std::runtime_error("write failed for " + path);
}

// ---------------------------------------------------------------------------
// Exact values and locus points

inline json to_json(const QSqrt2& x) { return x.str(); }

inline json to_json(const ExactMat& m) { return json::array({m.e[0].str(), m.e[1].str(), m.e[2].str(), m.e[3].str()}); }

inline json to_json(const Mat2& m) { return json::array({m.a, m.b, m.c, m.d}); }

inline json to_json(const GroupWord& w) { return w.tokens(); }

inline json to_json(const LocusPoint& p) {
  return {{"frame", to_json(p.frame)}, {"word", to_json(p.word)}, {"certified", p.certified}, {"tie", p.tie}};
}

inline LocusPoint locus_point_from_json(const json& j) {
  LocusPoint p;
  const auto f = j.at("frame");
  p.frame = {as_double(f.at(0)), as_double(f.at(1)), as_double(f.at(2)), as_double(f.at(3))};
  p.word = GroupWord::from_tokens(j.at("word").get<std::vector<std::string>>());
  p.certified = j.at("certified").get<bool>();
  p.tie = j.at("tie").get<bool>();
  return p;
}

template <class S>
json to_json(const TwoCylinderSurface<S>& x) {
  auto v = [](const S& s) -> json {
    if constexpr (std::is_same_v<S, QSqrt2>)
      return s.str();
    else
      return static_cast<double>(s);
  };
  return {{"c_a", v(x.c_a)}, {"c_b", v(x.c_b)}, {"h_a", v(x.h_a)}, {"h_b", v(x.h_b)}, {"tw_a", v(x.tw_a)}, {"tw_b", v(x.tw_b)}};
}

// ---------------------------------------------------------------------------
// Experiment reports

inline json to_json(const Histogram& h) { return {{"edges", h.edges}, {"mass", h.mass}}; }

/// Rows bin_left,bin_right,mass; one per bin.
inline std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_left,bin_right,mass\n";
  for (std::size_t k = 0; k < h.mass.size(); ++k)
    out += format_double(h.edges[k]) + "," + format_double(h.edges[k + 1]) + "," + format_double(h.mass[k]) + "\n";
  return out;
}

inline json to_json(const ScanReport& r) {
  return {{"t", r.t},
          {"n_samples", r.n_samples},
          {"kappa", r.kappa},
          {"v_angle", r.v_angle},
          {"seed", r.seed},
          {"tail", r.tail},
          {"histogram", to_json(r.histogram)},
          {"log_r0", r.log_r0},
          {"log_C_t", r.log_C_t},
          {"C_t", std::exp(r.log_C_t)},
          {"big", r.big},
          {"small", r.small},
          {"middle", r.middle},
          {"big_count", r.big_count},
          {"small_count", r.small_count},
          {"middle_count", r.middle_count},
          {"concentration", r.concentration},
          {"degenerate", r.degenerate},
          {"thresholds",
           {{"asymptotic_tail", ScanReport::asymptotic_tail},
            {"asymptotic_concentration", r.asymptotic_concentration()},
            {"desk_tail", ScanReport::desk_tail},
            {"desk_concentration", ScanReport::desk_concentration}}},
          {"desk_pass", r.desk_pass()}};
}

/// Per-sample cocycle rows: s, t, log|KZ|, log|KZ v|, xi_in angle, xi_out angle.
struct CocycleRow {
  double s = 0, t = 0, log_norm = 0, log_norm_v = 0, xi_in = 0, xi_out = 0;
};

inline std::string cocycle_rows_csv(const std::vector<CocycleRow>& rows) {
  std::string out = "s,t,log_norm,log_norm_v,xi_in,xi_out\n";
  for (const auto& r : rows)
    out += format_double(r.s) + "," + format_double(r.t) + "," + format_double(r.log_norm) + "," +
           format_double(r.log_norm_v) + "," + format_double(r.xi_in) + "," + format_double(r.xi_out) + "\n";
  return out;
}

inline json to_json(const BumpSpec& f) {
  return {{"constant", f.constant},
          {"height_center", f.height_center},
          {"height_width", f.height_width},
          {"angle_center", f.angle_center},
          {"angle_width", f.angle_width}};
}

inline json to_json(const EquiReport& r) {
  return {{"t", r.t},          {"n", r.n},
          {"seed", r.seed},    {"f", to_json(r.f)},
          {"orbit_avg", r.orbit_avg}, {"orbit_se", r.orbit_se},
          {"haar_avg", r.haar_avg},   {"haar_mc", r.haar_mc},
          {"haar_mc_se", r.haar_mc_se}, {"deviation", r.deviation}};
}

inline json to_json(const RecurrenceReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"t", row.t}, {"fraction", row.fraction}, {"mean_sqrt_height", row.mean_sqrt_height}});
  return {{"height_cut", r.height_cut}, {"n", r.n},         {"seed", r.seed},          {"haar_tail_half", r.haar_tail_half},
          {"bound", r.bound},           {"rows", rows},     {"bounded", r.bounded()}};
}

inline json to_json(const DoublingReport& r) {
  return {{"radius", r.radius}, {"window", r.window}, {"n", r.n},       {"seed", r.seed},
          {"mass", r.mass},     {"mass_half", r.mass_half}, {"hits", r.hits}, {"hits_half", r.hits_half},
          {"ratio", r.ratio()}};
}

inline json to_json(const MatchingReport& r) {
  return {{"eps", r.eps},
          {"eps2", r.eps2},
          {"t", r.t},
          {"n", r.n},
          {"seed", r.seed},
          {"conclusive", r.conclusive},
          {"note", r.note},
          {"window_a", r.window_a},
          {"window_b", r.window_b},
          {"period_a", r.period_a},
          {"period_b", r.period_b},
          {"pair_ratio", r.pair_ratio},
          {"visits_a", r.visits_a},
          {"visits_b", r.visits_b},
          {"visit_freq_a", r.visit_freq_a},
          {"visit_freq_b", r.visit_freq_b},
          {"haar_mass_a", r.haar_mass_a},
          {"haar_mass_b", r.haar_mass_b},
          {"matched", r.matched},
          {"ratio_histogram", to_json(r.ratio_histogram)},
          {"c_tilde", r.c_tilde},
          {"fraction_below", r.fraction_below}};
}

inline json to_json(const AvoidanceReport& r) {
  return {{"t", r.t},
          {"rho", r.rho},
          {"kappa", r.kappa},
          {"n_s", r.n_s},
          {"n_l", r.n_l},
          {"seed", r.seed},
          {"log_C_t", r.log_C_t},
          {"ell_max", r.ell_max},
          {"small_s", r.small_s},
          {"small_points", r.small_points},
          {"small_within", r.small_within},
          {"small_max_distance", r.small_max_distance},
          {"big_s", r.big_s},
          {"deltas", r.deltas},
          {"occupancy", r.occupancy},
          {"linear_ratio_worst", r.linear_ratio_worst},
          {"s_branch_pass", r.s_branch_pass()},
          {"b_branch_pass", r.b_branch_pass()}};
}

/// Occupancy table as CSV rows delta,occupancy.
inline std::string occupancy_csv(const AvoidanceReport& r) {
  std::string out = "delta,occupancy\n";
  for (std::size_t k = 0; k < r.deltas.size(); ++k) out += format_double(r.deltas[k]) + "," + format_double(r.occupancy[k]) + "\n";
  return out;
}

/// One point of a tremor path dump.
struct TremorRow {
  double ell = 0;
  TwoCylinderSurface<double> surface;
  double distance = 0;
};

inline std::string tremor_rows_csv(const std::vector<TremorRow>& rows) {
  std::string out = "ell,c_a,c_b,h_a,h_b,tw_a,tw_b,distance\n";
  for (const auto& r : rows) {
    const auto& x = r.surface;
    out += format_double(r.ell);
    for (double v : {x.c_a, x.c_b, x.h_a, x.h_b, x.tw_a, x.tw_b, r.distance}) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

}  // namespace octoflow::report
