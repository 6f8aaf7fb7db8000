// octoflow: verification suite and experiment drivers for the octagon locus.

#include <octoflow/experiments.hpp>
#include <octoflow/report.hpp>
#include <octoflow/verify.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <thread>

using namespace octoflow;
using report::json;

namespace {

constexpr int kOk = 0, kFailed = 1, kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string out;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());

  double t = 12.0;
  std::size_t n = 10000;
  double kappa = 0.1;
  double rho = 0.05;
  double eps = 0.01;
  double eps2 = 0.05;
  int bins = 64;
  double tail = 0.01;
  double v_angle = std::numbers::pi / 2;
  std::string rows;

  std::size_t haar_n = 0;
  BumpSpec bump;

  std::vector<double> ts{2, 4, 6, 8, 10, 12, 14};
  double cut = 4.0;

  double window = -1.0;
  double c_tilde = 1.0;
  std::size_t doubling_n = 20000;
  std::string orbit = "tau1";

  double s = 0.0;
  double lmax = 1.0;
  std::size_t grid = 41;
  std::string tremor = "sigma";

  std::vector<double> frame;
};

CLI::Validator open_interval(double lo, double hi) {
  return CLI::Validator(
      [lo, hi](std::string& v) -> std::string {
        double x = 0;
        try {
          std::size_t pos = 0;
          x = std::stod(v, &pos);
          if (pos != v.size()) return "not a number: " + v;
        } catch (const std::exception&) {
          return "not a number: " + v;
        }
        if (!(x > lo && x < hi)) {
          std::ostringstream os;
          os << "value " << v << " must lie strictly between " << lo << " and " << hi;
          return os.str();
        }
        return {};
      },
      "OPEN_INTERVAL");
}

const CLI::Range kNonNegative(0.0, std::numeric_limits<double>::max(), "NONNEGATIVE");

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

/// Record of the parameters that determine the result; replaying it as --config reproduces the report.
json config_block(const RunConfig& c) {
  json j{{"command", c.command}, {"seed", c.seed}, {"format", c.format}};
  const std::string& k = c.command;
  if (k == "verify") j["eps"] = c.eps;
  if (k == "scan") {
    j.update({{"t", c.t}, {"n", c.n}, {"kappa", c.kappa}, {"bins", c.bins}, {"tail", c.tail}, {"v-angle", c.v_angle}});
  }
  if (k == "equi") {
    j.update({{"t", c.t},
              {"n", c.n},
              {"haar-n", c.haar_n},
              {"height-center", c.bump.height_center},
              {"height-width", c.bump.height_width},
              {"angle-center", c.bump.angle_center},
              {"angle-width", c.bump.angle_width}});
  }
  if (k == "recur") j.update({{"ts", c.ts}, {"cut", c.cut}, {"n", c.n}});
  if (k == "match") {
    j.update({{"eps", c.eps}, {"eps2", c.eps2}, {"t", c.t}, {"n", c.n}, {"window", c.window}, {"c-tilde", c.c_tilde},
              {"doubling-n", c.doubling_n}});
  }
  if (k == "doubling") j.update({{"orbit", c.orbit}, {"rho", c.rho}, {"n", c.n}, {"window", c.window}});
  if (k == "tremor") j.update({{"s", c.s}, {"lmax", c.lmax}, {"grid", c.grid}, {"tremor", c.tremor}});
  if (k == "avoid") j.update({{"t", c.t}, {"rho", c.rho}, {"n", c.n}, {"grid", c.grid}, {"kappa", c.kappa}});
  if (k == "locus") {
    j.update({{"s", c.s}, {"t", c.t}});
    if (!c.frame.empty()) j["frame"] = c.frame;
  }
  return j;
}

struct Output {
  json body;
  std::string csv;
  bool failed = false;
};

// ---------------------------------------------------------------------------
// Commands

Output run_verify(const RunConfig& c) {
  Output o;
  const auto checks = verify::run_suite(c.seed);
  json rows = json::array();
  o.csv = "check,pass,detail\n";
  for (const auto& ch : checks) {
    rows.push_back({{"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
    o.csv += ch.name + "," + (ch.pass ? "pass" : "FAIL") + "," + csv_field(ch.detail) + "\n";
    o.failed = o.failed || !ch.pass;
  }
  json gens = json::object();
  for (const auto& [name, m] : generators()) gens[name] = report::to_json(m);
  const auto tr = verify::traces();
  json cert{{"generators", gens},
            {"traces",
             {{"tau1", tr.tau1.str()},
              {"tau2", tr.tau2.str()},
              {"sigma_tau1", tr.sigma_tau1.str()},
              {"sigma_tau2", tr.sigma_tau2.str()},
              {"stated_tau2", verify::stated_trace_tau2().str()},
              {"stated_sigma_tau1", verify::stated_trace_sigma_tau1().str()},
              {"tau2_mismatch", tr.tau2 != verify::stated_trace_tau2()},
              {"sigma_tau1_mismatch", tr.sigma_tau1 != verify::stated_trace_sigma_tau1()}}}};
  try {
    cert["schottky_N"] = schottky_power(20);
  } catch (const std::exception&) {
    cert["schottky_N"] = nullptr;
  }
  try {
    const PseudoAnosovPair p = pseudo_anosov_pair(c.eps);
    cert["pseudo_anosov_pair"] = {{"word_a", report::to_json(p.word_a)}, {"word_b", report::to_json(p.word_b)},
                                  {"p", p.p},
                                  {"q", p.q},
                                  {"period_a", p.ell_a},
                                  {"period_b", p.ell_b},
                                  {"log_norm_a", p.log_norm_a},
                                  {"log_norm_b", p.log_norm_b},
                                  {"norm_ratio", p.ratio()}};
  } catch (const std::runtime_error& e) {
    cert["pseudo_anosov_pair"] = {{"error", e.what()}};
    o.failed = true;
  }
  o.body = {{"checks", rows}, {"certificate", cert}, {"pass", !o.failed}};
  return o;
}

Output run_scan(const RunConfig& c) {
  ScanOptions opt;
  opt.tail = c.tail;
  opt.bins = c.bins;
  opt.workers = c.workers;
  const Direction v{c.v_angle};
  const ScanReport r = norm_scan(c.t, v, c.n, c.kappa, c.seed, opt);
  if (!c.rows.empty()) {
    const auto s = stratified_unit(c.n, c.seed, c.workers);
    const auto rows = detail::chunked_map<report::CocycleRow>(c.n, c.seed, c.workers, [&](std::size_t i, std::mt19937_64&) {
      const CocycleValue k = kz_push(s[i], c.t);
      report::CocycleRow row{s[i], c.t, k.log_norm(), log_norm_and_vector(k.numeric, v.unit()), 0.0, 0.0};
      try {
        const XiPair xi = xi_directions(k.numeric.m);
        row.xi_in = xi.in.angle;
        row.xi_out = xi.out.angle;
      } catch (const std::domain_error&) {
        row.xi_in = row.xi_out = std::numeric_limits<double>::quiet_NaN();
      }
      return row;
    });
    report::write_file(c.rows, report::cocycle_rows_csv(rows));
  }
  return {report::to_json(r), report::histogram_csv(r.histogram), false};
}

Output run_equi(const RunConfig& c) {
  const EquiReport r = equidistribution_test(c.t, c.bump, c.n, c.seed, c.workers, c.haar_n);
  std::string csv = "t,n,orbit_avg,orbit_se,haar_avg,deviation\n";
  for (double v : {r.t, static_cast<double>(r.n), r.orbit_avg, r.orbit_se, r.haar_avg}) csv += report::format_double(v) + ",";
  csv += report::format_double(r.deviation) + "\n";
  return {report::to_json(r), csv, false};
}

Output run_recur(const RunConfig& c) {
  const RecurrenceReport r = recurrence_profile(c.ts, c.cut, c.n, c.seed, c.workers);
  std::string csv = "t,fraction,mean_sqrt_height,bound\n";
  for (const auto& row : r.rows)
    csv += report::format_double(row.t) + "," + report::format_double(row.fraction) + "," +
           report::format_double(row.mean_sqrt_height) + "," + report::format_double(r.bound) + "\n";
  return {report::to_json(r), csv, false};
}

Output run_match(const RunConfig& c) {
  MatchingOptions opt;
  opt.window = c.window;
  opt.c_tilde = c.c_tilde;
  opt.doubling_samples = c.doubling_n;
  opt.workers = c.workers;
  const MatchingReport r = matching_demo(c.eps, c.eps2, c.t, c.n, c.seed, opt);
  return {report::to_json(r), report::histogram_csv(r.ratio_histogram), false};
}

Output run_doubling(const RunConfig& c) {
  const PeriodicOrbit o = periodic_orbit(c.orbit == "tau1" ? tau1_word() : tau2_word());
  const DoublingReport r = bowen_doubling(o, c.rho, c.n, c.seed, c.window, c.workers);
  json body = report::to_json(r);
  body["orbit"] = {{"word", report::to_json(o.word)}, {"period", o.period}, {"center", report::to_json(o.center)}};
  std::string csv = "radius,mass,mass_half,ratio\n" + report::format_double(r.radius) + "," + report::format_double(r.mass) +
                    "," + report::format_double(r.mass_half) + "," + report::format_double(r.ratio()) + "\n";
  return {body, csv, false};
}

Output run_tremor(const RunConfig& c) {
  const auto w = omega1_surface().numeric();
  const auto x = horocycle_act(w, c.s, Twist::lifted);
  const TremorVector<double> tv = c.tremor == "dy" ? TremorVector<double>::dy() : sigma_tremor(x);
  const auto q = period_point(period_coordinates(x));
  const auto beta = period_point(tremor_class(x, tv));
  const Quadratic P = distance_polynomial(q, beta, tautological_basis(x));
  std::vector<report::TremorRow> rows;
  json jrows = json::array();
  for (std::size_t i = 0; i < c.grid; ++i) {
    const double ell = c.grid == 1 ? 0.0 : -c.lmax + 2.0 * c.lmax * static_cast<double>(i) / static_cast<double>(c.grid - 1);
    const auto y = tremor_path(x, tv, ell, Twist::lifted);
    rows.push_back({ell, y, distance_to_locus(y)});
    jrows.push_back({{"ell", ell}, {"surface", report::to_json(y)}, {"distance", rows.back().distance}});
  }
  json body{{"surface", report::to_json(x)},
            {"tremor", {{"w_a", tv.w_a}, {"w_b", tv.w_b}}},
            {"tremor_class", beta},
            {"polynomial", {{"p0", P.p0}, {"p1", P.p1}, {"p2", P.p2}}},
            {"bal_norm_squared", std::pow(bal_part_norm(beta), 2)},
            {"balanced", std::fabs(P.p2) > 0},
            {"path", jrows}};
  return {body, report::tremor_rows_csv(rows), false};
}

Output run_avoid(const RunConfig& c) {
  const AvoidanceReport r = avoidance_scan(c.t, c.rho, c.n, c.grid, c.seed, c.kappa, c.workers);
  return {report::to_json(r), report::occupancy_csv(r), false};
}

Output run_locus(const RunConfig& c) {
  Mat2 g = geodesic(c.t) * horocycle(c.s) * omega1_frame();
  if (!c.frame.empty()) {
    if (c.frame.size() != 4) throw UsageError("--frame: expected 4 values");
    g = {c.frame[0], c.frame[1], c.frame[2], c.frame[3]};
  }
  const LocusPoint p = reduce(g);
  json body{{"input", report::to_json(g)},
            {"point", report::to_json(p)},
            {"height", point_height(p.frame)},
            {"angle", frame_angle(p.frame)}};
  std::string csv = "a,b,c,d,height\n";
  for (double v : {p.frame.a, p.frame.b, p.frame.c, p.frame.d}) csv += report::format_double(v) + ",";
  csv += report::format_double(point_height(p.frame)) + "\n";
  return {body, csv, false};
}

// ---------------------------------------------------------------------------
// Config files

std::string arg_text(const json& v) {
  if (v.is_number_float()) return report::format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

/// Fills options absent from the command line with values from a JSON config.
void apply_config(const json& cfg, CLI::App& app, CLI::App& sub) {
  if (!cfg.is_object()) throw UsageError("--config: top level must be a JSON object");
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    if (it.key() == "command") continue;
    CLI::Option* opt = sub.get_option_no_throw("--" + it.key());
    if (!opt) opt = app.get_option_no_throw("--" + it.key());
    if (!opt) throw UsageError("--config: unknown key '" + it.key() + "' for command " + sub.get_name());
    if (opt->count() > 0) continue;
    if (it.value().is_array()) {
      std::vector<std::string> vals;
      for (const auto& e : it.value()) vals.push_back(arg_text(e));
      opt->add_result(vals);
    } else {
      opt->add_result(arg_text(it.value()));
    }
    opt->run_callback();
  }
}

json read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("--config: cannot read " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw UsageError("--config: " + path + ": " + e.what());
  }
}

std::string output_path(const RunConfig& c) {
  if (!c.out.empty()) return c.out;
  if (const char* dir = std::getenv("OCTOFLOW_OUT"); dir && *dir) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / (c.command + "." + c.format)).string();
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  std::string config_path;

  CLI::App app{"Horocycle and tremor experiments over the octagon locus"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  app.add_option("--seed", cfg.seed, "64-bit RNG seed");
  app.add_option("--out", cfg.out, "output file (default: $OCTOFLOW_OUT/<command>.<format>, else stdout)");
  app.add_option("--format", cfg.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--workers", cfg.workers, "worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--config", config_path, "JSON config with the same keys as the flags; flags take precedence");

  auto* verify_cmd = app.add_subcommand("verify", "exact-algebra suite and pseudo-Anosov certificate");
  verify_cmd->add_option("--eps", cfg.eps, "target norm ratio of the pseudo-Anosov pair")->check(open_interval(0, 1));

  auto* scan = app.add_subcommand("scan", "cocycle norm distribution along a pushed horocycle");
  scan->add_option("--t", cfg.t, "geodesic time")->check(kNonNegative);
  scan->add_option("--n", cfg.n, "samples")->check(CLI::Range(std::size_t{1000}, std::size_t{100000000}));
  scan->add_option("--kappa", cfg.kappa)->check(open_interval(0, 1));
  scan->add_option("--bins", cfg.bins)->check(CLI::Range(1, 100000));
  scan->add_option("--tail", cfg.tail, "distribution-function threshold for r0")->check(open_interval(0, 1));
  scan->add_option("--v-angle", cfg.v_angle, "angle of the test vector");
  scan->add_option("--rows", cfg.rows, "also write per-sample cocycle rows as CSV");

  auto* equi = app.add_subcommand("equi", "horocycle-push average of a bump against its Haar average");
  equi->add_option("--t", cfg.t)->check(kNonNegative);
  equi->add_option("--n", cfg.n)->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
  equi->add_option("--haar-n", cfg.haar_n, "optional Haar Monte-Carlo cross-check size");
  equi->add_option("--height-center", cfg.bump.height_center);
  equi->add_option("--height-width", cfg.bump.height_width)->check(CLI::PositiveNumber);
  equi->add_option("--angle-center", cfg.bump.angle_center);
  equi->add_option("--angle-width", cfg.bump.angle_width)->check(CLI::PositiveNumber);

  auto* recur = app.add_subcommand("recur", "cusp excursion fractions along pushed horocycles");
  recur->add_option("--ts", cfg.ts, "geodesic times")->check(kNonNegative);
  recur->add_option("--cut", cfg.cut, "height cut")->check(CLI::PositiveNumber);
  recur->add_option("--n", cfg.n)->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));

  auto* match = app.add_subcommand("match", "Bowen-ball visit matching for a pseudo-Anosov pair");
  match->add_option("--eps", cfg.eps)->check(open_interval(0, 1));
  match->add_option("--eps2", cfg.eps2, "Bowen radius")->check(open_interval(0, 0.5));
  match->add_option("--t", cfg.t)->check(CLI::PositiveNumber);
  match->add_option("--n", cfg.n)->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
  match->add_option("--window", cfg.window, "cap on the Bowen windows (<= 0: full periods)");
  match->add_option("--c-tilde", cfg.c_tilde)->check(CLI::PositiveNumber);
  match->add_option("--doubling-n", cfg.doubling_n)->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));

  auto* doubling = app.add_subcommand("doubling", "Bowen-ball masses at radii rho and rho/2");
  doubling->add_option("--orbit", cfg.orbit)->check(CLI::IsMember({"tau1", "tau2"}));
  doubling->add_option("--rho", cfg.rho)->check(open_interval(0, 0.5));
  doubling->add_option("--n", cfg.n)->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
  doubling->add_option("--window", cfg.window, "Bowen window (<= 0: the period)");

  auto* tremor = app.add_subcommand("tremor", "tremor path from a point of the periodic horocycle");
  tremor->add_option("--s", cfg.s, "horocycle parameter of the base point");
  tremor->add_option("--lmax", cfg.lmax, "path runs over [-lmax, lmax]")->check(CLI::PositiveNumber);
  tremor->add_option("--grid", cfg.grid)->check(CLI::Range(std::size_t{1}, std::size_t{10000000}));
  tremor->add_option("--tremor", cfg.tremor)->check(CLI::IsMember({"sigma", "dy"}));

  auto* avoid = app.add_subcommand("avoid", "distance of pushed tremor points to the locus");
  avoid->add_option("--t", cfg.t)->check(kNonNegative);
  avoid->add_option("--rho", cfg.rho)->check(open_interval(0, 1));
  avoid->add_option("--n", cfg.n)->check(CLI::Range(std::size_t{1000}, std::size_t{100000000}));
  avoid->add_option("--grid", cfg.grid, "tremor parameters per horocycle point")
      ->check(CLI::Range(std::size_t{2}, std::size_t{10000000}));
  avoid->add_option("--kappa", cfg.kappa)->check(open_interval(0, 1));

  auto* locus = app.add_subcommand("locus", "reduce g_t u_s omega1 (or a given frame) into the fundamental domain");
  locus->add_option("--s", cfg.s);
  locus->add_option("--t", cfg.t);
  locus->add_option("--frame", cfg.frame, "a b c d");

  try {
    app.parse(argc, argv);
    json file_cfg;
    if (!config_path.empty()) file_cfg = read_config(config_path);
    CLI::App* sub = nullptr;
    for (CLI::App* s : app.get_subcommands()) sub = s;
    if (!sub && file_cfg.contains("command")) {
      std::vector<std::string> args(argv + 1, argv + argc);
      args.push_back(file_cfg["command"].get<std::string>());
      std::reverse(args.begin(), args.end());
      app.clear();
      cfg = RunConfig{};
      config_path.clear();
      app.parse(args);
      for (CLI::App* s : app.get_subcommands()) sub = s;
    }
    if (!sub) {
      std::cerr << app.help();
      return kUsage;
    }
    if (file_cfg.contains("command") && file_cfg["command"] != sub->get_name())
      throw UsageError("--config: command '" + arg_text(file_cfg["command"]) + "' does not match " + sub->get_name());
    if (!file_cfg.is_null()) apply_config(file_cfg, app, *sub);
    cfg.command = sub->get_name();
    if (cfg.command == "equi") cfg.bump.validate();
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  }

  Output out;
  try {
    const std::string& k = cfg.command;
    if (k == "verify") out = run_verify(cfg);
    else if (k == "scan") out = run_scan(cfg);
    else if (k == "equi") out = run_equi(cfg);
    else if (k == "recur") out = run_recur(cfg);
    else if (k == "match") out = run_match(cfg);
    else if (k == "doubling") out = run_doubling(cfg);
    else if (k == "tremor") out = run_tremor(cfg);
    else if (k == "avoid") out = run_avoid(cfg);
    else out = run_locus(cfg);
  } catch (const UsageError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameters: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << cfg.command << " failed: " << e.what() << "\n";
    return kFailed;
  }

  std::string text;
  if (cfg.format == "csv") {
    text = "# seed " + std::to_string(cfg.seed) + "\n" + out.csv;
  } else {
    text = report::dump({{"command", cfg.command}, {"config", config_block(cfg)}, {"report", out.body}});
  }
  try {
    const std::string path = output_path(cfg);
    if (cfg.command == "verify") {
      std::ostream& table = path.empty() ? std::cerr : std::cout;
      for (const auto& row : out.body["checks"])
        table << (row["pass"].get<bool>() ? "PASS  " : "FAIL  ") << row["name"].get<std::string>() << "  "
              << row["detail"].get<std::string>() << "\n";
    }
    if (path.empty())
      std::cout << text;
    else
      report::write_file(path, text);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kFailed;
  }
  return out.failed ? kFailed : kOk;
}
