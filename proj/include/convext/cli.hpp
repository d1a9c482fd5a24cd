#pragma once

// Configuration-driven front end.  A run is one subcommand applied to one
// JSON config file; everything a run needs (measure, grid, exponents, region,
// solver settings, seed) lives in the config, and every report embeds the
// fully resolved config so artifacts are self-describing.  Parsing is strict:
// unknown keys are rejected wherever they appear, so a typo fails the run
// instead of silently falling back to a default.
//
// Artifacts land in the output directory: report.json always, plus
// subcommand-specific series (history.csv, bootstrap.csv, decompose.csv,
// kernel.csv, kappa_scan.csv) and grid functions (extremizer.gf with a CSV
// mirror).  Reports carry no timestamps or absolute paths, so identical
// config plus seed reproduces identical bytes single-threaded.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "convext/bubbles.hpp"
#include "convext/conv_operator.hpp"
#include "convext/errors.hpp"
#include "convext/extremizer.hpp"
#include "convext/grid.hpp"
#include "convext/io.hpp"
#include "convext/measure.hpp"
#include "convext/riesz.hpp"
#include "convext/verify.hpp"

namespace convext::cli {

using json = nlohmann::ordered_json;

// Flag-level overrides; they beat the environment, which beats the config.
struct Overrides {
  std::optional<std::string> output_dir;
  std::optional<int> threads;
};

namespace detail {

// JSON cannot hold non-finite numbers; sentinels become strings.
inline json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0.0 ? "inf" : "-inf";
}

inline void expect_object(const json& v, const std::string& where) {
  if (!v.is_object())
    throw precondition_error("config: " + where + " must be an object");
}

inline void check_keys(const json& obj, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  expect_object(obj, where);
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw precondition_error("config: unknown key \"" + item.key() +
                               "\" in " + where);
  }
}

inline const json& require(const json& obj, const std::string& where,
                           const char* key) {
  expect_object(obj, where);
  const auto it = obj.find(key);
  if (it == obj.end())
    throw precondition_error("config: " + where + " is missing \"" + key + "\"");
  return *it;
}

inline double number(const json& obj, const std::string& where, const char* key) {
  const json& v = require(obj, where, key);
  if (!v.is_number())
    throw precondition_error("config: " + where + "." + key + " must be a number");
  return v.get<double>();
}

inline double number_or(const json& obj, const std::string& where,
                        const char* key, double dflt) {
  return obj.contains(key) ? number(obj, where, key) : dflt;
}

inline int integer(const json& obj, const std::string& where, const char* key) {
  const json& v = require(obj, where, key);
  if (!v.is_number_integer())
    throw precondition_error("config: " + where + "." + key +
                             " must be an integer");
  return v.get<int>();
}

inline int integer_or(const json& obj, const std::string& where,
                      const char* key, int dflt) {
  return obj.contains(key) ? integer(obj, where, key) : dflt;
}

inline std::string str(const json& obj, const std::string& where, const char* key) {
  const json& v = require(obj, where, key);
  if (!v.is_string())
    throw precondition_error("config: " + where + "." + key + " must be a string");
  return v.get<std::string>();
}

// Relative paths in a config resolve against the config file's directory, so
// a run directory can be moved or archived as a unit.
inline std::filesystem::path resolve_path(const std::string& raw,
                                          const std::filesystem::path& base) {
  std::filesystem::path p(raw);
  return p.is_absolute() ? p : base / p;
}

}  // namespace detail

struct Resolved {
  std::string subcommand;
  MeasureSpec measure;
  Grid grid;
  riesz::ExponentPair pair;
  riesz::Region region;
  SolverConfig solver;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 delegates to hardware_concurrency
  std::filesystem::path out_dir;
  std::filesystem::path base_dir;  // config file directory, for input paths
  json options;                    // resolved subcommand section
  json echo;                       // full resolved config, embedded in reports
};

namespace detail {

inline MeasureSpec parse_measure(const json& m, const std::filesystem::path& base,
                                 json& echo) {
  const std::string family = str(m, "measure", "family");
  echo["family"] = family;
  MeasureSpec spec = MeasureSpec::uniform();
  if (family == "uniform") {
    check_keys(m, "measure", {"family", "alpha", "support_radius"});
  } else if (family == "heat") {
    check_keys(m, "measure", {"family", "t", "alpha", "support_radius"});
    const double t = number(m, "measure", "t");
    spec = MeasureSpec::heat(t);
    echo["t"] = t;
  } else if (family == "mollified_two_point") {
    check_keys(m, "measure", {"family", "a", "eps", "alpha", "support_radius"});
    const double a = number(m, "measure", "a");
    const double eps = number(m, "measure", "eps");
    spec = MeasureSpec::mollified_two_point(a, eps);
    echo["a"] = a;
    echo["eps"] = eps;
  } else if (family == "mollified_sphere") {
    check_keys(m, "measure", {"family", "r", "eps", "alpha", "support_radius"});
    const double r = number(m, "measure", "r");
    const double eps = number(m, "measure", "eps");
    spec = MeasureSpec::mollified_sphere(r, eps);
    echo["r"] = r;
    echo["eps"] = eps;
  } else if (family == "custom_table") {
    check_keys(m, "measure", {"family", "path", "alpha", "support_radius"});
    const std::string path = str(m, "measure", "path");
    spec = MeasureSpec::custom_table(read_gridfn(resolve_path(path, base)));
    echo["path"] = path;
  } else {
    throw precondition_error("config: unknown measure family \"" + family + "\"");
  }
  if (m.contains("alpha")) {
    spec.alpha_hint = number(m, "measure", "alpha");
    echo["alpha"] = *spec.alpha_hint;
  }
  if (m.contains("support_radius")) {
    spec.declared_support_radius = number(m, "measure", "support_radius");
    echo["support_radius"] = *spec.declared_support_radius;
  }
  return spec;
}

inline Grid parse_grid(const json& g, json& echo) {
  const int dim = integer(g, "grid", "dim");
  const int n = integer(g, "grid", "n");
  const std::string domain = str(g, "grid", "domain");
  echo["dim"] = dim;
  echo["n"] = n;
  echo["domain"] = domain;
  if (domain == "torus") {
    check_keys(g, "grid", {"dim", "n", "domain"});
    return Grid::torus(dim, n);
  }
  if (domain == "windowed_box") {
    check_keys(g, "grid", {"dim", "n", "domain", "period"});
    const double period = number(g, "grid", "period");
    echo["period"] = period;
    return Grid::windowed(dim, n, period);
  }
  throw precondition_error("config: grid.domain must be \"torus\" or \"windowed_box\"");
}

inline riesz::Region parse_region(const json* r, json& echo) {
  if (r == nullptr) {
    echo["kind"] = "full_square";
    return riesz::Region::full_square();
  }
  const std::string kind = str(*r, "region", "kind");
  echo["kind"] = kind;
  if (kind == "full_square") {
    check_keys(*r, "region", {"kind"});
    return riesz::Region::full_square();
  }
  if (kind == "decay_triangle") {
    check_keys(*r, "region", {"kind", "p0", "q0"});
    const double p0 = number(*r, "region", "p0");
    const double q0 = number(*r, "region", "q0");
    echo["p0"] = p0;
    echo["q0"] = q0;
    return riesz::Region::decay_triangle(p0, q0);
  }
  if (kind == "polygon") {
    check_keys(*r, "region", {"kind", "vertices"});
    const json& vs = require(*r, "region", "vertices");
    if (!vs.is_array())
      throw precondition_error("config: region.vertices must be an array");
    std::vector<riesz::Point> pts;
    json evs = json::array();
    for (const json& v : vs) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw precondition_error("config: region vertex must be a [x, y] pair");
      pts.push_back({v[0].get<double>(), v[1].get<double>()});
      evs.push_back(json::array({v[0].get<double>(), v[1].get<double>()}));
    }
    echo["vertices"] = evs;
    return riesz::Region(std::move(pts));
  }
  throw precondition_error("config: unknown region kind \"" + kind + "\"");
}

inline SolverConfig parse_solver(const json* s, const riesz::ExponentPair& pair,
                                 const Grid& grid, std::uint64_t seed,
                                 const std::filesystem::path& base, json& echo) {
  SolverConfig cfg(pair);
  cfg.seed = seed;
  std::string init = "constant";
  std::string init_path;
  if (s != nullptr) {
    check_keys(*s, "solver",
               {"max_iter", "rel_tol", "restarts", "init", "init_path"});
    cfg.max_iter = integer_or(*s, "solver", "max_iter", cfg.max_iter);
    cfg.rel_tol = number_or(*s, "solver", "rel_tol", cfg.rel_tol);
    cfg.restarts = integer_or(*s, "solver", "restarts", cfg.restarts);
    if (s->contains("init")) init = str(*s, "solver", "init");
    if (s->contains("init_path")) init_path = str(*s, "solver", "init_path");
  }
  if (init == "constant") {
    cfg.init = InitKind::constant;
  } else if (init == "random_positive") {
    cfg.init = InitKind::random_positive;
  } else if (init == "user_supplied") {
    cfg.init = InitKind::user_supplied;
    if (init_path.empty())
      throw precondition_error("config: solver.init_path required for user_supplied init");
    cfg.user_init = read_gridfn(resolve_path(init_path, base));
  } else {
    throw precondition_error("config: unknown solver.init \"" + init + "\"");
  }
  if (!init_path.empty() && cfg.init != InitKind::user_supplied)
    throw precondition_error("config: solver.init_path only applies to user_supplied init");

  echo["max_iter"] = cfg.max_iter;
  echo["rel_tol"] = cfg.rel_tol;
  echo["restarts"] = cfg.restarts;
  echo["init"] = init;
  if (!init_path.empty()) echo["init_path"] = init_path;
  cfg.validate(grid);
  return cfg;
}

inline json parse_options(const json* opts, const std::string& sub) {
  const std::string where = sub + " options";
  json o;
  static const json empty = json::object();
  const json& in = opts ? *opts : empty;
  if (sub == "norm") {
    check_keys(in, where, {"oracle_restarts"});
    o["oracle_restarts"] = integer_or(in, where, "oracle_restarts", 6);
  } else if (sub == "solve" || sub == "verify") {
    if (sub == "verify") {
      check_keys(in, where, {"input_path", "n_sectors", "jensen_a", "lower_steps"});
      o["input_path"] = str(in, where, "input_path");
    } else {
      check_keys(in, where, {"n_sectors", "jensen_a", "lower_steps"});
    }
    o["n_sectors"] = integer_or(in, where, "n_sectors", 8);
    o["jensen_a"] = number_or(in, where, "jensen_a", 2.0);
    o["lower_steps"] = integer_or(in, where, "lower_steps", 1);
  } else if (sub == "decompose") {
    check_keys(in, where, {"input_path", "epsilons"});
    o["input_path"] = str(in, where, "input_path");
    const json& eps = require(in, where, "epsilons");
    if (!eps.is_array() || eps.empty())
      throw precondition_error("config: decompose.epsilons must be a nonempty array");
    json list = json::array();
    for (const json& e : eps) {
      if (!e.is_number())
        throw precondition_error("config: decompose.epsilons entries must be numbers");
      list.push_back(e.get<double>());
    }
    o["epsilons"] = list;
  } else if (sub == "localize") {
    check_keys(in, where, {"input_path", "eta", "norm_estimate", "eta_exponent"});
    o["input_path"] = str(in, where, "input_path");
    o["eta"] = number(in, where, "eta");
    if (in.contains("norm_estimate"))
      o["norm_estimate"] = number(in, where, "norm_estimate");
    o["eta_exponent"] = number_or(in, where, "eta_exponent", 0.5);
  } else if (sub == "bootstrap") {
    check_keys(in, where, {"tol", "max_iter"});
    o["tol"] = number_or(in, where, "tol", 1e-9);
    o["max_iter"] = integer_or(in, where, "max_iter", 100);
  } else if (sub == "kernel") {
    check_keys(in, where, {"n_power", "radius", "n_max"});
    o["n_power"] = integer_or(in, where, "n_power", 1);
    if (in.contains("radius")) o["radius"] = number(in, where, "radius");
    o["n_max"] = integer_or(in, where, "n_max", 64);
  } else if (sub == "oracle") {
    check_keys(in, where, {"restarts"});
    o["restarts"] = integer_or(in, where, "restarts", 6);
  } else {
    throw precondition_error("unknown subcommand \"" + sub + "\"");
  }
  return o;
}

}  // namespace detail

inline json load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is)
    throw precondition_error("cannot open config: " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw precondition_error("config parse: " + std::string(e.what()));
  }
}

inline Resolved resolve(const json& cfg, const std::string& sub,
                        const std::filesystem::path& base_dir,
                        const Overrides& ov = {}) {
  detail::check_keys(cfg, "top level",
                     {"measure", "grid", "pair", "region", "solver", "seed",
                      "threads", "output_dir", sub.c_str()});

  json echo_measure = json::object();
  json echo_grid = json::object();
  json echo_region = json::object();
  json echo_solver = json::object();

  MeasureSpec measure = detail::parse_measure(
      detail::require(cfg, "top level", "measure"), base_dir, echo_measure);
  Grid grid = detail::parse_grid(detail::require(cfg, "top level", "grid"),
                                 echo_grid);
  const json& pj = detail::require(cfg, "top level", "pair");
  detail::check_keys(pj, "pair", {"p", "q"});
  riesz::ExponentPair pair(detail::number(pj, "pair", "p"),
                           detail::number(pj, "pair", "q"));
  riesz::Region region = detail::parse_region(
      cfg.contains("region") ? &cfg["region"] : nullptr, echo_region);

  std::uint64_t seed = 1;
  if (cfg.contains("seed")) {
    const json& s = cfg["seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      throw precondition_error("config: seed must be a nonnegative integer");
    seed = s.get<std::uint64_t>();
  }

  SolverConfig solver = detail::parse_solver(
      cfg.contains("solver") ? &cfg["solver"] : nullptr, pair, grid, seed,
      base_dir, echo_solver);

  int threads = 0;
  if (cfg.contains("threads")) {
    if (!cfg["threads"].is_number_integer() || cfg["threads"].get<int>() < 0)
      throw precondition_error("config: threads must be a nonnegative integer");
    threads = cfg["threads"].get<int>();
  }
  std::string out_dir = ".";
  if (cfg.contains("output_dir")) {
    if (!cfg["output_dir"].is_string())
      throw precondition_error("config: output_dir must be a string");
    out_dir = cfg["output_dir"].get<std::string>();
  }
  if (const char* env = std::getenv("CONVEXT_OUTPUT_DIR")) out_dir = env;
  if (const char* env = std::getenv("CONVEXT_THREADS")) {
    try {
      threads = std::stoi(env);
    } catch (const std::exception&) {
      throw precondition_error("CONVEXT_THREADS is not an integer");
    }
    if (threads < 0) throw precondition_error("CONVEXT_THREADS must be nonnegative");
  }
  if (ov.output_dir) out_dir = *ov.output_dir;
  if (ov.threads) threads = *ov.threads;

  if (!measure.valid_for_dim(grid.dim()))
    throw precondition_error("config: measure family \"" + measure.family_name() +
                             "\" is not defined in dimension " +
                             std::to_string(grid.dim()));

  json options = detail::parse_options(
      cfg.contains(sub) ? &cfg[sub] : nullptr, sub);

  json echo;
  echo["measure"] = echo_measure;
  echo["grid"] = echo_grid;
  echo["pair"] = {{"p", pair.p}, {"q", pair.q}};
  echo["region"] = echo_region;
  echo["solver"] = echo_solver;
  echo["seed"] = seed;
  echo["threads"] = threads;
  echo["output_dir"] = out_dir;
  echo[sub] = options;

  return Resolved{sub,    std::move(measure), std::move(grid),
                  pair,   std::move(region),  std::move(solver),
                  seed,   threads,            std::filesystem::path(out_dir),
                  base_dir, std::move(options), std::move(echo)};
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw precondition_error("cannot open for writing: " + path.string());
  os << text;
  if (!os) throw numeric_error("write failed: " + path.string());
}

inline void write_history_csv(const std::filesystem::path& path,
                              const std::vector<HistoryRow>& history) {
  std::string text = csv_row({"iter", "phi", "step"});
  for (const HistoryRow& row : history)
    text += csv_row({std::to_string(row.iter), format_double(row.phi),
                     format_double(row.step)});
  write_text(path, text);
}

inline void write_extremizer(const std::filesystem::path& dir,
                             const GridFunction& f) {
  write_gridfn(dir / "extremizer.gf", f);
  write_gridfn_csv(dir / "extremizer.csv", f);
}

inline GridFunction read_input(const Resolved& r) {
  const std::filesystem::path p =
      resolve_path(r.options.at("input_path").get<std::string>(), r.base_dir);
  GridFunction f = read_gridfn(p);
  if (f.grid() != r.grid)
    throw precondition_error("input grid function does not live on the config grid: " +
                             p.string());
  return f;
}

inline json battery_json(const ExtremizerReport& rep) {
  json v;
  v["omega0"] = json::array({rep.omega0.real(), rep.omega0.imag()});
  json masses = json::array();
  for (double m : rep.sector_masses) masses.push_back(m);
  v["sector_masses"] = masses;
  v["dominant_mass"] = rep.dominant_mass;
  v["output_dominant_mass"] = rep.output_dominant_mass;
  v["triangle_gap"] = rep.triangle_gap;
  v["positivity_margin"] = rep.positivity_margin;
  v["jensen"] = {{"exponent", rep.jensen_exponent},
                 {"max_violation", rep.jensen_max_violation}};
  v["lower_bound"] = {{"steps", rep.lower_bound_steps},
                      {"ratio", num(rep.lower_bound_ratio)}};
  json rungs = json::array();
  for (const auto& rung : rep.ladder.rungs)
    rungs.push_back(json::array({num(rung.first), num(rung.second)}));
  v["ladder"] = {{"rungs", rungs},
                 {"linf", rep.ladder.linf},
                 {"bounded", rep.ladder.bounded},
                 {"monotone", rep.ladder.monotone},
                 {"passed", rep.ladder.passed}};
  json shells = json::array();
  for (const ShellRow& s : rep.decay.shells)
    shells.push_back(json::array({s.k, num(s.max_abs), s.count}));
  v["decay"] = {{"exponent", num(rep.decay.fit.exponent)},
                {"fit_quality", rep.decay.fit.fit_quality},
                {"super_polynomial", rep.decay.fit.super_polynomial},
                {"shells_used", rep.decay.fit.shells_used},
                {"noise_floor", rep.decay.noise_floor},
                {"shells", shells}};
  v["el_residual"] = rep.el_residual;
  v["linf_norm"] = rep.linf_norm;
  return v;
}

// kappa from the declared decay exponent, present only when the config
// declares one; estimating alpha silently would hide an input of the bound.
inline void attach_smoothing(json& results, const Resolved& r) {
  if (!r.measure.alpha_hint) return;
  const double alpha = *r.measure.alpha_hint;
  results["smoothing"] = {
      {"alpha", alpha},
      {"kappa", num(smoothing_kappa(r.region, alpha, r.pair.p, r.pair.q))}};
}

inline json run_norm(const Resolved& r) {
  const ConvOperator op(r.measure, r.grid);
  const NormEstimate est = estimate_norm(op, r.solver, r.threads);
  json results;
  results["norm"] = est.norm;
  results["best_restart"] = est.best_restart;
  results["converged"] = est.best.converged;
  results["iterations"] = est.best.history.empty() ? 0 : est.best.history.back().iter;
  results["el_residual"] = est.best.el_residual;
  // cross-check against the derivative-free oracle whenever it can run
  if (r.grid.n() <= 8 && r.grid.dim() <= 2) {
    const BruteForceResult bf = brute_force_norm(
        op, r.pair, r.options.at("oracle_restarts").get<int>(), r.seed);
    const double gap = std::fabs(est.norm - bf.value) /
                       std::max(bf.value, std::numeric_limits<double>::min());
    results["oracle"] = {{"value", bf.value}, {"rel_gap", gap}};
  }
  write_history_csv(r.out_dir / "history.csv", est.best.history);
  write_extremizer(r.out_dir, est.best.f);
  return results;
}

inline json run_solve(const Resolved& r) {
  const ConvOperator op(r.measure, r.grid);
  const ExtremizerResult res = ascend(op, r.solver);
  const ExtremizerReport rep = build_report(
      op, r.pair, r.region, res.f, res.el_residual,
      r.options.at("n_sectors").get<int>(), r.options.at("jensen_a").get<double>(),
      r.options.at("lower_steps").get<int>());
  json results;
  results["converged"] = res.converged;
  results["phi"] = res.phi;
  results["norm_estimate"] = res.norm_estimate;
  results["iterations"] = res.history.empty() ? 0 : res.history.back().iter;
  results["el_residual"] = res.el_residual;
  results["verify"] = battery_json(rep);
  attach_smoothing(results, r);
  write_history_csv(r.out_dir / "history.csv", res.history);
  write_extremizer(r.out_dir, res.f);
  return results;
}

inline json run_verify(const Resolved& r) {
  const ConvOperator op(r.measure, r.grid);
  const GridFunction f = read_input(r);
  const double phi = functional(op, r.pair, f);
  // residual of the stored function in ascend's convention: align the phase,
  // clamp dust, renormalize, and compare against one EL application scaled
  // by the function's own Rayleigh value
  const SectorProfile sec =
      constant_argument_check(op, r.pair, f, r.options.at("n_sectors").get<int>());
  const GridFunction aligned =
      normalize_p(clamp_nonneg(std::conj(sec.omega0) * f), r.pair.p);
  const double phi_aligned = functional(op, r.pair, aligned);
  const double el_residual =
      lp_norm(aligned - el_map(op, r.pair, aligned, phi_aligned), r.pair.p);
  const ExtremizerReport rep = build_report(
      op, r.pair, r.region, f, el_residual,
      r.options.at("n_sectors").get<int>(), r.options.at("jensen_a").get<double>(),
      r.options.at("lower_steps").get<int>());
  json results;
  results["phi"] = phi;
  results["el_residual"] = el_residual;
  results["verify"] = battery_json(rep);
  attach_smoothing(results, r);
  return results;
}

inline json run_decompose(const Resolved& r) {
  const ConvOperator op(r.measure, r.grid);
  const GridFunction f = read_input(r);
  const double h = r.grid.spacing();

  json sweep = json::array();
  std::string csv = csv_row([&] {
    std::vector<std::string> head = {"epsilon", "bubble"};
    for (int ax = 0; ax < r.grid.dim(); ++ax)
      head.push_back("c" + std::to_string(ax));
    head.push_back("mass");
    head.push_back("residual_norm");
    return head;
  }());

  for (const json& ej : r.options.at("epsilons")) {
    const double eps = ej.get<double>();
    const BubbleDecomposition dec = decompose(op, r.pair, f, eps);

    GridFunction rebuild = dec.remainder;
    std::vector<int> shift(r.grid.dim());
    for (int j = 0; j < dec.size(); ++j) {
      for (int ax = 0; ax < r.grid.dim(); ++ax)
        shift[ax] = static_cast<int>(std::lround(dec.centers[j][ax] / h));
      rebuild = rebuild + translate(dec.profiles[j], shift);
    }

    json row;
    row["epsilon"] = eps;
    row["n_bubbles"] = dec.size();
    row["remainder_t_norm"] = dec.remainder_t_norm;
    row["c_empirical"] = detail::num(dec.c_empirical);
    row["big_c_empirical"] = dec.big_c_empirical;
    row["reconstruction_error"] = max_abs(rebuild - f);
    json centers = json::array();
    for (const auto& c : dec.centers) centers.push_back(c);
    row["centers"] = centers;
    row["masses"] = dec.bubble_masses;
    row["residual_norms"] = dec.residual_norms;
    sweep.push_back(row);

    for (int j = 0; j < dec.size(); ++j) {
      std::vector<std::string> fields = {format_double(eps), std::to_string(j)};
      for (int ax = 0; ax < r.grid.dim(); ++ax)
        fields.push_back(std::to_string(dec.centers[j][ax]));
      fields.push_back(format_double(dec.bubble_masses[j]));
      fields.push_back(format_double(dec.residual_norms[j + 1]));
      csv += csv_row(fields);
    }
  }
  write_text(r.out_dir / "decompose.csv", csv);
  json results;
  results["gamma"] = r.pair.p * r.pair.q / (r.pair.q - r.pair.p);
  results["sweep"] = sweep;
  return results;
}

inline json run_localize(const Resolved& r) {
  const ConvOperator op(r.measure, r.grid);
  const GridFunction f = read_input(r);
  double norm_estimate;
  if (r.options.contains("norm_estimate")) {
    norm_estimate = r.options.at("norm_estimate").get<double>();
  } else {
    norm_estimate = estimate_norm(op, r.solver, r.threads).norm;
  }
  const LocalizeResult loc =
      localize(op, r.pair, f, r.options.at("eta").get<double>(), norm_estimate,
               r.options.at("eta_exponent").get<double>());
  json results;
  results["norm_estimate"] = norm_estimate;
  results["x0"] = loc.x0;
  results["radius"] = loc.radius;
  results["tail_mass"] = loc.tail_mass;
  results["a_mass"] = loc.a_mass;
  results["b_mass"] = loc.b_mass;
  results["epsilon_used"] = loc.epsilon_used;
  results["n_bubbles"] = loc.decomposition.size();
  results["n_components"] = loc.components.count;
  json centers = json::array();
  for (const auto& c : loc.decomposition.centers) centers.push_back(c);
  results["centers"] = centers;
  results["component_of"] = loc.components.component_of;
  return results;
}

inline json run_bootstrap(const Resolved& r) {
  const double tol = r.options.at("tol").get<double>();
  const std::vector<double> seq = riesz::bootstrap_sequence(
      r.region, r.pair, tol, r.options.at("max_iter").get<int>());
  std::string csv = csv_row({"step", "t", "s"});
  json ts = json::array(), ss = json::array();
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const double s = 1.0 / seq[k];
    csv += csv_row({std::to_string(k), format_double(seq[k]), format_double(s)});
    ts.push_back(num(seq[k]));
    ss.push_back(num(s));
  }
  write_text(r.out_dir / "bootstrap.csv", csv);
  json results;
  results["steps"] = seq.size() - 1;
  results["t_final"] = seq.back();
  results["reached_tol"] = seq.back() < tol;
  results["t"] = ts;
  results["s"] = ss;
  return results;
}

inline json run_kernel(const Resolved& r) {
  const ConvOperator op(r.measure, r.grid);
  const int n_power = r.options.at("n_power").get<int>();
  const GridFunction k = op.kernel_power(n_power);
  write_gridfn_csv(r.out_dir / "kernel.csv", k);

  std::vector<int> center(r.grid.dim(),
                          r.grid.domain() == Domain::torus ? 0 : r.grid.n() / 2);
  double kmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k.size(); ++i)
    kmin = std::min(kmin, k[i].real());

  json results;
  results["n_power"] = n_power;
  results["k0"] = k[r.grid.flatten(center)].real();
  results["min"] = kmin;

  if (r.options.contains("radius")) {
    const double radius = r.options.at("radius").get<double>();
    const int n_max = r.options.at("n_max").get<int>();
    try {
      const auto pos = op.find_positivity_radius(radius, n_max);
      results["positivity"] = {{"found", true},
                               {"power", pos.power},
                               {"c_r", pos.c_r},
                               {"k0", pos.k0}};
    } catch (const positivity_radius_error& e) {
      // a completed scan with a negative answer is a result, not a failure
      json mins = json::array();
      for (double m : e.min_per_power) mins.push_back(m);
      results["positivity"] = {{"found", false},
                               {"n_max", n_max},
                               {"min_per_power", mins}};
    }
  }

  if (r.measure.alpha_hint) {
    std::vector<KappaScanRow> scan;
    const double kappa = smoothing_kappa(r.region, *r.measure.alpha_hint,
                                         r.pair.p, r.pair.q, &scan);
    std::string csv = csv_row({"theta", "feasible", "gain"});
    for (const KappaScanRow& row : scan)
      csv += csv_row({format_double(row.theta), row.feasible ? "1" : "0",
                      format_double(row.gain)});
    write_text(r.out_dir / "kappa_scan.csv", csv);
    results["smoothing"] = {{"alpha", *r.measure.alpha_hint}, {"kappa", num(kappa)}};
  }
  return results;
}

inline json run_oracle(const Resolved& r) {
  const ConvOperator op(r.measure, r.grid);
  const BruteForceResult bf = brute_force_norm(
      op, r.pair, r.options.at("restarts").get<int>(), r.seed);
  write_extremizer(r.out_dir, bf.f);
  json results;
  results["value"] = bf.value;
  results["restarts"] = r.options.at("restarts").get<int>();
  return results;
}

}  // namespace detail

inline json run_resolved(const Resolved& r) {
  std::filesystem::create_directories(r.out_dir);
  json results;
  if (r.subcommand == "norm") results = detail::run_norm(r);
  else if (r.subcommand == "solve") results = detail::run_solve(r);
  else if (r.subcommand == "verify") results = detail::run_verify(r);
  else if (r.subcommand == "decompose") results = detail::run_decompose(r);
  else if (r.subcommand == "localize") results = detail::run_localize(r);
  else if (r.subcommand == "bootstrap") results = detail::run_bootstrap(r);
  else if (r.subcommand == "kernel") results = detail::run_kernel(r);
  else if (r.subcommand == "oracle") results = detail::run_oracle(r);
  else throw precondition_error("unknown subcommand \"" + r.subcommand + "\"");

  json report;
  report["subcommand"] = r.subcommand;
  report["config"] = r.echo;
  report["results"] = results;
  detail::write_text(r.out_dir / "report.json", report.dump(2) + "\n");
  return report;
}

inline json run(const std::string& sub, const std::filesystem::path& config_path,
                const Overrides& ov = {}) {
  const json cfg = load_config(config_path);
  const Resolved r = resolve(cfg, sub, config_path.parent_path(), ov);
  return run_resolved(r);
}

// Exception-to-exit-code boundary: 1 for violated preconditions (including
// config problems), 2 for numeric failures.
inline int run_to_exit_code(const std::string& sub,
                            const std::filesystem::path& config_path,
                            const Overrides& ov = {},
                            std::ostream& err = std::cerr) {
  try {
    run(sub, config_path, ov);
    return 0;
  } catch (const precondition_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const numeric_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace convext::cli
