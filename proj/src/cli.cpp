#include "dcpp/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcpp/concentration.hpp"
#include "dcpp/params.hpp"
#include "dcpp/pmf.hpp"
#include "dcpp/point_process.hpp"
#include "dcpp/regression.hpp"
#include "dcpp/sampler.hpp"

namespace dcpp::cli {

namespace {

using nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Unknown keys are configuration mistakes; list the offender instead of
// silently ignoring it.
void require_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                  const std::string& context) {
  if (!obj.is_object()) {
    throw std::invalid_argument("config: " + context + " must be an object");
  }
  for (const auto& item : obj.items()) {
    if (!allowed.contains(item.key())) {
      throw std::invalid_argument("config: unknown key '" + item.key() + "' in " +
                                  context);
    }
  }
}

double need_double(const ordered_json& obj, const std::string& key,
                   const std::string& context) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw std::invalid_argument("config: " + context + " needs numeric '" + key +
                                "'");
  }
  return obj[key].get<double>();
}

double opt_double(const ordered_json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) {
    throw std::invalid_argument("config: '" + key + "' must be numeric");
  }
  return obj[key].get<double>();
}

long need_long(const ordered_json& obj, const std::string& key,
               const std::string& context) {
  if (!obj.contains(key) || !obj[key].is_number_integer()) {
    throw std::invalid_argument("config: " + context + " needs integer '" + key +
                                "'");
  }
  return obj[key].get<long>();
}

long opt_long(const ordered_json& obj, const std::string& key, long fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    throw std::invalid_argument("config: '" + key + "' must be an integer");
  }
  return obj[key].get<long>();
}

std::string need_string(const ordered_json& obj, const std::string& key,
                        const std::string& context) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw std::invalid_argument("config: " + context + " needs string '" + key +
                                "'");
  }
  return obj[key].get<std::string>();
}

std::vector<double> need_double_array(const ordered_json& obj, const std::string& key,
                                      const std::string& context) {
  if (!obj.contains(key) || !obj[key].is_array()) {
    throw std::invalid_argument("config: " + context + " needs array '" + key + "'");
  }
  std::vector<double> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number()) {
      throw std::invalid_argument("config: '" + key + "' must hold numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

// law given either directly ({"lambda":..,"alphas":[..],"truncated":..}) or as
// a negative binomial to convert ({"nb":{"r":..,"q":..},"tol":..})
DcpParams parse_params(const ordered_json& obj, const std::string& context) {
  if (obj.contains("nb")) {
    require_keys(obj, {"nb", "tol"}, context);
    const auto& nbj = obj["nb"];
    require_keys(nbj, {"r", "q"}, context + ".nb");
    NbParams nb(need_double(nbj, "r", context), need_double(nbj, "q", context));
    return nb_to_dcp(nb, opt_double(obj, "tol", 1e-10));
  }
  require_keys(obj, {"lambda", "alphas", "truncated"}, context);
  bool truncated = obj.contains("truncated") && obj["truncated"].get<bool>();
  return DcpParams(need_double(obj, "lambda", context),
                   need_double_array(obj, "alphas", context), truncated);
}

Region parse_region(const ordered_json& obj, const std::string& context) {
  require_keys(obj, {"dim", "cells"}, context);
  long dim = need_long(obj, "dim", context);
  if (!obj.contains("cells") || !obj["cells"].is_array()) {
    throw std::invalid_argument("config: " + context + " needs array 'cells'");
  }
  std::vector<Cell> cells;
  for (const auto& cj : obj["cells"]) {
    require_keys(cj, {"lo", "hi", "intensity"}, context + ".cells[]");
    Cell c;
    c.box.lo = need_double_array(cj, "lo", context);
    c.box.hi = need_double_array(cj, "hi", context);
    c.intensity = need_double(cj, "intensity", context);
    cells.push_back(std::move(c));
  }
  return Region(static_cast<std::size_t>(dim), std::move(cells));
}

ordered_json params_echo(const DcpParams& p) {
  ordered_json j;
  j["lambda"] = p.lambda();
  j["alphas"] = p.alphas();
  j["truncated"] = p.truncated();
  j["tail_mass"] = p.tail_mass();
  return j;
}

struct Common {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed_override;
  int workers = 1;
};

ordered_json load_config(const Common& c) {
  std::ifstream in(c.config_path);
  if (!in) {
    throw std::invalid_argument("cannot open config file '" + c.config_path + "'");
  }
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config parse error: " + std::string(e.what()));
  }
  if (!j.is_object()) {
    throw std::invalid_argument("config: top level must be an object");
  }
  long sv = opt_long(j, "schema_version", 1);
  if (sv != 1) {
    throw std::invalid_argument("config: unsupported schema_version " +
                                std::to_string(sv));
  }
  return j;
}

std::uint64_t resolve_seed(const ordered_json& j, const Common& c) {
  if (c.seed_override) return *c.seed_override;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) {
      throw std::invalid_argument("config: 'seed' must be an integer");
    }
    return j["seed"].get<std::uint64_t>();
  }
  return 0;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot open output file '" + path + "'");
  }
  out << body;
  if (!out) {
    throw std::invalid_argument("failed writing output file '" + path + "'");
  }
}

// Every run leaves a machine-readable record of the resolved inputs: embedded
// for JSON outputs, as a sidecar for CSV outputs.
void write_sidecar(const std::string& out_path, const ordered_json& echo) {
  write_text(out_path + ".config.json", echo.dump(2) + "\n");
}

ordered_json make_echo(const std::string& subcommand, std::uint64_t seed,
                       int workers, const ordered_json& resolved) {
  ordered_json echo;
  echo["schema_version"] = 1;
  echo["subcommand"] = subcommand;
  echo["seed"] = seed;
  echo["workers"] = workers;
  echo["inputs"] = resolved;
  return echo;
}

int cmd_pmf(const Common& c) {
  ordered_json j = load_config(c);
  require_keys(j, {"schema_version", "seed", "params", "region_mass", "k_max",
                   "method", "budget"},
               "pmf config");
  if (!j.contains("params")) {
    throw std::invalid_argument("config: pmf needs 'params'");
  }
  DcpParams params = parse_params(j["params"], "params");
  double mass = need_double(j, "region_mass", "pmf config");
  long k_max = need_long(j, "k_max", "pmf config");
  std::string method = j.contains("method")
                           ? need_string(j, "method", "pmf config")
                           : std::string("both");
  if (method != "both" && method != "matrix") {
    throw std::invalid_argument("config: method must be 'both' or 'matrix'");
  }
  PmfOptions opts;
  opts.partition_budget =
      static_cast<std::uint64_t>(opt_long(j, "budget", 1000000));

  std::vector<double> matrix = pmf_matrix_vector(params, mass, k_max);
  std::ostringstream os;
  os << "k,pmf_partition,pmf_matrix,abs_diff\n";
  for (long k = 0; k <= k_max; ++k) {
    double pm = matrix[static_cast<std::size_t>(k)];
    if (method == "both") {
      double pp = pmf_partition(params, mass, k, opts);
      os << k << ',' << fmt(pp) << ',' << fmt(pm) << ',' << fmt(std::abs(pp - pm))
         << '\n';
    } else {
      os << k << ",," << fmt(pm) << ",\n";
    }
  }
  write_text(c.out_path, os.str());

  ordered_json resolved;
  resolved["params"] = params_echo(params);
  resolved["region_mass"] = mass;
  resolved["k_max"] = k_max;
  resolved["method"] = method;
  resolved["budget"] = static_cast<long>(opts.partition_budget);
  write_sidecar(c.out_path, make_echo("pmf", 0, c.workers, resolved));
  return 0;
}

int cmd_sample(const Common& c) {
  ordered_json j = load_config(c);
  require_keys(j, {"schema_version", "seed", "mode", "n", "params", "nb", "region",
                   "alphas", "trunc_tol", "theta"},
               "sample config");
  std::uint64_t seed = resolve_seed(j, c);
  std::string mode = need_string(j, "mode", "sample config");
  RngStream rng(seed);

  ordered_json resolved;
  resolved["mode"] = mode;
  std::ostringstream os;

  if (mode == "rv") {
    long n = need_long(j, "n", "sample config");
    if (n < 1) throw std::invalid_argument("config: n must be >= 1");
    DcpParams params = parse_params(j["params"], "params");
    std::vector<long> draws =
        sample_dcp_rv(params, static_cast<std::size_t>(n), rng);
    os << "value\n";
    for (long v : draws) os << v << '\n';
    resolved["n"] = n;
    resolved["params"] = params_echo(params);
  } else if (mode == "nb") {
    long n = need_long(j, "n", "sample config");
    if (n < 1) throw std::invalid_argument("config: n must be >= 1");
    if (!j.contains("nb")) throw std::invalid_argument("config: nb mode needs 'nb'");
    require_keys(j["nb"], {"r", "q"}, "nb");
    NbParams nb(need_double(j["nb"], "r", "nb"), need_double(j["nb"], "q", "nb"));
    std::vector<long> draws = sample_nb_direct(nb, static_cast<std::size_t>(n), rng);
    os << "value\n";
    for (long v : draws) os << v << '\n';
    resolved["n"] = n;
    resolved["nb"] = ordered_json{{"r", nb.r()}, {"q", nb.q()}};
  } else if (mode == "pattern") {
    if (!j.contains("region")) {
      throw std::invalid_argument("config: pattern mode needs 'region'");
    }
    Region region = parse_region(j["region"], "region");
    std::vector<double> alphas = need_double_array(j, "alphas", "sample config");
    PointPattern pat = sample_dcpp(region, alphas, rng);
    std::ostringstream ps;
    pat.write_csv(ps);
    os << ps.str();
    resolved["region"] = j["region"];
    resolved["alphas"] = alphas;
  } else if (mode == "nb_pattern") {
    if (!j.contains("region")) {
      throw std::invalid_argument("config: nb_pattern mode needs 'region'");
    }
    Region region = parse_region(j["region"], "region");
    double theta = need_double(j, "theta", "sample config");
    double tol = opt_double(j, "trunc_tol", 1e-10);
    PointPattern pat = sample_nb_pattern(region, theta, tol, rng);
    std::ostringstream ps;
    pat.write_csv(ps);
    os << ps.str();
    resolved["region"] = j["region"];
    resolved["theta"] = theta;
    resolved["trunc_tol"] = tol;
  } else {
    throw std::invalid_argument(
        "config: mode must be one of rv, nb, pattern, nb_pattern");
  }

  write_text(c.out_path, os.str());
  write_sidecar(c.out_path, make_echo("sample", seed, c.workers, resolved));
  return 0;
}

int cmd_bounds(const Common& c) {
  ordered_json j = load_config(c);
  require_keys(j, {"schema_version", "seed", "kind", "params_list", "x_grid",
                   "y_grid", "allow_truncated", "region", "alphas", "f",
                   "processes", "params", "region_mass"},
               "bounds config");
  std::string kind = need_string(j, "kind", "bounds config");

  std::ostringstream os;
  os << "kind,level,threshold,bound,inputs_digest\n";
  auto emit = [&os](double level, const TailBoundSpec& s) {
    os << to_string(s.kind) << ',' << fmt(level) << ',' << fmt(s.threshold) << ','
       << fmt(s.bound) << ',' << s.inputs_digest << '\n';
  };

  ordered_json resolved;
  resolved["kind"] = kind;

  if (kind == "sum") {
    if (!j.contains("params_list") || !j["params_list"].is_array()) {
      throw std::invalid_argument("config: sum bounds need 'params_list'");
    }
    std::vector<DcpParams> params_list;
    for (const auto& pj : j["params_list"]) {
      params_list.push_back(parse_params(pj, "params_list[]"));
    }
    bool allow_trunc =
        j.contains("allow_truncated") && j["allow_truncated"].get<bool>();
    std::vector<double> xs = need_double_array(j, "x_grid", "bounds config");
    for (double x : xs) {
      SumBounds sb = bound_compound_sum(params_list, x, allow_trunc);
      emit(x, sb.upper);
      emit(x, sb.lower);
      emit(x, sb.two_sided);
    }
    ordered_json pl = ordered_json::array();
    for (const auto& p : params_list) pl.push_back(params_echo(p));
    resolved["params_list"] = pl;
    resolved["allow_truncated"] = allow_trunc;
    resolved["x_grid"] = xs;
  } else if (kind == "integral") {
    Region region = parse_region(j["region"], "region");
    std::vector<double> alphas = need_double_array(j, "alphas", "bounds config");
    std::vector<double> f = need_double_array(j, "f", "bounds config");
    std::vector<double> ys = need_double_array(j, "y_grid", "bounds config");
    for (double y : ys) {
      emit(y, bound_integral(region, alphas, f, y));
    }
    resolved["region"] = j["region"];
    resolved["alphas"] = alphas;
    resolved["f"] = f;
    resolved["y_grid"] = ys;
  } else if (kind == "indicator") {
    DcpParams params = parse_params(j["params"], "params");
    double mass = need_double(j, "region_mass", "bounds config");
    std::vector<double> ys = need_double_array(j, "y_grid", "bounds config");
    for (double y : ys) {
      emit(y, bound_indicator(params, mass, y));
    }
    resolved["params"] = params_echo(params);
    resolved["region_mass"] = mass;
    resolved["y_grid"] = ys;
  } else if (kind == "integral_sum") {
    if (!j.contains("processes") || !j["processes"].is_array()) {
      throw std::invalid_argument("config: integral_sum bounds need 'processes'");
    }
    std::vector<ProcessSpec> procs;
    for (const auto& pj : j["processes"]) {
      require_keys(pj, {"region", "alphas", "f"}, "processes[]");
      ProcessSpec ps{parse_region(pj["region"], "processes[].region"),
                     need_double_array(pj, "alphas", "processes[]"),
                     need_double_array(pj, "f", "processes[]")};
      procs.push_back(std::move(ps));
    }
    std::vector<double> ys = need_double_array(j, "y_grid", "bounds config");
    for (double y : ys) {
      emit(y, bound_integral_sum(procs, y));
    }
    resolved["processes"] = j["processes"];
    resolved["y_grid"] = ys;
  } else {
    throw std::invalid_argument(
        "config: kind must be one of sum, integral, indicator, integral_sum");
  }

  write_text(c.out_path, os.str());
  write_sidecar(c.out_path, make_echo("bounds", 0, c.workers, resolved));
  return 0;
}

int cmd_verify(const Common& c) {
  ordered_json j = load_config(c);
  require_keys(j, {"schema_version", "seed", "suite", "trials", "params_list",
                   "x_grid", "allow_truncated"},
               "verify config");
  std::uint64_t seed = resolve_seed(j, c);
  std::string suite = need_string(j, "suite", "verify config");
  long trials = opt_long(j, "trials", 100000);
  RngStream base(seed);

  std::ostringstream os;
  bool all_pass = true;
  ordered_json resolved;
  resolved["suite"] = suite;
  resolved["trials"] = trials;

  if (suite == "dominance") {
    std::vector<GridEntry> grid = run_dominance_grid(trials, base, c.workers);
    os << "fixture,level,kind,threshold,bound,empirical,ci_low,ci_high,trials,"
          "exact,verdict\n";
    for (const GridEntry& g : grid) {
      all_pass = all_pass && g.report.pass;
      os << g.fixture << ',' << fmt(g.level) << ',' << to_string(g.report.spec.kind)
         << ',' << fmt(g.report.spec.threshold) << ',' << fmt(g.report.spec.bound)
         << ',' << fmt(g.report.empirical) << ',' << fmt(g.report.ci_low) << ','
         << fmt(g.report.ci_high) << ',' << g.report.trials << ','
         << (g.exact ? 1 : 0) << ',' << (g.report.pass ? "pass" : "fail") << '\n';
    }
  } else if (suite == "campbell") {
    std::vector<CampbellEntry> grid = run_campbell_grid(trials, base, c.workers);
    os << "fixture,theta,mc_estimate,closed_form,std_error,z,verdict\n";
    for (const CampbellEntry& g : grid) {
      all_pass = all_pass && g.pass;
      os << g.fixture << ',' << fmt(g.theta) << ',' << fmt(g.mc_estimate) << ','
         << fmt(g.closed_form) << ',' << fmt(g.std_error) << ',' << fmt(g.z) << ','
         << (g.pass ? "pass" : "fail") << '\n';
    }
  } else if (suite == "sum") {
    if (!j.contains("params_list") || !j["params_list"].is_array()) {
      throw std::invalid_argument("config: sum suite needs 'params_list'");
    }
    std::vector<DcpParams> params_list;
    for (const auto& pj : j["params_list"]) {
      params_list.push_back(parse_params(pj, "params_list[]"));
    }
    bool allow_trunc =
        j.contains("allow_truncated") && j["allow_truncated"].get<bool>();
    std::vector<double> xs = need_double_array(j, "x_grid", "verify config");
    double mean = 0.0;
    for (const DcpParams& p : params_list) mean += moments(p).mean;

    os << "level,kind,threshold,bound,empirical,ci_low,ci_high,trials,verdict\n";
    std::uint64_t idx = 0;
    for (double x : xs) {
      SumBounds sb = bound_compound_sum(params_list, x, allow_trunc);
      auto draw_dev = [&params_list, mean](RngStream& rng) {
        double s = 0.0;
        for (const DcpParams& p : params_list) {
          s += static_cast<double>(sample_dcp_rv(p, 1, rng)[0]);
        }
        return s - mean;
      };
      auto draw_neg = [&draw_dev](RngStream& rng) { return -draw_dev(rng); };
      auto draw_abs = [&draw_dev](RngStream& rng) { return std::abs(draw_dev(rng)); };
      TailReport ru = empirical_tail(draw_dev, sb.upper, trials,
                                     base.derive(++idx), c.workers);
      TailReport rl = empirical_tail(draw_neg, sb.lower, trials,
                                     base.derive(++idx), c.workers);
      TailReport rt = empirical_tail(draw_abs, sb.two_sided, trials,
                                     base.derive(++idx), c.workers);
      for (const TailReport& r : {ru, rl, rt}) {
        all_pass = all_pass && r.pass;
        os << fmt(x) << ',' << to_string(r.spec.kind) << ','
           << fmt(r.spec.threshold) << ',' << fmt(r.spec.bound) << ','
           << fmt(r.empirical) << ',' << fmt(r.ci_low) << ',' << fmt(r.ci_high)
           << ',' << r.trials << ',' << (r.pass ? "pass" : "fail") << '\n';
      }
    }
    ordered_json pl = ordered_json::array();
    for (const auto& p : params_list) pl.push_back(params_echo(p));
    resolved["params_list"] = pl;
    resolved["allow_truncated"] = allow_trunc;
    resolved["x_grid"] = xs;
  } else {
    throw std::invalid_argument(
        "config: suite must be one of dominance, campbell, sum");
  }

  write_text(c.out_path, os.str());
  write_sidecar(c.out_path, make_echo("verify", seed, c.workers, resolved));
  if (!all_pass) {
    std::cerr << "verify: at least one verdict failed\n";
    return 2;
  }
  return 0;
}

int cmd_regress(const Common& c) {
  ordered_json j = load_config(c);
  require_keys(j, {"schema_version", "seed", "problem_csv", "theta", "weights",
                   "weight_rule", "tol", "max_iter", "kkt_tol"},
               "regress config");
  std::string csv_path = need_string(j, "problem_csv", "regress config");
  double theta = need_double(j, "theta", "regress config");

  std::ifstream in(csv_path);
  if (!in) {
    throw std::invalid_argument("cannot open problem file '" + csv_path + "'");
  }
  NbRegressionProblem problem = read_problem_csv(in, theta);

  ordered_json resolved;
  resolved["problem_csv"] = csv_path;
  resolved["theta"] = theta;
  resolved["n"] = problem.n;
  resolved["p"] = problem.p;

  if (j.contains("weights")) {
    if (j.contains("weight_rule")) {
      throw std::invalid_argument(
          "config: give either 'weights' or 'weight_rule', not both");
    }
    problem.weights = need_double_array(j, "weights", "regress config");
    if (problem.weights.size() != problem.p) {
      throw std::invalid_argument("config: weights size must equal p");
    }
    resolved["weights"] = problem.weights;
  } else if (j.contains("weight_rule")) {
    const auto& wr = j["weight_rule"];
    require_keys(wr, {"gamma", "c1", "c2"}, "weight_rule");
    double gamma = need_double(wr, "gamma", "weight_rule");
    double c1 = opt_double(wr, "c1", 0.0);
    double c2 = opt_double(wr, "c2", 0.0);

    // data-driven plug-ins from a small ridge pilot when not given
    std::vector<double> mu_hat(problem.n, 0.0);
    {
      NbRegressionProblem pilot = problem;
      pilot.weights.assign(problem.p, 0.0);
      SolverConfig pcfg;
      pcfg.tol = 1e-4;
      pcfg.max_iter = 2000;
      // small l1 weight keeps the pilot bounded on separable data
      pilot.weights.assign(problem.p, 1e-3);
      FitResult pf = fit_weighted_lasso(pilot, pcfg);
      for (std::size_t i = 0; i < problem.n; ++i) {
        double eta = 0.0;
        for (std::size_t jj = 0; jj < problem.p; ++jj) {
          eta += problem.x(i, jj) * pf.beta[jj];
        }
        eta = std::min(std::max(eta, -kEtaClamp), kEtaClamp);
        mu_hat[i] = std::exp(eta);
      }
    }
    std::vector<double> gsup(problem.p, 0.0);
    std::vector<double> colmom(problem.p, 0.0);
    for (std::size_t i = 0; i < problem.n; ++i) {
      double wi = theta / (theta + mu_hat[i]);
      for (std::size_t jj = 0; jj < problem.p; ++jj) {
        double xt = problem.x(i, jj) * wi;
        gsup[jj] = std::max(gsup[jj], std::abs(xt));
        colmom[jj] += xt * xt * mu_hat[i];
      }
    }
    if (!(c1 > 0.0)) c1 = *std::max_element(mu_hat.begin(), mu_hat.end());
    if (!(c2 > 0.0)) {
      for (std::size_t jj = 0; jj < problem.p; ++jj) {
        c2 = std::max(c2, colmom[jj] / static_cast<double>(problem.n));
      }
    }
    problem.weights = compute_weights(problem.n, problem.p, c1, c2, gamma, gsup);
    resolved["weight_rule"] =
        ordered_json{{"gamma", gamma}, {"c1", c1}, {"c2", c2}};
    resolved["weights"] = problem.weights;
  } else {
    throw std::invalid_argument("config: need 'weights' or 'weight_rule'");
  }

  SolverConfig cfg;
  cfg.tol = opt_double(j, "tol", 1e-8);
  cfg.max_iter = opt_long(j, "max_iter", 20000);
  FitResult fit = fit_weighted_lasso(problem, cfg);
  double kkt_tol = opt_double(j, "kkt_tol", cfg.tol);
  KktReport kkt = kkt_check(problem, fit.beta, kkt_tol);

  resolved["tol"] = cfg.tol;
  resolved["max_iter"] = cfg.max_iter;
  resolved["kkt_tol"] = kkt_tol;

  ordered_json out;
  out["config"] = make_echo("regress", 0, c.workers, resolved);
  ordered_json fj;
  fj["beta"] = fit.beta;
  fj["objective"] = fit.objective;
  fj["iterations"] = fit.iterations;
  fj["converged"] = fit.converged;
  fj["clamped"] = fit.clamped;
  out["fit"] = fj;
  ordered_json kj;
  kj["tolerance"] = kkt.tolerance;
  kj["max_residual"] = kkt.max_residual;
  kj["all_satisfied"] = kkt.all_satisfied;
  kj["residuals"] = kkt.residuals;
  std::vector<int> sat;
  sat.reserve(kkt.satisfied.size());
  for (bool b : kkt.satisfied) sat.push_back(b ? 1 : 0);
  kj["satisfied"] = sat;
  out["kkt"] = kj;

  write_text(c.out_path, out.dump(2) + "\n");
  return fit.converged && kkt.all_satisfied ? 0 : 2;
}

int cmd_experiment(const Common& c) {
  ordered_json j = load_config(c);
  require_keys(j, {"schema_version", "seed", "n", "n_grid", "p", "d_star",
                   "beta_star_value", "beta_star", "theta", "gamma", "c1", "c2",
                   "replicates", "tol", "max_iter"},
               "experiment config");
  std::uint64_t seed = resolve_seed(j, c);

  std::vector<long> n_grid;
  if (j.contains("n_grid")) {
    for (const auto& v : j["n_grid"]) n_grid.push_back(v.get<long>());
  } else {
    n_grid.push_back(need_long(j, "n", "experiment config"));
  }
  long p = need_long(j, "p", "experiment config");

  std::vector<double> beta_star;
  if (j.contains("beta_star")) {
    beta_star = need_double_array(j, "beta_star", "experiment config");
  } else {
    long d = opt_long(j, "d_star", 3);
    double val = opt_double(j, "beta_star_value", 0.8);
    for (long k = 0; k < d; ++k) {
      beta_star.push_back(k % 2 == 0 ? val : -val);
    }
  }

  ExperimentConfig cfg;
  cfg.p = static_cast<std::size_t>(p);
  cfg.beta_star = beta_star;
  cfg.theta = opt_double(j, "theta", 5.0);
  cfg.gamma = opt_double(j, "gamma", 2.0);
  cfg.c1 = opt_double(j, "c1", 0.0);
  cfg.c2 = opt_double(j, "c2", 0.0);
  cfg.replicates = opt_long(j, "replicates", 500);
  cfg.solver.tol = opt_double(j, "tol", 1e-6);
  cfg.solver.max_iter = opt_long(j, "max_iter", 3000);

  std::ostringstream os;
  os << "replicate,n,p,gamma,any_exceed,max_kkt_residual,l1_error,converged\n";
  bool all_within = true;
  ordered_json summaries = ordered_json::array();
  RngStream base(seed);
  std::uint64_t grid_idx = 0;
  for (long n : n_grid) {
    cfg.n = static_cast<std::size_t>(n);
    ExperimentReport rep =
        kkt_probability_experiment(cfg, base.derive(grid_idx++), c.workers);
    for (const ReplicateRow& r : rep.rows) {
      os << r.replicate << ',' << n << ',' << p << ',' << fmt(cfg.gamma) << ','
         << (r.any_exceed ? 1 : 0) << ',' << fmt(r.max_kkt_residual) << ','
         << fmt(r.l1_error) << ',' << (r.converged ? 1 : 0) << '\n';
    }
    all_within = all_within && rep.within_bound;
    ordered_json s;
    s["n"] = n;
    s["exceed_freq"] = rep.exceed_freq;
    s["per_coord_bound"] = rep.per_coord_bound;
    s["union_bound"] = rep.union_bound;
    s["vacuous"] = rep.vacuous;
    s["freq_std_error"] = rep.freq_std_error;
    s["within_bound"] = rep.within_bound;
    s["median_l1"] = rep.median_l1;
    s["c1_used"] = rep.c1_used;
    s["c2_used"] = rep.c2_used;
    summaries.push_back(s);
  }
  write_text(c.out_path, os.str());

  ordered_json resolved;
  resolved["n_grid"] = n_grid;
  resolved["p"] = p;
  resolved["beta_star"] = beta_star;
  resolved["theta"] = cfg.theta;
  resolved["gamma"] = cfg.gamma;
  resolved["c1"] = cfg.c1;
  resolved["c2"] = cfg.c2;
  resolved["replicates"] = cfg.replicates;
  resolved["tol"] = cfg.solver.tol;
  resolved["max_iter"] = cfg.solver.max_iter;
  ordered_json echo = make_echo("experiment", seed, c.workers, resolved);
  echo["summaries"] = summaries;
  write_sidecar(c.out_path, echo);

  if (!all_within) {
    std::cerr << "experiment: exceedance frequency above the stated bound\n";
    return 2;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"discrete compound Poisson workbench"};
  app.require_subcommand(1);

  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config file")
        ->required();
    sub->add_option("--out", common.out_path, "output file")->required();
    sub->add_option("--seed", common.seed_override, "override the config seed");
    sub->add_option("--workers", common.workers, "worker threads")
        ->check(CLI::Range(1, 256));
  };

  CLI::App* pmf = app.add_subcommand("pmf", "tabulate the pmf by both routes");
  add_common(pmf);
  CLI::App* sample = app.add_subcommand("sample", "draw variables or patterns");
  add_common(sample);
  CLI::App* bounds = app.add_subcommand("bounds", "tabulate deviation bounds");
  add_common(bounds);
  CLI::App* verify =
      app.add_subcommand("verify", "Monte Carlo verification suites");
  add_common(verify);
  CLI::App* regress =
      app.add_subcommand("regress", "penalized negative binomial fit");
  add_common(regress);
  CLI::App* experiment =
      app.add_subcommand("experiment", "score exceedance experiment");
  add_common(experiment);

  std::vector<const char*> argv;
  argv.push_back("dcpp");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (pmf->parsed()) return cmd_pmf(common);
    if (sample->parsed()) return cmd_sample(common);
    if (bounds->parsed()) return cmd_bounds(common);
    if (verify->parsed()) return cmd_verify(common);
    if (regress->parsed()) return cmd_regress(common);
    if (experiment->parsed()) return cmd_experiment(common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace dcpp::cli
