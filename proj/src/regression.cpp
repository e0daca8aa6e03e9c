#include "dcpp/regression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dcpp/point_process.hpp"
#include "dcpp/sampler.hpp"
#include "dcpp/stats.hpp"

namespace dcpp {

namespace {

double clamp_eta(double eta, bool& clamped) {
  if (eta > kEtaClamp) {
    clamped = true;
    return kEtaClamp;
  }
  if (eta < -kEtaClamp) {
    clamped = true;
    return -kEtaClamp;
  }
  return eta;
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

KktReport kkt_from_gradient(std::span<const double> grad,
                            std::span<const double> beta,
                            std::span<const double> weights, double tol,
                            double zero_tol) {
  KktReport rep;
  rep.tolerance = tol;
  rep.zero_tol = zero_tol;
  rep.residuals.resize(beta.size());
  rep.satisfied.resize(beta.size());
  rep.max_residual = 0.0;
  rep.all_satisfied = true;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    double res;
    bool ok;
    if (std::abs(beta[j]) > zero_tol) {
      // active coordinate: gradient must cancel the penalty subgradient
      double sgn = beta[j] > 0.0 ? 1.0 : -1.0;
      res = std::abs(grad[j] + weights[j] * sgn);
      ok = res <= tol;
    } else {
      // inactive: gradient must stay inside the weight interval
      res = std::max(0.0, std::abs(grad[j]) - weights[j]);
      ok = std::abs(grad[j]) <= weights[j] + tol;
    }
    rep.residuals[j] = res;
    rep.satisfied[j] = ok;
    rep.max_residual = std::max(rep.max_residual, res);
    rep.all_satisfied = rep.all_satisfied && ok;
  }
  return rep;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void NbRegressionProblem::validate() const {
  if (n == 0 || p == 0) {
    throw std::invalid_argument("NbRegressionProblem: n and p must be positive");
  }
  if (y.size() != n || design.size() != n * p || weights.size() != p) {
    throw std::invalid_argument("NbRegressionProblem: size mismatch");
  }
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw std::invalid_argument("NbRegressionProblem: theta must be positive");
  }
  for (double v : y) {
    if (!(v >= 0.0) || v != std::floor(v) || !std::isfinite(v)) {
      throw std::invalid_argument(
          "NbRegressionProblem: responses must be nonnegative integers");
    }
  }
  for (double v : design) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("NbRegressionProblem: design must be finite");
    }
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument(
          "NbRegressionProblem: weights must be nonnegative and finite");
    }
  }
}

NbObjective nb_objective(const NbRegressionProblem& problem,
                         std::span<const double> beta) {
  if (beta.size() != problem.p) {
    throw std::invalid_argument("nb_objective: beta size mismatch");
  }
  const double n = static_cast<double>(problem.n);
  const double theta = problem.theta;
  bool clamped = false;
  double value = 0.0;
  std::vector<double> acc(problem.p, 0.0);
  for (std::size_t i = 0; i < problem.n; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < problem.p; ++j) {
      eta += problem.x(i, j) * beta[j];
    }
    eta = clamp_eta(eta, clamped);
    double mu = std::exp(eta);
    double yi = problem.y[i];
    value += (theta + yi) * std::log(theta + mu) - yi * eta;
    double wi = theta / (theta + mu);
    double resid = yi - mu;
    for (std::size_t j = 0; j < problem.p; ++j) {
      acc[j] += (problem.x(i, j) * wi) * resid;
    }
  }
  NbObjective out;
  out.value = value / n;
  out.gradient.resize(problem.p);
  for (std::size_t j = 0; j < problem.p; ++j) {
    out.gradient[j] = -(acc[j] / n);
  }
  out.clamped = clamped;
  return out;
}

double nb_neg_loglik(const NbRegressionProblem& problem,
                     std::span<const double> beta) {
  if (beta.size() != problem.p) {
    throw std::invalid_argument("nb_neg_loglik: beta size mismatch");
  }
  const double theta = problem.theta;
  bool clamped = false;
  double value = 0.0;
  for (std::size_t i = 0; i < problem.n; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < problem.p; ++j) {
      eta += problem.x(i, j) * beta[j];
    }
    eta = clamp_eta(eta, clamped);
    double mu = std::exp(eta);
    double yi = problem.y[i];
    value += (theta + yi) * std::log(theta + mu) - yi * eta;
  }
  return value / static_cast<double>(problem.n);
}

std::vector<double> nb_score(const NbRegressionProblem& problem,
                             std::span<const double> beta) {
  return nb_objective(problem, beta).gradient;
}

KktReport kkt_check(const NbRegressionProblem& problem, std::span<const double> beta,
                    double tol, double zero_tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("kkt_check: tol must be positive");
  }
  std::vector<double> grad = nb_score(problem, beta);
  return kkt_from_gradient(grad, beta, problem.weights, tol, zero_tol);
}

FitResult fit_weighted_lasso(const NbRegressionProblem& problem,
                             const SolverConfig& config) {
  problem.validate();
  if (!(config.tol > 0.0) || config.max_iter < 1 || !(config.step0 > 0.0)) {
    throw std::invalid_argument("fit_weighted_lasso: bad solver config");
  }

  std::vector<double> beta(problem.p, 0.0);
  NbObjective cur = nb_objective(problem, beta);

  KktReport kkt = kkt_from_gradient(cur.gradient, beta, problem.weights,
                                    config.tol, config.zero_tol);
  long iter = 0;
  bool converged = kkt.max_residual <= config.tol;
  double step = config.step0;

  std::vector<double> cand(problem.p);
  while (!converged && iter < config.max_iter) {
    ++iter;
    // proximal gradient step with backtracking on the smooth part:
    // accept when f(z) <= f(b) + g.(z-b) + |z-b|^2/(2 step)
    for (;;) {
      for (std::size_t j = 0; j < problem.p; ++j) {
        cand[j] = soft_threshold(beta[j] - step * cur.gradient[j],
                                 step * problem.weights[j]);
      }
      double fz = nb_neg_loglik(problem, cand);
      double lin = 0.0, quad = 0.0;
      for (std::size_t j = 0; j < problem.p; ++j) {
        double d = cand[j] - beta[j];
        lin += cur.gradient[j] * d;
        quad += d * d;
      }
      if (fz <= cur.value + lin + quad / (2.0 * step) + 1e-12) {
        break;
      }
      step *= 0.5;
      if (step < 1e-18) {
        break;  // step stalled; accept the candidate and let KKT decide
      }
    }
    beta = cand;
    cur = nb_objective(problem, beta);
    kkt = kkt_from_gradient(cur.gradient, beta, problem.weights, config.tol,
                            config.zero_tol);
    converged = kkt.max_residual <= config.tol;
    // let the step recover so one hard backtrack does not slow the tail
    step = std::min(step * 2.0, config.step0);
  }

  double penalty = 0.0;
  for (std::size_t j = 0; j < problem.p; ++j) {
    penalty += problem.weights[j] * std::abs(beta[j]);
  }
  return {beta, cur.value + penalty, iter, converged, cur.clamped, kkt};
}

std::vector<double> compute_weights(std::size_t n, std::size_t p, double c1,
                                    double c2, double gamma,
                                    std::span<const double> gj_sup) {
  if (p < 2) {
    throw std::invalid_argument(
        "compute_weights: p must be >= 2 (the rule is log p driven)");
  }
  if (n < 1) {
    throw std::invalid_argument("compute_weights: n must be >= 1");
  }
  if (!(c1 > 0.0) || !(c2 > 0.0) || !(gamma > 0.0)) {
    throw std::invalid_argument("compute_weights: c1, c2, gamma must be positive");
  }
  if (gj_sup.size() != p) {
    throw std::invalid_argument("compute_weights: need one envelope value per column");
  }
  const double logp = std::log(static_cast<double>(p));
  const double nn = static_cast<double>(n);
  const double base = std::sqrt(2.0 * (logp / nn) * c2);
  std::vector<double> w(p);
  for (std::size_t j = 0; j < p; ++j) {
    if (!(gj_sup[j] >= 0.0) || !std::isfinite(gj_sup[j])) {
      throw std::invalid_argument("compute_weights: envelope must be nonnegative");
    }
    w[j] = c1 * (base + logp / (3.0 * nn) * gj_sup[j]);
  }
  return w;
}

Region nb_embedding(std::span<const double> h) {
  if (h.empty()) {
    throw std::invalid_argument("nb_embedding: need at least one mass");
  }
  const std::size_t n = h.size();
  std::vector<Cell> cells;
  cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(h[i] > 0.0) || !std::isfinite(h[i])) {
      throw std::invalid_argument("nb_embedding: cell masses must be positive");
    }
    double lo = static_cast<double>(i) / static_cast<double>(n);
    double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    // intensity n*h_i over width 1/n gives the cell mass h_i
    cells.push_back(Cell{Box{{lo}, {hi}}, h[i] * static_cast<double>(n)});
  }
  return Region(1, std::move(cells));
}

PointPattern sample_nb_pattern(const Region& region, double theta, double trunc_tol,
                               RngStream& rng) {
  if (!(theta > 0.0)) {
    throw std::invalid_argument("sample_nb_pattern: theta must be positive");
  }
  std::vector<std::vector<double>> cell_alphas;
  std::vector<double> rates;
  cell_alphas.reserve(region.cell_count());
  rates.reserve(region.cell_count());
  for (std::size_t i = 0; i < region.cell_count(); ++i) {
    double mass = region.cell_mass(i);
    double q = mass / (theta + mass);
    DcpParams conv = nb_to_dcp(NbParams(theta, q), trunc_tol);
    cell_alphas.push_back(conv.alphas());
    rates.push_back(conv.lambda());
  }
  return sample_dcpp(region, cell_alphas, rates, rng);
}

std::vector<double> make_standard_design(std::size_t n, std::size_t p,
                                         RngStream& rng) {
  if (n < 2 || p < 1) {
    throw std::invalid_argument("make_standard_design: need n >= 2, p >= 1");
  }
  std::vector<double> x(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      x[i * p + j] = rng.uniform(-1.0, 1.0);
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i * p + j];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = x[i * p + j] - mean;
      ss += d * d;
    }
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) {
      throw std::runtime_error("make_standard_design: degenerate column");
    }
    for (std::size_t i = 0; i < n; ++i) {
      x[i * p + j] = (x[i * p + j] - mean) / sd;
    }
  }
  return x;
}

std::vector<double> score_statistic(std::span<const double> design,
                                    std::span<const double> y,
                                    std::span<const double> mu, double theta,
                                    std::size_t n, std::size_t p) {
  if (design.size() != n * p || y.size() != n || mu.size() != n) {
    throw std::invalid_argument("score_statistic: size mismatch");
  }
  std::vector<double> acc(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double wi = theta / (theta + mu[i]);
    double resid = y[i] - mu[i];
    for (std::size_t j = 0; j < p; ++j) {
      acc[j] += (design[i * p + j] * wi) * resid;
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    acc[j] /= static_cast<double>(n);
  }
  return acc;
}

namespace {

struct ReplicateOutcome {
  ReplicateRow row;
  double c1;
  double c2;
};

ReplicateOutcome run_replicate(const ExperimentConfig& cfg, long t,
                               const RngStream& base) {
  RngStream rng = base.derive(static_cast<std::uint64_t>(t));
  const std::size_t n = cfg.n, p = cfg.p;
  std::vector<double> x = make_standard_design(n, p, rng);

  // mean response at the true parameter; clamp mirrors the model code
  bool clamped = false;
  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      eta += x[i * p + j] * cfg.beta_star[j];
    }
    mu[i] = std::exp(clamp_eta(eta, clamped));
  }

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double q = mu[i] / (cfg.theta + mu[i]);
    y[i] = static_cast<double>(sample_nb_direct(NbParams(cfg.theta, q), 1, rng)[0]);
  }

  // oracle plug-ins when not overridden: C1 = max mean, C2 = the largest
  // column second moment of the tilted design against the mean
  double c1 = cfg.c1;
  if (!(c1 > 0.0)) {
    c1 = *std::max_element(mu.begin(), mu.end());
  }
  std::vector<double> gsup(p, 0.0);
  std::vector<double> colmom(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double wi = cfg.theta / (cfg.theta + mu[i]);
    for (std::size_t j = 0; j < p; ++j) {
      double xt = x[i * p + j] * wi;
      gsup[j] = std::max(gsup[j], std::abs(xt));
      colmom[j] += xt * xt * mu[i];
    }
  }
  double c2 = cfg.c2;
  if (!(c2 > 0.0)) {
    c2 = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      c2 = std::max(c2, colmom[j] / static_cast<double>(n));
    }
  }
  std::vector<double> w = compute_weights(n, p, c1, c2, cfg.gamma, gsup);

  std::vector<double> stat = score_statistic(x, y, mu, cfg.theta, n, p);
  bool any = false;
  for (std::size_t j = 0; j < p; ++j) {
    if (std::abs(stat[j]) >= w[j]) {
      any = true;
      break;
    }
  }

  NbRegressionProblem problem;
  problem.n = n;
  problem.p = p;
  problem.y = std::move(y);
  problem.design = std::move(x);
  problem.theta = cfg.theta;
  problem.weights = std::move(w);
  FitResult fit = fit_weighted_lasso(problem, cfg.solver);

  double l1 = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    l1 += std::abs(fit.beta[j] - cfg.beta_star[j]);
  }
  return {{t, any, fit.kkt.max_residual, l1, fit.converged}, c1, c2};
}

}  // namespace

ExperimentReport kkt_probability_experiment(const ExperimentConfig& config,
                                            const RngStream& base, int workers) {
  ExperimentConfig cfg = config;
  if (cfg.beta_star.size() > cfg.p) {
    throw std::invalid_argument("experiment: beta_star longer than p");
  }
  cfg.beta_star.resize(cfg.p, 0.0);
  if (cfg.replicates < 1) {
    throw std::invalid_argument("experiment: replicates must be >= 1");
  }
  if (!(cfg.gamma > 0.0)) {
    throw std::invalid_argument("experiment: gamma must be positive");
  }

  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.replicates));
  auto run_range = [&](long lo, long hi) {
    for (long t = lo; t < hi; ++t) {
      outcomes[static_cast<std::size_t>(t)] = run_replicate(cfg, t, base);
    }
  };
  int w = workers < 1 ? 1 : workers;
  if (w == 1) {
    run_range(0, cfg.replicates);
  } else {
    std::vector<std::thread> threads;
    long chunk = (cfg.replicates + w - 1) / w;
    for (int i = 0; i < w; ++i) {
      long lo = i * chunk;
      long hi = std::min<long>(cfg.replicates, lo + chunk);
      if (lo >= hi) break;
      threads.emplace_back(run_range, lo, hi);
    }
    for (auto& th : threads) th.join();
  }

  ExperimentReport rep;
  rep.config = cfg;
  rep.rows.reserve(outcomes.size());
  long exceed = 0;
  double c1sum = 0.0, c2sum = 0.0;
  std::vector<double> l1s;
  l1s.reserve(outcomes.size());
  for (const ReplicateOutcome& oc : outcomes) {
    rep.rows.push_back(oc.row);
    if (oc.row.any_exceed) ++exceed;
    c1sum += oc.c1;
    c2sum += oc.c2;
    l1s.push_back(oc.row.l1_error);
  }
  double reps = static_cast<double>(cfg.replicates);
  rep.c1_used = c1sum / reps;
  rep.c2_used = c2sum / reps;
  rep.exceed_freq = static_cast<double>(exceed) / reps;
  rep.per_coord_bound = 2.0 * std::pow(static_cast<double>(cfg.p), -cfg.gamma);
  rep.union_bound = 2.0 * std::pow(static_cast<double>(cfg.p), 1.0 - cfg.gamma);
  rep.vacuous = rep.union_bound >= 1.0;
  double pb = std::min(rep.union_bound, 1.0);
  rep.freq_std_error = std::sqrt(pb * (1.0 - pb) / reps);
  rep.within_bound =
      rep.vacuous || rep.exceed_freq <= rep.union_bound + 4.0 * rep.freq_std_error;
  rep.median_l1 = median(l1s);
  return rep;
}

NbRegressionProblem read_problem_csv(std::istream& is, double theta) {
  std::string line;
  if (!std::getline(is, line)) {
    throw std::invalid_argument("problem csv: empty input, header required");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
  }
  if (cols.empty() || cols[0] != "y") {
    throw std::invalid_argument("problem csv: header must start with 'y'");
  }
  std::size_t p = cols.size() - 1;
  if (p == 0) {
    throw std::invalid_argument("problem csv: need at least one predictor column");
  }
  for (std::size_t j = 1; j < cols.size(); ++j) {
    if (cols[j] != "x" + std::to_string(j)) {
      throw std::invalid_argument("problem csv: header must be y,x1,...,xp; got '" +
                                  cols[j] + "'");
    }
  }

  NbRegressionProblem problem;
  problem.p = p;
  problem.theta = theta;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    if (!std::getline(ss, tok, ',')) {
      throw std::invalid_argument("problem csv: bad row at line " +
                                  std::to_string(lineno));
    }
    problem.y.push_back(std::stod(tok));
    for (std::size_t j = 0; j < p; ++j) {
      if (!std::getline(ss, tok, ',')) {
        throw std::invalid_argument("problem csv: short row at line " +
                                    std::to_string(lineno));
      }
      problem.design.push_back(std::stod(tok));
    }
  }
  problem.n = problem.y.size();
  problem.weights.assign(p, 0.0);
  if (problem.n == 0) {
    throw std::invalid_argument("problem csv: no data rows");
  }
  return problem;
}

void write_problem_csv(std::ostream& os, const NbRegressionProblem& problem) {
  os << 'y';
  for (std::size_t j = 1; j <= problem.p; ++j) {
    os << ",x" << j;
  }
  os << '\n';
  for (std::size_t i = 0; i < problem.n; ++i) {
    os << fmt(problem.y[i]);
    for (std::size_t j = 0; j < problem.p; ++j) {
      os << ',' << fmt(problem.x(i, j));
    }
    os << '\n';
  }
}

}  // namespace dcpp
