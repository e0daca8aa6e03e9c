#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dcpp/params.hpp"
#include "dcpp/region.hpp"
#include "dcpp/rng.hpp"

namespace dcpp {

// Weighted l1-penalized negative binomial regression problem with known
// dispersion theta: minimize
//   (1/n) sum_i [ (theta + y_i) log(theta + e^{eta_i}) - y_i eta_i ]
//   + sum_j w_j |beta_j|,   eta_i = x_i . beta.
struct NbRegressionProblem {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> y;       // nonnegative integer counts, size n
  std::vector<double> design;  // row-major n x p
  double theta = 1.0;
  std::vector<double> weights; // penalty weights, size p, all >= 0

  double x(std::size_t i, std::size_t j) const { return design[i * p + j]; }
  void validate() const;
};

inline constexpr double kEtaClamp = 30.0;

struct NbObjective {
  double value;
  std::vector<double> gradient;  // of the unpenalized part
  bool clamped;                  // some eta_i hit the +-30 clamp
};

// Unpenalized negative log-likelihood (up to the beta-free constant) and its
// gradient, averaged over observations.  Linear predictors are clamped to
// +-30 before exponentiation; `clamped` reports whether that fired.
NbObjective nb_objective(const NbRegressionProblem& problem,
                         std::span<const double> beta);

double nb_neg_loglik(const NbRegressionProblem& problem, std::span<const double> beta);

// Gradient component j is -(1/n) sum_i x_ij (y_i - mu_i) theta/(theta + mu_i).
std::vector<double> nb_score(const NbRegressionProblem& problem,
                             std::span<const double> beta);

struct KktReport {
  double tolerance;
  double zero_tol;                // |beta_j| below this counts as zero
  std::vector<double> residuals;  // per-coordinate stationarity residual
  std::vector<bool> satisfied;
  double max_residual;
  bool all_satisfied;
};

// First-order optimality for the penalized objective: active coordinates must
// have gradient_j + w_j sign(beta_j) near zero, inactive ones |gradient_j|
// <= w_j + tol.
KktReport kkt_check(const NbRegressionProblem& problem, std::span<const double> beta,
                    double tol, double zero_tol = 1e-10);

struct SolverConfig {
  double tol = 1e-8;       // terminate when the KKT residual falls below this
  long max_iter = 20000;
  double step0 = 1.0;      // initial backtracking step
  double zero_tol = 1e-10;
};

struct FitResult {
  std::vector<double> beta;
  double objective;  // penalized
  long iterations;
  bool converged;
  bool clamped;
  KktReport kkt;
};

// Proximal gradient (ISTA) with backtracking line search: gradient step on
// the smooth part, soft threshold at w_j * step, halve the step until the
// quadratic upper bound holds.
FitResult fit_weighted_lasso(const NbRegressionProblem& problem,
                             const SolverConfig& config = {});

// Penalty weights w_j = C1 [ sqrt(2 (log p / n) C2) + (log p / (3n)) g_j ]
// where g_j bounds |x_ij| over the sample.  Requires p >= 2 (the rule is
// log p driven and degenerates at p = 1).
std::vector<double> compute_weights(std::size_t n, std::size_t p, double c1,
                                    double c2, double gamma,
                                    std::span<const double> gj_sup);

// Region on [0,1) with n equal cells whose masses are h_1..h_n, so cell i has
// intensity n * h_i.  Rejects nonpositive masses.
Region nb_embedding(std::span<const double> h);

// Marked point pattern whose cell weights are independent NB(theta, q_i),
// q_i = h_i/(theta + h_i), realized as a compound Poisson process with
// per-cell logarithmic mark weights truncated at tol.
PointPattern sample_nb_pattern(const Region& region, double theta, double trunc_tol,
                               RngStream& rng);

// iid uniform(-1,1) design with columns standardized to mean zero and unit
// sample variance.  Row-major n x p.
std::vector<double> make_standard_design(std::size_t n, std::size_t p, RngStream& rng);

// Tilted score statistic (1/n) sum_i x_ij theta/(theta + mu_i) (y_i - mu_i)
// for a known mean vector; the exceedance experiment compares its absolute
// value against the penalty weights coordinate by coordinate.
std::vector<double> score_statistic(std::span<const double> design,
                                    std::span<const double> y,
                                    std::span<const double> mu, double theta,
                                    std::size_t n, std::size_t p);

struct ExperimentConfig {
  std::size_t n = 200;
  std::size_t p = 50;
  std::vector<double> beta_star;  // size p (zeros beyond the active head)
  double theta = 5.0;
  double gamma = 2.0;
  double c1 = 0.0;  // <= 0 selects the oracle value max_i mu_i
  double c2 = 0.0;  // <= 0 selects max_j (1/n) sum_i xt_ij^2 mu_i
  long replicates = 500;
  SolverConfig solver{1e-6, 3000, 1.0, 1e-10};
};

struct ReplicateRow {
  long replicate;
  bool any_exceed;          // max_j stat_j >= w_j for some j
  double max_kkt_residual;  // of the lasso fit with these weights
  double l1_error;          // |beta_hat - beta_star|_1
  bool converged;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReplicateRow> rows;
  double c1_used;
  double c2_used;
  double exceed_freq;
  double per_coord_bound;  // 2 p^{-gamma}, the single-coordinate tail bound
  double union_bound;      // 2 p^{1-gamma}
  bool vacuous;           // union_bound >= 1
  double freq_std_error;  // binomial se at the union bound
  bool within_bound;      // exceed_freq <= union_bound + 4 se (when not vacuous)
  double median_l1;
};

// Per-replicate simulation of the score-exceedance event
// max_j (1/n)|sum_i xt_ij (y_i - mu_i)| >= w_j with xt_ij = x_ij theta/(theta
// + mu_i) evaluated at the true parameter, plus the lasso fit diagnostics.
ExperimentReport kkt_probability_experiment(const ExperimentConfig& config,
                                            const RngStream& base, int workers = 1);

// Read y,x1..xp rows (header required) into a problem with the given theta.
NbRegressionProblem read_problem_csv(std::istream& is, double theta);
void write_problem_csv(std::ostream& os, const NbRegressionProblem& problem);

}  // namespace dcpp
