#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dcpp/params.hpp"
#include "dcpp/region.hpp"
#include "dcpp/rng.hpp"
#include "dcpp/stats.hpp"

namespace dcpp {

enum class BoundKind {
  sum_upper,       // P(Y - EY >= sqrt(2xV) + rx) <= e^-x
  sum_lower,       // P(Y - EY <= -sqrt(2xV))     <= e^-x
  sum_two_sided,   // P(|Y - EY| >= sqrt(2xV) + rx) <= 2e^-x
  integral,        // P(int f dCP - int f dLambda >= m1(sqrt(2yV_f) + y/3 ||f||)) <= e^-y
  integral_sum,    // n-process version, bound e^-ny
  indicator,       // integral bound specialized to f = 1_A
};

const char* to_string(BoundKind kind);

// One deviation inequality instance: P(deviation >= threshold) <= bound.
// The bound is the raw exponential value and may exceed 1 for the two-sided
// kind at small x.
struct TailBoundSpec {
  BoundKind kind;
  double threshold;
  double bound;
  std::string inputs_digest;  // key=value summary of the inputs, for reports
};

struct SumBounds {
  TailBoundSpec upper;
  TailBoundSpec lower;
  TailBoundSpec two_sided;
};

// Bernstein-type bounds for a finite sum of independent compound Poisson
// variables: V is the total variance, r the largest jump order among the
// summands.  Truncated parameter sets are rejected unless explicitly allowed
// (a truncated law is exact for the truncated parameters, not the original).
SumBounds bound_compound_sum(std::span<const DcpParams> params_list, double x,
                             bool allow_truncated = false);

// Bound for the centered integral int f d(CP - Lambda) of a nonnegative
// cellwise-constant f against a single process on `region` with jump weights
// `alphas`: threshold m1 (sqrt(2 y V_f) + y/3 ||f||_inf) with
// m1 = sum_k k alpha_k * total mass scale absorbed in V_f; bound e^-y.
TailBoundSpec bound_integral(const Region& region, std::span<const double> alphas,
                             std::span<const double> cell_values, double y);

// Indicator special case f = 1_A with A the whole region: threshold
// (EY/lambda) (sqrt(2 y lambda) + y/3) for Y with the given parameters and
// region mass lambda.
TailBoundSpec bound_indicator(const DcpParams& params, double region_mass, double y);

struct ProcessSpec {
  Region region;
  std::vector<double> alphas;
  std::vector<double> cell_values;  // f on the cells of this process's region
};

// Sum of n independent processes: threshold sum_i m1_i (sqrt(2 y V_i,f) +
// y/3 ||f||_inf) with the sup taken across all processes; bound e^{-n y}.
TailBoundSpec bound_integral_sum(std::span<const ProcessSpec> processes, double y);

struct TailReport {
  TailBoundSpec spec;
  double empirical;
  double ci_low;
  double ci_high;
  long trials;
  bool pass;  // ci_low <= bound
};

// Estimates P(deviation >= threshold) by Monte Carlo.  draw returns one
// realization of the deviation statistic from the given stream; each trial
// uses a stream derived from `base` by trial index, so the result does not
// depend on the worker count.  Requires trials >= 1000.
TailReport empirical_tail(const std::function<double(RngStream&)>& draw,
                          const TailBoundSpec& spec, long trials,
                          const RngStream& base, int workers = 1);

std::string tail_report_json(const TailReport& report);

// Fixture sweep used by the verification suite: compound Poisson sum bounds
// and integral bounds across laws, masses and exponent levels, each checked
// against the exact tail where available and against Monte Carlo otherwise.
struct GridEntry {
  std::string fixture;
  double level;  // x or y
  TailReport report;
  bool exact;    // tail computed in closed form rather than by Monte Carlo
};

std::vector<GridEntry> run_dominance_grid(long trials, const RngStream& base,
                                          int workers = 1);

// Laplace-functional fixture sweep: Monte Carlo moment of exp(theta * I)
// against the closed form for several laws, regions and integrands.
struct CampbellEntry {
  std::string fixture;
  double theta;
  double mc_estimate;
  double closed_form;
  double std_error;
  double z;  // |mc - closed| / se, 0 when the difference vanishes
  bool pass;
};

std::vector<CampbellEntry> run_campbell_grid(long trials, const RngStream& base,
                                             int workers = 1);

}  // namespace dcpp
