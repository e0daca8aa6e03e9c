#pragma once

#include <cstddef>
#include <vector>

namespace dcpp {

// Parameter set of a discrete compound Poisson law.  The law is determined by
// a base rate lambda > 0 and jump-size probabilities alpha_1..alpha_R with
// alpha_R > 0.  A variable Y with these parameters decomposes as
// Y = sum_k k * N_k where the N_k are independent Poisson(lambda * alpha_k).
//
// For an exact law the alphas must sum to 1.  A truncated parameter set (as
// produced by converting an infinitely supported law such as the negative
// binomial) carries the discarded tail mass explicitly so downstream code can
// account for the approximation.
class DcpParams {
 public:
  DcpParams(double lambda, std::vector<double> alphas, bool truncated = false);

  double lambda() const { return lambda_; }
  const std::vector<double>& alphas() const { return alphas_; }
  std::size_t order() const { return alphas_.size(); }
  bool truncated() const { return truncated_; }
  // 1 - sum(alphas); zero for exact parameter sets.
  double tail_mass() const { return tail_mass_; }

 private:
  double lambda_;
  std::vector<double> alphas_;  // alphas_[i] is the weight of jump size i+1
  bool truncated_;
  double tail_mass_;
};

// Negative binomial with success-count r > 0 and success probability
// q in (0,1), pmf P(Y=n) = Gamma(n+r)/(Gamma(r) n!) (1-q)^r q^n.
class NbParams {
 public:
  NbParams(double r, double q);
  double r() const { return r_; }
  double q() const { return q_; }
  double mean() const { return r_ * q_ / (1.0 - q_); }
  double variance() const { return r_ * q_ / ((1.0 - q_) * (1.0 - q_)); }

 private:
  double r_;
  double q_;
};

struct Moments {
  double mean;
  double variance;
};

// Mean lambda * sum_k k alpha_k and variance lambda * sum_k k^2 alpha_k.
Moments moments(const DcpParams& params);

// Probability generating function E[z^Y] = exp(lambda * sum_k alpha_k (z^k - 1)).
// Defined for |z| <= 1; a small excess is tolerated so finite differences can
// straddle z = 1.
double pgf_eval(const DcpParams& params, double z);

// Laplace transform E[e^{-theta Y}] for theta >= 0, evaluated as the pgf at
// z = e^{-theta}.
double mgf_eval(const DcpParams& params, double theta);

// Expresses NB(r, q) as a compound Poisson law: lambda = -r ln(1-q) and
// alpha_i = q^i / (-i ln(1-q)).  The expansion is cut at the smallest order R
// whose discarded tail is below tol; the result is marked truncated whenever
// tail mass remains.
DcpParams nb_to_dcp(const NbParams& nb, double tol, std::size_t max_order = 100000);

// Closed-form NB pmf at n >= 0, via the log-gamma function.
double nb_pmf(const NbParams& nb, long n);

}  // namespace dcpp
