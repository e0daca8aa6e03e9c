#pragma once

#include <functional>
#include <vector>

namespace dcpp {

struct WilsonInterval {
  double low;
  double high;
};

// Wilson score interval for a binomial proportion; the default z is the
// two-sided 99% normal quantile.
WilsonInterval wilson_interval(long successes, long trials,
                               double z = 2.5758293035489004);

double poisson_pmf(double rate, long k);
double poisson_cdf(double rate, long k);        // P(Y <= k)
double poisson_upper_tail(double rate, long m); // P(Y >= m)

// Survival function of the chi-square distribution (regularized upper
// incomplete gamma).
double chi_square_sf(double x, double df);

struct GofResult {
  double statistic;
  long df;
  double p_value;
  long pooled_bins;
};

// Pearson chi-square goodness of fit of integer draws against a pmf.  Bins
// with expected count below min_expected are pooled from the right tail.
GofResult chi_square_gof(const std::vector<long>& sample,
                         const std::function<double(long)>& pmf,
                         double min_expected = 5.0);

// Two-sample chi-square homogeneity test on integer draws.
GofResult chi_square_two_sample(const std::vector<long>& a,
                                const std::vector<long>& b,
                                double min_expected = 5.0);

double median(std::vector<double> values);

}  // namespace dcpp
