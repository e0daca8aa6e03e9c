#include "dcpp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace dcpp {

WilsonInterval wilson_interval(long successes, long trials, double z) {
  if (trials <= 0 || successes < 0 || successes > trials) {
    throw std::invalid_argument("wilson_interval: bad counts");
  }
  double n = static_cast<double>(trials);
  double phat = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = phat + z2 / (2.0 * n);
  double spread = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  double lo = (center - spread) / denom;
  double hi = (center + spread) / denom;
  return {std::max(lo, 0.0), std::min(hi, 1.0)};
}

double poisson_pmf(double rate, long k) {
  if (k < 0) return 0.0;
  if (rate == 0.0) return k == 0 ? 1.0 : 0.0;
  double dk = static_cast<double>(k);
  return std::exp(dk * std::log(rate) - rate - std::lgamma(dk + 1.0));
}

double poisson_cdf(double rate, long k) {
  if (k < 0) return 0.0;
  double term = std::exp(-rate);
  double cum = term;
  for (long j = 1; j <= k; ++j) {
    term *= rate / static_cast<double>(j);
    cum += term;
  }
  return std::min(cum, 1.0);
}

double poisson_upper_tail(double rate, long m) {
  if (m <= 0) return 1.0;
  // boost's regularized lower gamma: P(Y >= m) = gamma_p(m, rate)
  return boost::math::gamma_p(static_cast<double>(m), rate);
}

double chi_square_sf(double x, double df) {
  if (!(df > 0.0)) {
    throw std::invalid_argument("chi_square_sf: df must be positive");
  }
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

namespace {

struct BinnedCounts {
  std::vector<double> observed;
  std::vector<double> expected;
};

// Pools integer outcomes so every expected count reaches min_expected; the
// right tail is folded into one terminal bin.
GofResult pearson_from_bins(const std::vector<double>& obs,
                            const std::vector<double>& expd, long estimated) {
  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (expd[i] <= 0.0) {
      if (obs[i] > 0.0) {
        return {std::numeric_limits<double>::infinity(),
                static_cast<long>(obs.size()) - 1 - estimated, 0.0,
                static_cast<long>(obs.size())};
      }
      continue;
    }
    double d = obs[i] - expd[i];
    stat += d * d / expd[i];
  }
  long df = static_cast<long>(obs.size()) - 1 - estimated;
  if (df < 1) df = 1;
  return {stat, df, chi_square_sf(stat, static_cast<double>(df)),
          static_cast<long>(obs.size())};
}

}  // namespace

GofResult chi_square_gof(const std::vector<long>& sample,
                         const std::function<double(long)>& pmf,
                         double min_expected) {
  if (sample.size() < 50) {
    throw std::invalid_argument("chi_square_gof: sample too small");
  }
  long max_v = *std::max_element(sample.begin(), sample.end());
  long min_v = *std::min_element(sample.begin(), sample.end());
  if (min_v < 0) {
    throw std::invalid_argument("chi_square_gof: negative draw");
  }
  double n = static_cast<double>(sample.size());

  std::vector<double> counts(static_cast<std::size_t>(max_v) + 1, 0.0);
  for (long v : sample) counts[static_cast<std::size_t>(v)] += 1.0;

  // expected per outcome, with everything above max_v lumped into the last bin
  std::vector<double> expd(counts.size(), 0.0);
  double cum = 0.0;
  for (long k = 0; k <= max_v; ++k) {
    double pk = pmf(k);
    if (!(pk >= 0.0)) {
      throw std::invalid_argument("chi_square_gof: pmf returned a negative value");
    }
    expd[static_cast<std::size_t>(k)] = n * pk;
    cum += pk;
  }
  double tail = 1.0 - cum;
  if (tail > 0.0) expd.back() += n * tail;

  // pool from the right until each bin's expectation reaches the floor
  std::vector<double> obs_b, exp_b;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    o_acc += counts[k];
    e_acc += expd[k];
    if (e_acc >= min_expected) {
      obs_b.push_back(o_acc);
      exp_b.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (obs_b.empty()) {
      obs_b.push_back(o_acc);
      exp_b.push_back(e_acc);
    } else {
      obs_b.back() += o_acc;
      exp_b.back() += e_acc;
    }
  }
  if (obs_b.size() < 2) {
    throw std::invalid_argument("chi_square_gof: fewer than two usable bins");
  }
  return pearson_from_bins(obs_b, exp_b, 0);
}

GofResult chi_square_two_sample(const std::vector<long>& a,
                                const std::vector<long>& b, double min_expected) {
  if (a.size() < 50 || b.size() < 50) {
    throw std::invalid_argument("chi_square_two_sample: samples too small");
  }
  long max_v = std::max(*std::max_element(a.begin(), a.end()),
                        *std::max_element(b.begin(), b.end()));
  std::vector<double> ca(static_cast<std::size_t>(max_v) + 1, 0.0), cb = ca;
  for (long v : a) ca[static_cast<std::size_t>(v)] += 1.0;
  for (long v : b) cb[static_cast<std::size_t>(v)] += 1.0;

  double na = static_cast<double>(a.size());
  double nb = static_cast<double>(b.size());
  double ntot = na + nb;

  // pool jointly so both expected columns clear the floor
  std::vector<double> oa, ob, tot;
  double aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < ca.size(); ++k) {
    aa += ca[k];
    bb += cb[k];
    double t = aa + bb;
    if (t * na / ntot >= min_expected && t * nb / ntot >= min_expected) {
      oa.push_back(aa);
      ob.push_back(bb);
      tot.push_back(t);
      aa = bb = 0.0;
    }
  }
  if (aa + bb > 0.0 && !oa.empty()) {
    oa.back() += aa;
    ob.back() += bb;
    tot.back() += aa + bb;
  }
  if (oa.size() < 2) {
    throw std::invalid_argument("chi_square_two_sample: fewer than two usable bins");
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < oa.size(); ++i) {
    double ea = tot[i] * na / ntot;
    double eb = tot[i] * nb / ntot;
    stat += (oa[i] - ea) * (oa[i] - ea) / ea + (ob[i] - eb) * (ob[i] - eb) / eb;
  }
  long df = static_cast<long>(oa.size()) - 1;
  return {stat, df, chi_square_sf(stat, static_cast<double>(df)),
          static_cast<long>(oa.size())};
}

double median(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("median: empty input");
  }
  std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double hi = values[mid];
  if (values.size() % 2 == 1) {
    return hi;
  }
  double lo = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lo + hi);
}

}  // namespace dcpp
