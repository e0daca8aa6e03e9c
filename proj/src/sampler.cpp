#include "dcpp/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace dcpp {

namespace {

// Knuth-style inversion by sequential search; fine below rate 30 where
// e^{-rate} cannot underflow and the expected scan is short.
long poisson_small(RngStream& rng, double rate) {
  double p = std::exp(-rate);
  double cum = p;
  double u = rng.uniform01();
  long k = 0;
  while (u > cum) {
    ++k;
    p *= rate / static_cast<double>(k);
    cum += p;
    if (p == 0.0) break;  // u in the far tail; cum has saturated
  }
  return k;
}

// Hormann's PTRS transformed rejection, valid for rate >= 10.
long poisson_ptrs(RngStream& rng, double rate) {
  const double log_rate = std::log(rate);
  const double b = 0.931 + 2.53 * std::sqrt(rate);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    double u = rng.uniform01() - 0.5;
    double v = rng.uniform01();
    double us = 0.5 - std::abs(u);
    double kd = std::floor((2.0 * a / us + b) * u + rate + 0.43);
    if (us >= 0.07 && v <= v_r) {
      return static_cast<long>(kd);
    }
    if (kd < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    double k = kd;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_rate - rate - std::lgamma(k + 1.0)) {
      return static_cast<long>(kd);
    }
  }
}

}  // namespace

long poisson_draw(RngStream& rng, double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument("poisson_draw: rate must be nonnegative and finite");
  }
  if (rate == 0.0) {
    return 0;
  }
  return rate < 30.0 ? poisson_small(rng, rate) : poisson_ptrs(rng, rate);
}

double normal_draw(RngStream& rng) {
  double u1 = rng.uniform01();
  double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double gamma_draw(RngStream& rng, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw std::invalid_argument("gamma_draw: shape and scale must be positive");
  }
  if (shape < 1.0) {
    // Marsaglia-Tsang boost: G(a) = G(a+1) * U^{1/a}
    double u = rng.uniform01();
    return gamma_draw(rng, shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal_draw(rng);
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = rng.uniform01();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) {
      return scale * d * v;
    }
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return scale * d * v;
    }
  }
}

std::vector<long> sample_dcp_rv(const DcpParams& params, std::size_t n,
                                RngStream& rng) {
  const auto& alpha = params.alphas();
  std::vector<long> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    long y = 0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      if (alpha[k] == 0.0) continue;
      y += static_cast<long>(k + 1) * poisson_draw(rng, params.lambda() * alpha[k]);
    }
    out.push_back(y);
  }
  return out;
}

std::vector<long> sample_nb_direct(const NbParams& nb, std::size_t n,
                                   RngStream& rng) {
  // gamma-Poisson mixture: G ~ Gamma(r, q/(1-q)), Y | G ~ Poisson(G)
  const double scale = nb.q() / (1.0 - nb.q());
  std::vector<long> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double g = gamma_draw(rng, nb.r(), scale);
    out.push_back(poisson_draw(rng, g));
  }
  return out;
}

}  // namespace dcpp
