#pragma once

#include <cstddef>
#include <vector>

#include "dcpp/params.hpp"
#include "dcpp/rng.hpp"

namespace dcpp {

// Poisson draw: sequential search from the inverted cdf for small rates,
// Hormann's transformed rejection (PTRS) for rate >= 30.
long poisson_draw(RngStream& rng, double rate);

// Gamma(shape, scale) by Marsaglia-Tsang squeeze; shapes below one use the
// boost G(a) = G(a+1) U^{1/a}.
double gamma_draw(RngStream& rng, double shape, double scale = 1.0);

// Standard normal by Box-Muller (one value per call, no caching).
double normal_draw(RngStream& rng);

// n draws of Y = sum_k k N_k, N_k ~ Poisson(lambda alpha_k) independent.
std::vector<long> sample_dcp_rv(const DcpParams& params, std::size_t n, RngStream& rng);

// n negative binomial draws through the gamma-Poisson mixture.
std::vector<long> sample_nb_direct(const NbParams& nb, std::size_t n, RngStream& rng);

}  // namespace dcpp
