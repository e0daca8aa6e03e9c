#pragma once

#include <span>
#include <vector>

#include "dcpp/params.hpp"
#include "dcpp/region.hpp"
#include "dcpp/rng.hpp"

namespace dcpp {

// Samples the marked point process whose mark-k layer is an independent
// Poisson process with intensity alpha_k * (cell intensity).  Point counts
// per cell and layer are Poisson(alpha_k * cell mass); locations are uniform
// within the cell.
PointPattern sample_dcpp(const Region& region, std::span<const double> alphas,
                         RngStream& rng);

// Generalization with per-cell mark distributions and per-cell base rates
// that override the region intensities (cell k rate = base_rates[i], layer k
// rate = cell_alphas[i][k-1] * base_rates[i]).  Locations stay uniform in the
// cell.  Used to realize heterogeneous laws such as per-cell negative
// binomial counts.
PointPattern sample_dcpp(const Region& region,
                         const std::vector<std::vector<double>>& cell_alphas,
                         std::span<const double> base_rates, RngStream& rng);

// sum over points of mark * f(location) for a cellwise-constant integrand
// given by its per-cell values.
double stochastic_integral(const PointPattern& pattern, const Region& region,
                           std::span<const double> cell_values);

struct CampbellResult {
  double mc_estimate;   // mean of exp(theta * integral) over trials
  double closed_form;   // exp(sum_k alpha_k sum_c (e^{theta k f_c} - 1) mass_c)
  double std_error;     // sample standard error of the mean
  long trials;
};

// Closed-form Laplace functional of the weighted integral.
double campbell_closed_form(const Region& region, std::span<const double> alphas,
                            std::span<const double> cell_values, double theta);

// Monte Carlo check of the closed form.  Rejects inputs whose exponent
// theta * k * f_c exceeds 700 anywhere (the comparison would overflow).
CampbellResult campbell_check(const Region& region, std::span<const double> alphas,
                              std::span<const double> cell_values, double theta,
                              long trials, const RngStream& base, int workers = 1);

}  // namespace dcpp
