#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dcpp/params.hpp"

namespace dcpp {

// Thrown when the partition-sum pmf would enumerate more terms than allowed.
class PartitionBudgetError : public std::runtime_error {
 public:
  PartitionBudgetError(std::uint64_t needed, std::uint64_t budget);
  std::uint64_t needed() const { return needed_; }
  std::uint64_t budget() const { return budget_; }

 private:
  std::uint64_t needed_;
  std::uint64_t budget_;
};

struct PmfOptions {
  // Above this region mass the partition terms are accumulated in log space
  // to dodge underflow of e^{-mass}.
  double log_space_threshold = 30.0;
  std::uint64_t partition_budget = 1000000;
};

// P(Y(A) = k) by direct enumeration of the integer partitions of k into
// parts with nonzero alpha: each partition {s_t copies of part t} contributes
// prod_t alpha_t^{s_t}/s_t! * mass^{sum s_t} * e^{-mass}.
double pmf_partition(const DcpParams& params, double region_mass, long k,
                     const PmfOptions& options = {});

// Same probability through the generator-matrix route: with the nilpotent
// shift N, Q = -I + sum_i alpha_i N^i and P(Y(A)=k) is the last entry of
// exp(Q * mass) c.  Because N^i shifts polynomial coefficients this is
// computed as e^{-mass} [x^k] exp(mass * p(x)), p(x) = sum_i alpha_i x^i,
// with all series arithmetic truncated beyond degree k.
double pmf_matrix(const DcpParams& params, double region_mass, long k);

// P(Y(A) = j) for j = 0..k_max in one pass; pmf_matrix is the last entry.
std::vector<double> pmf_matrix_vector(const DcpParams& params, double region_mass,
                                      long k_max);

// Number of partitions of k into parts from the support of alpha, saturated
// at cap + 1.  Used for the enumeration budget check.
std::uint64_t partition_term_count(const DcpParams& params, long k, std::uint64_t cap);

}  // namespace dcpp
