#include "dcpp/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

namespace dcpp {

namespace {

constexpr long kMaxK = 5000000;  // memory guard for the series route

void check_inputs(double region_mass, long k) {
  if (!(region_mass > 0.0) || !std::isfinite(region_mass)) {
    throw std::invalid_argument("pmf: region_mass must be positive and finite");
  }
  if (k < 0) {
    throw std::invalid_argument("pmf: k must be nonnegative");
  }
}

// Part sizes with nonzero weight, largest first.
std::vector<long> support_parts(const DcpParams& params, long k) {
  std::vector<long> parts;
  const auto& a = params.alphas();
  long top = std::min<long>(static_cast<long>(a.size()), k);
  for (long t = top; t >= 1; --t) {
    if (a[static_cast<std::size_t>(t - 1)] != 0.0) {
      parts.push_back(t);
    }
  }
  return parts;
}

}  // namespace

PartitionBudgetError::PartitionBudgetError(std::uint64_t needed, std::uint64_t budget)
    : std::runtime_error("pmf_partition: enumeration needs " +
                         std::to_string(needed) + " partition terms, budget is " +
                         std::to_string(budget) + "; use the matrix method"),
      needed_(needed),
      budget_(budget) {}

std::uint64_t partition_term_count(const DcpParams& params, long k,
                                   std::uint64_t cap) {
  if (k < 0) {
    return 0;
  }
  const std::uint64_t sat = cap + 1;
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(k) + 1, 0);
  ways[0] = 1;
  for (long t : support_parts(params, k)) {
    for (long j = t; j <= k; ++j) {
      std::uint64_t sum = ways[static_cast<std::size_t>(j)] +
                          ways[static_cast<std::size_t>(j - t)];
      ways[static_cast<std::size_t>(j)] = std::min(sum, sat);
    }
  }
  return ways[static_cast<std::size_t>(k)];
}

double pmf_partition(const DcpParams& params, double region_mass, long k,
                     const PmfOptions& options) {
  check_inputs(region_mass, k);
  std::uint64_t needed = partition_term_count(params, k, options.partition_budget);
  if (needed > options.partition_budget) {
    throw PartitionBudgetError(needed, options.partition_budget);
  }

  const auto& alpha = params.alphas();
  const std::vector<long> parts = support_parts(params, k);
  const bool log_space = region_mass > options.log_space_threshold;
  const double log_mass = std::log(region_mass);

  double total = 0.0;
  // Walk multiplicities of each part recursively, carrying the partial
  // product prod alpha_t^{s_t}/s_t! (or its log) and the part count S; a
  // completed partition contributes coef * mass^S, all scaled by e^{-mass}.
  auto visit = [&](auto&& self, std::size_t idx, long rem, double coef, long count)
      -> void {
    if (rem == 0) {
      if (log_space) {
        total += std::exp(coef + static_cast<double>(count) * log_mass - region_mass);
      } else {
        total += coef * std::pow(region_mass, static_cast<double>(count));
      }
      return;
    }
    if (idx == parts.size()) {
      return;
    }
    long t = parts[idx];
    double at = alpha[static_cast<std::size_t>(t - 1)];
    double f = coef;
    for (long s = 0; s * t <= rem; ++s) {
      if (s > 0) {
        if (log_space) {
          f += std::log(at) - std::log(static_cast<double>(s));
        } else {
          f *= at / static_cast<double>(s);
        }
      }
      self(self, idx + 1, rem - s * t, f, count + s);
    }
  };
  visit(visit, 0, k, log_space ? 0.0 : 1.0, 0);

  return log_space ? total : total * std::exp(-region_mass);
}

std::vector<double> pmf_matrix_vector(const DcpParams& params, double region_mass,
                                      long k_max) {
  check_inputs(region_mass, k_max);
  if (k_max > kMaxK) {
    throw std::invalid_argument("pmf_matrix: k exceeds the supported range");
  }

  // For large mass split it in half and convolve: a compound Poisson variable
  // with mass 2t is the sum of two independent copies with mass t.  Keeps
  // every intermediate value a probability, so no overflow for any mass.
  if (region_mass > 64.0) {
    std::vector<double> half = pmf_matrix_vector(params, region_mass / 2.0, k_max);
    std::vector<double> out(half.size(), 0.0);
    for (std::size_t i = 0; i < half.size(); ++i) {
      if (half[i] == 0.0) continue;
      for (std::size_t j = 0; i + j < half.size(); ++j) {
        out[i + j] += half[i] * half[j];
      }
    }
    return out;
  }

  // exp(mass * Q) c with Q = -I + sum_d alpha_d N^d and N the coefficient
  // shift: the -I factor commutes out as e^{-mass}, and powers of the shift
  // polynomial p(x) = sum_d alpha_d x^d are plain truncated products, so the
  // column of interest is e^{-mass} [x^j] sum_m (mass * p(x))^m / m!.
  const auto& alpha = params.alphas();
  const std::size_t n = static_cast<std::size_t>(k_max) + 1;
  const long top = std::min<long>(static_cast<long>(alpha.size()), k_max);
  std::vector<double> acc(n, 0.0), pw(n, 0.0), nxt(n);
  acc[0] = 1.0;
  pw[0] = 1.0;
  for (long m = 1; m <= k_max; ++m) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    bool any = false;
    for (long d = 1; d <= top; ++d) {
      double ad = alpha[static_cast<std::size_t>(d - 1)];
      if (ad == 0.0) continue;
      double td = region_mass * ad / static_cast<double>(m);
      for (long j = 0; j + d <= k_max; ++j) {
        double v = pw[static_cast<std::size_t>(j)];
        if (v != 0.0) {
          nxt[static_cast<std::size_t>(j + d)] += v * td;
          any = true;
        }
      }
    }
    pw.swap(nxt);
    if (!any) break;
    for (std::size_t j = 0; j < n; ++j) {
      acc[j] += pw[j];
    }
  }
  const double scale = std::exp(-region_mass);
  for (double& v : acc) {
    v *= scale;
  }
  return acc;
}

double pmf_matrix(const DcpParams& params, double region_mass, long k) {
  return pmf_matrix_vector(params, region_mass, k).back();
}

}  // namespace dcpp
