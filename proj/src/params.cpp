#include "dcpp/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dcpp {

namespace {

constexpr double kSumTol = 1e-12;

}  // namespace

DcpParams::DcpParams(double lambda, std::vector<double> alphas, bool truncated)
    : lambda_(lambda), alphas_(std::move(alphas)), truncated_(truncated) {
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) {
    throw std::invalid_argument("DcpParams: lambda must be positive and finite");
  }
  while (!alphas_.empty() && alphas_.back() == 0.0) {
    alphas_.pop_back();
  }
  if (alphas_.empty()) {
    throw std::invalid_argument("DcpParams: at least one nonzero alpha required");
  }
  double sum = 0.0;
  for (double a : alphas_) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("DcpParams: alphas must be nonnegative and finite");
    }
    sum += a;
  }
  if (truncated_) {
    if (sum > 1.0 + kSumTol) {
      throw std::invalid_argument("DcpParams: truncated alphas sum above 1");
    }
    tail_mass_ = sum < 1.0 ? 1.0 - sum : 0.0;
  } else {
    if (std::abs(sum - 1.0) > kSumTol) {
      throw std::invalid_argument(
          "DcpParams: alphas must sum to 1 within 1e-12 (got " +
          std::to_string(sum) + "); pass truncated=true for cut expansions");
    }
    tail_mass_ = 0.0;
  }
}

NbParams::NbParams(double r, double q) : r_(r), q_(q) {
  if (!(r_ > 0.0) || !std::isfinite(r_)) {
    throw std::invalid_argument("NbParams: r must be positive and finite");
  }
  if (!(q_ > 0.0) || !(q_ < 1.0)) {
    throw std::invalid_argument("NbParams: q must lie in (0,1)");
  }
}

Moments moments(const DcpParams& params) {
  double m1 = 0.0;
  double m2 = 0.0;
  const auto& a = params.alphas();
  for (std::size_t i = 0; i < a.size(); ++i) {
    double k = static_cast<double>(i + 1);
    m1 += k * a[i];
    m2 += k * k * a[i];
  }
  return {params.lambda() * m1, params.lambda() * m2};
}

double pgf_eval(const DcpParams& params, double z) {
  // Small overshoot past |z| = 1 is allowed so centered finite differences at
  // z = 1 remain inside the domain.
  constexpr double kDomainSlack = 1e-2;
  if (!(std::abs(z) <= 1.0 + kDomainSlack)) {
    throw std::domain_error("pgf_eval: |z| must be <= 1");
  }
  double expo = 0.0;
  double zk = 1.0;
  for (double a : params.alphas()) {
    zk *= z;
    expo += a * (zk - 1.0);
  }
  return std::exp(params.lambda() * expo);
}

double mgf_eval(const DcpParams& params, double theta) {
  if (!(theta >= 0.0)) {
    throw std::domain_error("mgf_eval: theta must be >= 0");
  }
  return pgf_eval(params, std::exp(-theta));
}

DcpParams nb_to_dcp(const NbParams& nb, double tol, std::size_t max_order) {
  if (!(tol > 0.0) || tol >= 1.0) {
    throw std::invalid_argument("nb_to_dcp: tol must lie in (0,1)");
  }
  const double q = nb.q();
  const double neg_log1mq = -std::log1p(-q);  // -ln(1-q) > 0
  const double lambda = nb.r() * neg_log1mq;

  // alpha_i = q^i / (i * -ln(1-q)) is the logarithmic distribution; cut the
  // series at the first R whose remaining tail drops below tol.
  std::vector<double> alphas;
  alphas.reserve(64);
  double qi = 1.0;
  double head = 0.0;
  bool reached = false;
  for (std::size_t i = 1; i <= max_order; ++i) {
    qi *= q;
    double ai = qi / (static_cast<double>(i) * neg_log1mq);
    alphas.push_back(ai);
    head += ai;
    if (1.0 - head <= tol) {
      reached = true;
      break;
    }
  }
  if (!reached) {
    throw std::invalid_argument(
        "nb_to_dcp: tail tolerance not reachable within max_order terms");
  }
  bool truncated = head < 1.0;
  return DcpParams(lambda, std::move(alphas), truncated);
}

double nb_pmf(const NbParams& nb, long n) {
  if (n < 0) {
    return 0.0;
  }
  double dn = static_cast<double>(n);
  double lg = std::lgamma(dn + nb.r()) - std::lgamma(nb.r()) - std::lgamma(dn + 1.0);
  return std::exp(lg + nb.r() * std::log1p(-nb.q()) + dn * std::log(nb.q()));
}

}  // namespace dcpp
