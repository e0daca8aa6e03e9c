#include "dcpp/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "dcpp/sampler.hpp"

namespace dcpp {

namespace {

void check_alphas(std::span<const double> alphas) {
  if (alphas.empty()) {
    throw std::invalid_argument("sample_dcpp: alphas must be nonempty");
  }
  double sum = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("sample_dcpp: alphas must be nonnegative");
    }
    sum += a;
  }
  if (sum > 1.0 + 1e-12) {
    throw std::invalid_argument("sample_dcpp: alphas sum above 1");
  }
}

void append_layer_points(const Region& region, std::size_t cell_idx, long mark,
                         double rate, RngStream& rng,
                         std::vector<MarkedPoint>& out) {
  long count = poisson_draw(rng, rate);
  const Box& box = region.cells()[cell_idx].box;
  for (long c = 0; c < count; ++c) {
    MarkedPoint pt;
    pt.x.reserve(region.dim());
    for (std::size_t d = 0; d < region.dim(); ++d) {
      pt.x.push_back(rng.uniform(box.lo[d], box.hi[d]));
    }
    pt.mark = mark;
    pt.cell = cell_idx;
    out.push_back(std::move(pt));
  }
}

}  // namespace

PointPattern sample_dcpp(const Region& region, std::span<const double> alphas,
                         RngStream& rng) {
  check_alphas(alphas);
  std::vector<MarkedPoint> points;
  for (std::size_t i = 0; i < region.cell_count(); ++i) {
    double mass = region.cell_mass(i);
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      if (alphas[k] == 0.0) continue;
      append_layer_points(region, i, static_cast<long>(k + 1), alphas[k] * mass,
                          rng, points);
    }
  }
  return PointPattern(region.dim(), std::move(points));
}

PointPattern sample_dcpp(const Region& region,
                         const std::vector<std::vector<double>>& cell_alphas,
                         std::span<const double> base_rates, RngStream& rng) {
  if (cell_alphas.size() != region.cell_count() ||
      base_rates.size() != region.cell_count()) {
    throw std::invalid_argument("sample_dcpp: per-cell inputs must match cell count");
  }
  std::vector<MarkedPoint> points;
  for (std::size_t i = 0; i < region.cell_count(); ++i) {
    check_alphas(cell_alphas[i]);
    if (!(base_rates[i] >= 0.0) || !std::isfinite(base_rates[i])) {
      throw std::invalid_argument("sample_dcpp: base rates must be nonnegative");
    }
    for (std::size_t k = 0; k < cell_alphas[i].size(); ++k) {
      if (cell_alphas[i][k] == 0.0) continue;
      append_layer_points(region, i, static_cast<long>(k + 1),
                          cell_alphas[i][k] * base_rates[i], rng, points);
    }
  }
  return PointPattern(region.dim(), std::move(points));
}

double stochastic_integral(const PointPattern& pattern, const Region& region,
                           std::span<const double> cell_values) {
  if (cell_values.size() != region.cell_count()) {
    throw std::invalid_argument(
        "stochastic_integral: need one value per region cell");
  }
  double total = 0.0;
  for (const MarkedPoint& pt : pattern.points()) {
    total += static_cast<double>(pt.mark) * cell_values[pt.cell];
  }
  return total;
}

double campbell_closed_form(const Region& region, std::span<const double> alphas,
                            std::span<const double> cell_values, double theta) {
  check_alphas(alphas);
  if (cell_values.size() != region.cell_count()) {
    throw std::invalid_argument("campbell: need one f value per region cell");
  }
  double expo = 0.0;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    if (alphas[k] == 0.0) continue;
    double kk = static_cast<double>(k + 1);
    for (std::size_t c = 0; c < region.cell_count(); ++c) {
      double arg = theta * kk * cell_values[c];
      if (std::abs(arg) > 700.0) {
        throw std::invalid_argument(
            "campbell: exponent theta*k*f exceeds 700, overflow");
      }
      expo += alphas[k] * std::expm1(arg) * region.cell_mass(c);
    }
  }
  return std::exp(expo);
}

CampbellResult campbell_check(const Region& region, std::span<const double> alphas,
                              std::span<const double> cell_values, double theta,
                              long trials, const RngStream& base, int workers) {
  if (trials < 1) {
    throw std::invalid_argument("campbell_check: trials must be >= 1");
  }
  double closed = campbell_closed_form(region, alphas, cell_values, theta);

  // One derived stream per trial keeps the estimate identical for any worker
  // count; partial sums are combined in worker order.
  auto run_range = [&](long lo, long hi, double& sum, double& sumsq) {
    double s = 0.0, s2 = 0.0;
    for (long t = lo; t < hi; ++t) {
      RngStream rng = base.derive(static_cast<std::uint64_t>(t));
      PointPattern pat = sample_dcpp(region, alphas, rng);
      double v = std::exp(theta * stochastic_integral(pat, region, cell_values));
      s += v;
      s2 += v * v;
    }
    sum = s;
    sumsq = s2;
  };

  int w = workers < 1 ? 1 : workers;
  std::vector<double> sums(static_cast<std::size_t>(w), 0.0);
  std::vector<double> sumsqs(static_cast<std::size_t>(w), 0.0);
  if (w == 1) {
    run_range(0, trials, sums[0], sumsqs[0]);
  } else {
    std::vector<std::thread> threads;
    long chunk = (trials + w - 1) / w;
    for (int i = 0; i < w; ++i) {
      long lo = i * chunk;
      long hi = std::min<long>(trials, lo + chunk);
      if (lo >= hi) break;
      threads.emplace_back(run_range, lo, hi, std::ref(sums[static_cast<std::size_t>(i)]),
                           std::ref(sumsqs[static_cast<std::size_t>(i)]));
    }
    for (auto& th : threads) th.join();
  }
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < w; ++i) {
    sum += sums[static_cast<std::size_t>(i)];
    sumsq += sumsqs[static_cast<std::size_t>(i)];
  }

  double mean = sum / static_cast<double>(trials);
  double var = 0.0;
  if (trials > 1) {
    var = (sumsq - sum * sum / static_cast<double>(trials)) /
          static_cast<double>(trials - 1);
    if (var < 0.0) var = 0.0;
  }
  double se = std::sqrt(var / static_cast<double>(trials));
  return {mean, closed, se, trials};
}

}  // namespace dcpp
