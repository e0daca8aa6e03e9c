#include "dcpp/concentration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <thread>

#include <json.hpp>

#include "dcpp/pmf.hpp"
#include "dcpp/point_process.hpp"
#include "dcpp/sampler.hpp"

namespace dcpp {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_level(double x, const char* who) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument(std::string(who) + ": exponent level must be positive");
  }
}

// Shared threshold expression for the integral bounds; kept in one place so
// the single-process bound and the n = 1 sum bound agree bit for bit.
double integral_threshold(double m1, double vf, double fsup, double y) {
  return m1 * (std::sqrt(2.0 * y * vf) + y / 3.0 * fsup);
}

}  // namespace

const char* to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::sum_upper: return "sum_upper";
    case BoundKind::sum_lower: return "sum_lower";
    case BoundKind::sum_two_sided: return "sum_two_sided";
    case BoundKind::integral: return "integral";
    case BoundKind::integral_sum: return "integral_sum";
    case BoundKind::indicator: return "indicator";
  }
  return "unknown";
}

SumBounds bound_compound_sum(std::span<const DcpParams> params_list, double x,
                             bool allow_truncated) {
  if (params_list.empty()) {
    throw std::invalid_argument("bound_compound_sum: empty parameter list");
  }
  check_level(x, "bound_compound_sum");
  double v = 0.0;
  std::size_t r = 0;
  for (const DcpParams& p : params_list) {
    if (p.truncated() && !allow_truncated) {
      throw std::invalid_argument(
          "bound_compound_sum: truncated parameters describe the cut law, not "
          "the original; pass allow_truncated to accept that reading");
    }
    v += moments(p).variance;
    r = std::max(r, p.order());
  }
  double rd = static_cast<double>(r);
  double up = std::sqrt(2.0 * x * v) + rd * x;
  double lo = std::sqrt(2.0 * x * v);
  double b = std::exp(-x);

  std::string digest = "n=" + std::to_string(params_list.size()) + ";V=" + fmt(v) +
                       ";r=" + std::to_string(r) + ";x=" + fmt(x);
  return {
      {BoundKind::sum_upper, up, b, digest},
      {BoundKind::sum_lower, lo, b, digest},
      {BoundKind::sum_two_sided, up, 2.0 * b, digest},
  };
}

TailBoundSpec bound_integral(const Region& region, std::span<const double> alphas,
                             std::span<const double> cell_values, double y) {
  check_level(y, "bound_integral");
  if (cell_values.size() != region.cell_count()) {
    throw std::invalid_argument("bound_integral: need one f value per region cell");
  }
  double m1 = 0.0;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    m1 += static_cast<double>(k + 1) * alphas[k];
  }
  double vf = 0.0;
  double fsup = 0.0;
  for (std::size_t c = 0; c < cell_values.size(); ++c) {
    double f = cell_values[c];
    if (!(f >= 0.0)) {
      throw std::invalid_argument("bound_integral: f must be nonnegative");
    }
    vf += f * f * region.cell_mass(c);
    fsup = std::max(fsup, f);
  }
  double thr = integral_threshold(m1, vf, fsup, y);
  std::string digest = "m1=" + fmt(m1) + ";Vf=" + fmt(vf) + ";fsup=" + fmt(fsup) +
                       ";y=" + fmt(y);
  return {BoundKind::integral, thr, std::exp(-y), digest};
}

TailBoundSpec bound_indicator(const DcpParams& params, double region_mass, double y) {
  check_level(y, "bound_indicator");
  if (!(region_mass > 0.0) || !std::isfinite(region_mass)) {
    throw std::invalid_argument("bound_indicator: region mass must be positive");
  }
  double m1 = 0.0;
  for (std::size_t k = 0; k < params.alphas().size(); ++k) {
    m1 += static_cast<double>(k + 1) * params.alphas()[k];
  }
  // f = 1 on a region of mass lambda: EY/lambda * (sqrt(2 y lambda) + y/3)
  double thr = m1 * (std::sqrt(2.0 * y * region_mass) + y / 3.0);
  std::string digest = "m1=" + fmt(m1) + ";mass=" + fmt(region_mass) + ";y=" + fmt(y);
  return {BoundKind::indicator, thr, std::exp(-y), digest};
}

TailBoundSpec bound_integral_sum(std::span<const ProcessSpec> processes, double y) {
  check_level(y, "bound_integral_sum");
  if (processes.empty()) {
    throw std::invalid_argument("bound_integral_sum: empty process list");
  }
  double fsup = 0.0;
  for (const ProcessSpec& ps : processes) {
    if (ps.cell_values.size() != ps.region.cell_count()) {
      throw std::invalid_argument(
          "bound_integral_sum: need one f value per region cell");
    }
    for (double f : ps.cell_values) {
      if (!(f >= 0.0)) {
        throw std::invalid_argument("bound_integral_sum: f must be nonnegative");
      }
      fsup = std::max(fsup, f);
    }
  }
  double thr = 0.0;
  for (const ProcessSpec& ps : processes) {
    double m1 = 0.0;
    for (std::size_t k = 0; k < ps.alphas.size(); ++k) {
      m1 += static_cast<double>(k + 1) * ps.alphas[k];
    }
    double vf = 0.0;
    for (std::size_t c = 0; c < ps.cell_values.size(); ++c) {
      vf += ps.cell_values[c] * ps.cell_values[c] * ps.region.cell_mass(c);
    }
    thr += integral_threshold(m1, vf, fsup, y);
  }
  double n = static_cast<double>(processes.size());
  std::string digest = "n=" + std::to_string(processes.size()) + ";y=" + fmt(y);
  return {BoundKind::integral_sum, thr, std::exp(-n * y), digest};
}

TailReport empirical_tail(const std::function<double(RngStream&)>& draw,
                          const TailBoundSpec& spec, long trials,
                          const RngStream& base, int workers) {
  if (trials < 1000) {
    throw std::invalid_argument("empirical_tail: need at least 1000 trials");
  }

  auto run_range = [&](long lo, long hi, long& exceed) {
    long count = 0;
    for (long t = lo; t < hi; ++t) {
      RngStream rng = base.derive(static_cast<std::uint64_t>(t));
      if (draw(rng) >= spec.threshold) {
        ++count;
      }
    }
    exceed = count;
  };

  int w = workers < 1 ? 1 : workers;
  std::vector<long> counts(static_cast<std::size_t>(w), 0);
  if (w == 1) {
    run_range(0, trials, counts[0]);
  } else {
    std::vector<std::thread> threads;
    long chunk = (trials + w - 1) / w;
    for (int i = 0; i < w; ++i) {
      long lo = i * chunk;
      long hi = std::min<long>(trials, lo + chunk);
      if (lo >= hi) break;
      threads.emplace_back(run_range, lo, hi,
                           std::ref(counts[static_cast<std::size_t>(i)]));
    }
    for (auto& th : threads) th.join();
  }
  long exceed = 0;
  for (long c : counts) exceed += c;

  WilsonInterval ci = wilson_interval(exceed, trials);
  double emp = static_cast<double>(exceed) / static_cast<double>(trials);
  bool pass = ci.low <= spec.bound;
  return {spec, emp, ci.low, ci.high, trials, pass};
}

std::string tail_report_json(const TailReport& report) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(report.spec.kind);
  j["inputs_digest"] = report.spec.inputs_digest;
  j["threshold"] = report.spec.threshold;
  j["bound"] = report.spec.bound;
  j["empirical"] = report.empirical;
  j["ci_low"] = report.ci_low;
  j["ci_high"] = report.ci_high;
  j["trials"] = report.trials;
  j["verdict"] = report.pass ? "pass" : "fail";
  return j.dump();
}

namespace {

struct GridFixture {
  std::string name;
  DcpParams params;
};

// Exact tails for the pure Poisson fixture (mean = mass), independent of the
// compound pmf code paths.
double exact_poisson_upper(double mass, double thr) {
  long cut = static_cast<long>(std::ceil(mass + thr));
  return poisson_upper_tail(mass, cut);
}

double exact_poisson_lower(double mass, double thr) {
  double cutv = mass - thr;
  if (cutv < 0.0) return 0.0;
  return poisson_cdf(mass, static_cast<long>(std::floor(cutv)));
}

}  // namespace

std::vector<GridEntry> run_dominance_grid(long trials, const RngStream& base,
                                          int workers) {
  // Laws: Poisson, two-point jumps, a truncated negative binomial; masses and
  // exponent levels sweep around the interesting small-deviation range.
  std::vector<GridFixture> laws;
  laws.push_back({"poisson", DcpParams(1.0, {1.0})});
  laws.push_back({"two_point", DcpParams(1.0, {0.5, 0.5})});
  laws.push_back({"nb_r2_q03", nb_to_dcp(NbParams(2.0, 0.3), 1e-12)});
  const double masses[] = {0.5, 1.0, 5.0};
  const double levels[] = {0.25, 0.5, 1.0, 2.0, 4.0};

  std::vector<GridEntry> out;
  std::uint64_t fixture_idx = 0;
  for (const GridFixture& law : laws) {
    for (double mass : masses) {
      DcpParams scaled(mass, law.params.alphas(), law.params.truncated());
      double mean = moments(scaled).mean;
      for (double x : levels) {
        ++fixture_idx;
        std::array<DcpParams, 1> one{scaled};
        SumBounds sb = bound_compound_sum(one, x, /*allow_truncated=*/true);
        std::string tag = law.name + ";mass=" + fmt(mass);

        bool exact = law.name == "poisson";
        RngStream fixture_base = base.derive(fixture_idx);

        auto draw_upper = [&scaled, mean](RngStream& rng) {
          return static_cast<double>(sample_dcp_rv(scaled, 1, rng)[0]) - mean;
        };
        auto draw_lower = [&scaled, mean](RngStream& rng) {
          return mean - static_cast<double>(sample_dcp_rv(scaled, 1, rng)[0]);
        };

        if (exact) {
          double tail_u = exact_poisson_upper(mass, sb.upper.threshold);
          bool pass_u = tail_u <= sb.upper.bound;
          out.push_back({tag + ";side=upper", x,
                         {sb.upper, tail_u, tail_u, tail_u, 0, pass_u}, true});
          double tail_l = exact_poisson_lower(mass, sb.lower.threshold);
          bool pass_l = tail_l <= sb.lower.bound;
          out.push_back({tag + ";side=lower", x,
                         {sb.lower, tail_l, tail_l, tail_l, 0, pass_l}, true});
        } else {
          out.push_back({tag + ";side=upper", x,
                         empirical_tail(draw_upper, sb.upper, trials,
                                        fixture_base.derive(0), workers),
                         false});
          out.push_back({tag + ";side=lower", x,
                         empirical_tail(draw_lower, sb.lower, trials,
                                        fixture_base.derive(1), workers),
                         false});
        }

        // indicator-integral bound on the same law, f = 1 over the region
        TailBoundSpec ind = bound_indicator(scaled, mass, x);
        if (exact) {
          double tail_i = exact_poisson_upper(mass, ind.threshold);
          bool pass_i = tail_i <= ind.bound;
          out.push_back({tag + ";side=indicator", x,
                         {ind, tail_i, tail_i, tail_i, 0, pass_i}, true});
        } else {
          out.push_back({tag + ";side=indicator", x,
                         empirical_tail(draw_upper, ind, trials,
                                        fixture_base.derive(2), workers),
                         false});
        }
      }
    }
  }
  return out;
}

std::vector<CampbellEntry> run_campbell_grid(long trials, const RngStream& base,
                                             int workers) {
  struct Fixture {
    std::string name;
    Region region;
    std::vector<double> alphas;
  };
  std::vector<Fixture> fixtures;
  fixtures.push_back({"unit_poisson", Region::single_cell(1.0), {1.0}});
  fixtures.push_back(
      {"two_cell_half",
       Region(1, {Cell{Box{{0.0}, {1.0}}, 1.0}, Cell{Box{{2.0}, {3.0}}, 0.5}}),
       {0.5, 0.5}});
  fixtures.push_back({"three_jump", Region::single_cell(1.0), {0.5, 0.3, 0.2}});

  // (theta, integrand) combos; the last one varies f across cells
  struct Combo {
    std::string name;
    double theta;
    bool flat;  // f = 1 everywhere; otherwise f_c = 1 + c/2
  };
  const Combo combos[] = {
      {"theta_m1_flat", -1.0, true},
      {"theta_05_flat", 0.5, true},
      {"theta_025_slope", 0.25, false},
  };

  std::vector<CampbellEntry> out;
  std::uint64_t idx = 0;
  for (const Fixture& fx : fixtures) {
    for (const Combo& cb : combos) {
      ++idx;
      std::vector<double> f(fx.region.cell_count(), 1.0);
      if (!cb.flat) {
        for (std::size_t c = 0; c < f.size(); ++c) {
          f[c] = 1.0 + 0.5 * static_cast<double>(c);
        }
      }
      CampbellResult res = campbell_check(fx.region, fx.alphas, f, cb.theta,
                                          trials, base.derive(idx), workers);
      double diff = std::abs(res.mc_estimate - res.closed_form);
      double z = diff == 0.0 ? 0.0 : diff / res.std_error;
      out.push_back({fx.name + ";" + cb.name, cb.theta, res.mc_estimate,
                     res.closed_form, res.std_error, z, z <= 4.0});
    }
  }
  return out;
}

}  // namespace dcpp
