#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dcpp/params.hpp"
#include "dcpp/pmf.hpp"
#include "dcpp/point_process.hpp"
#include "dcpp/region.hpp"
#include "dcpp/rng.hpp"
#include "dcpp/sampler.hpp"
#include "dcpp/stats.hpp"

using namespace dcpp;

namespace {

Region two_cell_region() {
  return Region(1, {Cell{Box{{0.0}, {1.0}}, 1.0}, Cell{Box{{2.0}, {3.0}}, 0.5}});
}

}  // namespace

TEST_CASE("region validation") {
  CHECK_THROWS_AS(Region(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(Region(1, {Cell{Box{{0.0}, {0.0}}, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(Region(1, {Cell{Box{{0.0}, {1.0}}, -1.0}}), std::invalid_argument);
  // overlap is rejected, shared faces are not
  CHECK_THROWS_AS(Region(1, {Cell{Box{{0.0}, {1.0}}, 1.0},
                             Cell{Box{{0.5}, {1.5}}, 1.0}}),
                  std::invalid_argument);
  Region touch(1, {Cell{Box{{0.0}, {1.0}}, 1.0}, Cell{Box{{1.0}, {2.0}}, 1.0}});
  CHECK(touch.total_mass() == doctest::Approx(2.0));

  Region r2(2, {Cell{Box{{0.0, 0.0}, {2.0, 0.5}}, 3.0}});
  CHECK(r2.cells()[0].box.volume() == doctest::Approx(1.0));
  CHECK(r2.cell_mass(0) == doctest::Approx(3.0));
  double inside[] = {1.0, 0.25};
  double outside[] = {1.0, 0.75};
  CHECK(r2.locate(inside) == 0);
  CHECK(r2.locate(outside) == Region::npos);
}

TEST_CASE("pattern sampling: counts, marks and locations") {
  Region region = two_cell_region();
  std::vector<double> alphas{0.5, 0.5};
  RngStream rng(11);
  PointPattern pat = sample_dcpp(region, alphas, rng);
  for (const MarkedPoint& pt : pat.points()) {
    CHECK(pt.mark >= 1);
    CHECK(pt.mark <= 2);
    CHECK(region.locate(pt.x) == pt.cell);
  }

  // zero-intensity region carries no points
  Region empty(1, {Cell{Box{{0.0}, {1.0}}, 0.0}});
  PointPattern nothing = sample_dcpp(empty, alphas, rng);
  CHECK(nothing.size() == 0);

  std::vector<double> bad{0.7, 0.7};
  CHECK_THROWS_AS(sample_dcpp(region, bad, rng), std::invalid_argument);
}

TEST_CASE("pattern total weight follows the compound law") {
  // single cell of mass 2, unit jumps: total weight is Poisson(2)
  Region region = Region::single_cell(2.0);
  std::vector<double> alphas{1.0};
  RngStream rng(22);
  std::vector<long> weights;
  weights.reserve(20000);
  for (int rep = 0; rep < 20000; ++rep) {
    weights.push_back(sample_dcpp(region, alphas, rng).total_weight());
  }
  GofResult g = chi_square_gof(weights, [](long k) { return poisson_pmf(2.0, k); });
  CHECK(g.p_value >= 1e-3);
}

TEST_CASE("per-cell weights follow the per-cell compound law") {
  Region region = two_cell_region();
  std::vector<double> alphas{0.5, 0.5};
  DcpParams cell0_law(1.0, {0.5, 0.5});
  std::vector<double> probs = pmf_matrix_vector(cell0_law, 1.0, 100);
  RngStream rng(33);
  std::vector<long> w0;
  w0.reserve(10000);
  for (int rep = 0; rep < 10000; ++rep) {
    PointPattern pat = sample_dcpp(region, alphas, rng);
    w0.push_back(pat.cell_weight(0, region.cell_count()));
  }
  GofResult g = chi_square_gof(w0, [&probs](long k) {
    return k < static_cast<long>(probs.size()) ? probs[static_cast<std::size_t>(k)]
                                               : 0.0;
  });
  CHECK(g.p_value >= 1e-3);
}

TEST_CASE("superposition over disjoint regions matches the merged region") {
  // sampling two disjoint windows independently and pooling the weights
  // is the same law as sampling the union once
  std::vector<double> alphas{0.6, 0.4};
  Region a(1, {Cell{Box{{0.0}, {1.0}}, 1.2}});
  Region b(1, {Cell{Box{{2.0}, {3.0}}, 0.8}});
  Region both(1, {Cell{Box{{0.0}, {1.0}}, 1.2}, Cell{Box{{2.0}, {3.0}}, 0.8}});

  RngStream rng(44);
  const int reps = 10000;
  std::vector<long> pooled, merged;
  pooled.reserve(reps);
  merged.reserve(reps);
  for (int rep = 0; rep < reps; ++rep) {
    long w = sample_dcpp(a, alphas, rng).total_weight() +
             sample_dcpp(b, alphas, rng).total_weight();
    pooled.push_back(w);
    merged.push_back(sample_dcpp(both, alphas, rng).total_weight());
  }
  GofResult g = chi_square_two_sample(pooled, merged);
  CHECK(g.p_value >= 1e-3);
}

TEST_CASE("stochastic integral") {
  Region region = two_cell_region();
  // hand-built pattern: marks 2 and 3 in cell 0, mark 1 in cell 1
  std::vector<MarkedPoint> pts;
  pts.push_back({{0.5}, 2, 0});
  pts.push_back({{0.25}, 3, 0});
  pts.push_back({{2.5}, 1, 1});
  PointPattern pat(1, std::move(pts));

  std::vector<double> f{1.5, -2.0};
  // 2*1.5 + 3*1.5 + 1*(-2) = 5.5
  CHECK(stochastic_integral(pat, region, f) == doctest::Approx(5.5).epsilon(1e-15));

  std::vector<double> ones{1.0, 1.0};
  CHECK(stochastic_integral(pat, region, ones) ==
        doctest::Approx(static_cast<double>(pat.total_weight())));

  PointPattern empty(1, {});
  CHECK(stochastic_integral(empty, region, f) == 0.0);

  std::vector<double> short_f{1.0};
  CHECK_THROWS_AS(stochastic_integral(pat, region, short_f), std::invalid_argument);
}

TEST_CASE("pattern csv round trip") {
  Region region = two_cell_region();
  std::vector<double> alphas{0.5, 0.5};
  RngStream rng(55);
  PointPattern pat = sample_dcpp(region, alphas, rng);

  std::ostringstream os;
  pat.write_csv(os);
  std::istringstream is(os.str());
  PointPattern back = PointPattern::read_csv(is, region);

  REQUIRE(back.size() == pat.size());
  for (std::size_t i = 0; i < pat.size(); ++i) {
    CHECK(back.points()[i].mark == pat.points()[i].mark);
    CHECK(back.points()[i].cell == pat.points()[i].cell);
    // %.17g round-trips doubles exactly
    for (std::size_t d = 0; d < region.dim(); ++d) {
      CHECK(back.points()[i].x[d] == pat.points()[i].x[d]);
    }
  }

  std::istringstream bad_header("a,b\n");
  CHECK_THROWS_AS(PointPattern::read_csv(bad_header, region), std::invalid_argument);
  std::istringstream outside("x1,mark\n5.0,1\n");
  CHECK_THROWS_AS(PointPattern::read_csv(outside, region), std::invalid_argument);
}

TEST_CASE("laplace functional closed form") {
  // theta = 0: both sides are exactly 1
  Region region = Region::single_cell(1.0);
  std::vector<double> alphas{1.0};
  std::vector<double> ones{1.0};
  RngStream base(66);
  CampbellResult r0 = campbell_check(region, alphas, ones, 0.0, 2000, base);
  CHECK(r0.closed_form == 1.0);
  CHECK(r0.mc_estimate == 1.0);

  // f = 0 integrates to zero regardless of the pattern
  std::vector<double> zeros{0.0};
  CampbellResult rz = campbell_check(region, alphas, zeros, 1.0, 2000, base);
  CHECK(rz.closed_form == 1.0);
  CHECK(rz.mc_estimate == 1.0);

  // unit Poisson process, theta = -1: E exp(-N) = exp(e^-1 - 1)
  CHECK(campbell_closed_form(region, alphas, ones, -1.0) ==
        doctest::Approx(0.5314636053866156).epsilon(1e-14));

  // moment-matching within 4 standard errors on a compound fixture
  Region two = Region(1, {Cell{Box{{0.0}, {1.0}}, 1.0}, Cell{Box{{2.0}, {3.0}}, 0.5}});
  std::vector<double> a2{0.5, 0.5};
  std::vector<double> f2{1.0, 2.0};
  CampbellResult rc = campbell_check(two, a2, f2, 0.3, 20000, base.derive(1));
  CHECK(std::abs(rc.mc_estimate - rc.closed_form) <= 4.0 * rc.std_error);

  // overflow guard
  std::vector<double> giant{800.0};
  CHECK_THROWS_AS(campbell_closed_form(region, alphas, giant, 1.0),
                  std::invalid_argument);
}
