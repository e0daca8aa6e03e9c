#include <doctest.h>

#include <cmath>
#include <random>

#include "dcpp/params.hpp"
#include "dcpp/pmf.hpp"
#include "dcpp/rng.hpp"

using namespace dcpp;

namespace {

// deterministic random parameter sets for property checks
DcpParams random_params(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> order_d(1, 6);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  int r = order_d(gen);
  std::vector<double> a(static_cast<std::size_t>(r));
  double sum = 0.0;
  for (double& v : a) {
    v = u(gen);
    sum += v;
  }
  for (double& v : a) v /= sum;
  double lambda = 0.2 + 4.0 * u(gen);
  return DcpParams(lambda, std::move(a));
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(DcpParams(0.0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(DcpParams(-1.0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(DcpParams(1.0, {0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(DcpParams(1.0, {-0.1, 1.1}), std::invalid_argument);
  CHECK_THROWS_AS(DcpParams(1.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(DcpParams(1.0, {0.0, 0.0}), std::invalid_argument);

  // trailing zeros are stripped so the order is the largest supported jump
  DcpParams p(1.0, {0.5, 0.5, 0.0, 0.0});
  CHECK(p.order() == 2);
  CHECK(p.tail_mass() == 0.0);

  // interior zeros are legal (a lattice law on even jumps)
  DcpParams even(1.0, {0.0, 1.0});
  CHECK(even.order() == 2);

  // truncated sets may sum below one and carry the remainder as tail mass
  DcpParams t(1.0, {0.5, 0.25}, true);
  CHECK(t.truncated());
  CHECK(t.tail_mass() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(DcpParams(1.0, {0.8, 0.5}, true), std::invalid_argument);

  CHECK_THROWS_AS(NbParams(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(NbParams(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(NbParams(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("pmf by partition enumeration") {
  // pure Poisson: P(Y=0) = e^-mass
  DcpParams pois(1.0, {1.0});
  CHECK(pmf_partition(pois, 2.0, 0) == doctest::Approx(0.1353352832366127).epsilon(1e-14));

  // two jump sizes, mass 1, k = 2: e^-1 (alpha2 + alpha1^2/2) = 0.625 e^-1
  DcpParams two(1.0, {0.5, 0.5});
  CHECK(pmf_partition(two, 1.0, 2) ==
        doctest::Approx(0.22992465073215146).epsilon(1e-14));
  // k = 3: e^-1 (alpha1 alpha2 + alpha1^3/6)
  CHECK(pmf_partition(two, 1.0, 3) ==
        doctest::Approx(std::exp(-1.0) * (0.25 + 0.125 / 6.0)).epsilon(1e-14));

  // jumps of size 2 only: odd totals are unreachable
  DcpParams even(1.0, {0.0, 1.0});
  CHECK(pmf_partition(even, 1.0, 3) == 0.0);
  CHECK(pmf_partition(even, 1.0, 4) ==
        doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-14));

  CHECK_THROWS_AS(pmf_partition(pois, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(pmf_partition(pois, 1.0, -1), std::invalid_argument);
}

TEST_CASE("partition enumeration budget") {
  DcpParams p(1.0, {0.25, 0.25, 0.25, 0.25});
  PmfOptions opts;
  opts.partition_budget = 10;
  CHECK(partition_term_count(p, 200, opts.partition_budget) > 10);
  CHECK_THROWS_AS(pmf_partition(p, 1.0, 200, opts), PartitionBudgetError);
  try {
    pmf_partition(p, 1.0, 200, opts);
  } catch (const PartitionBudgetError& e) {
    CHECK(std::string(e.what()).find("matrix") != std::string::npos);
    CHECK(e.budget() == 10);
    CHECK(e.needed() > e.budget());
  }
}

TEST_CASE("pmf by the matrix route") {
  DcpParams pois(1.0, {1.0});
  CHECK(pmf_matrix(pois, 2.0, 0) == doctest::Approx(0.1353352832366127).epsilon(1e-14));
  DcpParams two(1.0, {0.5, 0.5});
  CHECK(pmf_matrix(two, 1.0, 2) ==
        doctest::Approx(0.22992465073215146).epsilon(1e-14));
  DcpParams even(1.0, {0.0, 1.0});
  CHECK(pmf_matrix(even, 1.0, 3) == 0.0);

  // vector form is consistent with the scalar entry point
  std::vector<double> v = pmf_matrix_vector(two, 1.0, 6);
  REQUIRE(v.size() == 7);
  for (long k = 0; k <= 6; ++k) {
    CHECK(v[static_cast<std::size_t>(k)] ==
          doctest::Approx(pmf_matrix(two, 1.0, k)).epsilon(1e-15));
  }
}

TEST_CASE("partition and matrix routes agree") {
  std::mt19937_64 gen(20240817);
  for (int rep = 0; rep < 20; ++rep) {
    DcpParams p = random_params(gen);
    std::uniform_real_distribution<double> mass_d(0.1, 5.0);
    double mass = mass_d(gen);
    for (long k = 0; k <= 12; ++k) {
      double a = pmf_partition(p, mass, k);
      double b = pmf_matrix(p, mass, k);
      CHECK(std::abs(a - b) <= 1e-10);
    }
  }
}

TEST_CASE("log-space accumulation at large mass") {
  // mass 40 forces the log-space partition path; both routes must still agree
  DcpParams two(1.0, {0.5, 0.5});
  for (long k = 0; k <= 20; ++k) {
    double a = pmf_partition(two, 40.0, k);
    double b = pmf_matrix(two, 40.0, k);
    CHECK(std::abs(a - b) <= 1e-12);
  }
  // and the halved-mass convolution path far beyond the direct series range
  DcpParams pois(1.0, {1.0});
  double direct = std::exp(200.0 * std::log(200.0) - 200.0 - std::lgamma(201.0));
  CHECK(pmf_matrix(pois, 200.0, 200) == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("pmf normalizes") {
  DcpParams p(1.0, {0.3, 0.3, 0.4});
  std::vector<double> v = pmf_matrix_vector(p, 3.0, 120);
  double sum = 0.0;
  for (double x : v) sum += x;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pmf convolves over disjoint masses") {
  DcpParams p(1.0, {0.6, 0.4});
  const long kmax = 15;
  std::vector<double> a = pmf_matrix_vector(p, 0.7, kmax);
  std::vector<double> b = pmf_matrix_vector(p, 1.8, kmax);
  std::vector<double> c = pmf_matrix_vector(p, 2.5, kmax);
  for (long k = 0; k <= kmax; ++k) {
    double conv = 0.0;
    for (long i = 0; i <= k; ++i) {
      conv += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(k - i)];
    }
    CHECK(conv == doctest::Approx(c[static_cast<std::size_t>(k)]).epsilon(1e-12));
  }
}

TEST_CASE("generating function") {
  DcpParams two(2.0, {0.5, 0.5});
  CHECK(pgf_eval(two, 1.0) == 1.0);
  // z = 0 recovers P(Y = 0) = e^-lambda
  CHECK(pgf_eval(two, 0.0) == doctest::Approx(0.1353352832366127).epsilon(1e-14));
  DcpParams pois(3.0, {1.0});
  CHECK(pgf_eval(pois, 0.5) == doctest::Approx(std::exp(-1.5)).epsilon(1e-14));
  CHECK_THROWS_AS(pgf_eval(two, 1.5), std::domain_error);
  CHECK_THROWS_AS(pgf_eval(two, -1.5), std::domain_error);

  // pgf equals the pmf-weighted power sum
  std::vector<double> v = pmf_matrix_vector(two, 2.0, 80);
  double z = 0.7;
  double sum = 0.0;
  double zk = 1.0;
  for (double pk : v) {
    sum += pk * zk;
    zk *= z;
  }
  CHECK(sum == doctest::Approx(pgf_eval(two, z)).epsilon(1e-12));
}

TEST_CASE("laplace transform matches the pgf at e^-theta") {
  DcpParams p(1.7, {0.2, 0.5, 0.3});
  CHECK(mgf_eval(p, 0.0) == 1.0);
  for (double theta : {0.1, 0.5, 1.0, 3.0}) {
    CHECK(mgf_eval(p, theta) == pgf_eval(p, std::exp(-theta)));
  }
  CHECK_THROWS_AS(mgf_eval(p, -0.1), std::domain_error);
}

TEST_CASE("moments") {
  DcpParams two(2.0, {0.5, 0.5});
  Moments m = moments(two);
  CHECK(m.mean == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(m.variance == doctest::Approx(5.0).epsilon(1e-15));

  DcpParams pois(4.0, {1.0});
  CHECK(moments(pois).mean == doctest::Approx(4.0));
  CHECK(moments(pois).variance == doctest::Approx(4.0));

  DcpParams deg(1.0, {0.0, 0.0, 1.0});
  CHECK(moments(deg).mean == doctest::Approx(3.0));
  CHECK(moments(deg).variance == doctest::Approx(9.0));
}

TEST_CASE("moments agree with finite differences of the pgf") {
  std::mt19937_64 gen(911);
  const double h = 1e-5;
  for (int rep = 0; rep < 10; ++rep) {
    DcpParams p = random_params(gen);
    Moments m = moments(p);
    double f1 = pgf_eval(p, 1.0 + h);
    double f0 = pgf_eval(p, 1.0);
    double fm = pgf_eval(p, 1.0 - h);
    double d1 = (f1 - fm) / (2.0 * h);
    double d2 = (f1 - 2.0 * f0 + fm) / (h * h);
    CHECK(d1 == doctest::Approx(m.mean).epsilon(1e-6));
    // E Y(Y-1) = pgf''(1); second differences carry ~1e-6 roundoff
    double var_fd = d2 + d1 - d1 * d1;
    CHECK(var_fd == doctest::Approx(m.variance).epsilon(2e-4));
  }
}

TEST_CASE("negative binomial conversion") {
  // r = 1, q = 0.5 is geometric: lambda = ln 2, alpha_1 = 0.5 / ln 2
  DcpParams g = nb_to_dcp(NbParams(1.0, 0.5), 1e-10);
  CHECK(g.lambda() == doctest::Approx(0.6931471805599453).epsilon(1e-14));
  CHECK(g.alphas()[0] == doctest::Approx(0.7213475204444817).epsilon(1e-14));
  CHECK(g.truncated());
  CHECK(g.tail_mass() <= 1e-10);

  // P(Y = 2) for the geometric law is (1-q) q^2 = 0.125
  CHECK(pmf_matrix(g, g.lambda(), 2) == doctest::Approx(0.125).epsilon(1e-8));
  CHECK(pmf_partition(g, g.lambda(), 2) == doctest::Approx(0.125).epsilon(1e-8));

  // closed-form pmf agrees with the converted law across k
  NbParams nb(2.0, 0.3);
  DcpParams d = nb_to_dcp(nb, 1e-12);
  for (long k = 0; k <= 10; ++k) {
    CHECK(pmf_matrix(d, d.lambda(), k) == doctest::Approx(nb_pmf(nb, k)).epsilon(1e-9));
  }

  // converted moments approach the closed forms as the tail vanishes
  Moments m = moments(d);
  CHECK(m.mean == doctest::Approx(nb.mean()).epsilon(1e-9));
  CHECK(m.variance == doctest::Approx(nb.variance()).epsilon(1e-9));

  // a coarse tolerance yields few terms and a recorded tail
  DcpParams coarse = nb_to_dcp(NbParams(1.0, 0.5), 0.05);
  CHECK(coarse.order() < 10);
  CHECK(coarse.tail_mass() > 0.0);
  CHECK(coarse.tail_mass() <= 0.05);

  CHECK_THROWS_AS(nb_to_dcp(NbParams(1.0, 0.5), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(nb_to_dcp(NbParams(1.0, 0.999999), 1e-12, 50),
                  std::invalid_argument);
}

TEST_CASE("nb closed-form pmf sanity") {
  NbParams nb(2.0, 0.3);
  // (n+1) (1-q)^2 q^n for r = 2
  for (long n = 0; n <= 5; ++n) {
    double expect = static_cast<double>(n + 1) * 0.49 * std::pow(0.3, n);
    CHECK(nb_pmf(nb, n) == doctest::Approx(expect).epsilon(1e-13));
  }
  CHECK(nb_pmf(nb, -1) == 0.0);
}
