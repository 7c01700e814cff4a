#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "random_measures.hpp"
#include "sdelab/flow.hpp"
#include "sdelab/metrics.hpp"

using namespace sdelab;
using testutil::points1d;

namespace {

// Minimum over all bijections of the mean matched distance.
double permutation_w1(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<double> p(a.dim()), q(a.dim());
  double best = INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      a.point(i, p);
      b.point(perm[i], q);
      double acc = 0.0;
      for (std::size_t d = 0; d < a.dim(); ++d) acc += (p[d] - q[d]) * (p[d] - q[d]);
      s += std::sqrt(acc);
    }
    best = std::min(best, s / static_cast<double>(a.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("prokhorov examples") {
  const auto a = points1d({0.0, 1.0}), b = points1d({0.0, 2.0});
  CHECK(prokhorov_exact_result(a, a).value == 0);
  CHECK(prokhorov_exact_result(points1d({0.0}), points1d({0.3})).value == to_exact(0.3));
  CHECK(prokhorov_exact(points1d({0.0}), points1d({3.0})) == 1.0);
  CHECK(prokhorov_exact_result(a, b).value == Exact(1, 2));
  CHECK(prokhorov_bruteforce_value(a, b) == Exact(1, 2));
  CHECK(prokhorov_bruteforce(points1d({0.0}), points1d({3.0})) == 1.0);
  testutil::MeasureFactory f(3);
  const auto five = f.measure(5, 2, false, false);
  CHECK(prokhorov_bruteforce_value(five, five) == 0);
  CHECK_THROWS_AS(prokhorov_exact(points1d({0.0}), DiscreteMeasure::uniform(2, std::vector<double>{0, 0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(prokhorov_bruteforce(f.measure(11, 1, false, false), f.measure(11, 1, false, false)),
                  std::invalid_argument);
}

TEST_CASE("wasserstein examples") {
  CHECK(wasserstein1(points1d({0.0}), points1d({0.7})) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(wasserstein1(points1d({0.0}), points1d({10.0})) == 10.0);
  CHECK(wasserstein1(points1d({0.0, 1.0}), points1d({0.0, 2.0})) == 0.5);
  // Unequal sizes go through the transport solver.
  CHECK(wasserstein1(points1d({0.0, 1.0}), points1d({0.5})) == doctest::Approx(0.5).epsilon(1e-15));
  const auto w = points1d({0.0, 1.0}, {Exact(1, 4), Exact(3, 4)});
  CHECK(wasserstein1(w, points1d({1.0})) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("1D greedy flow agrees with Dinic") {
  testutil::MeasureFactory f(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto mu = f.measure(1 + f.below(9), 1, trial % 2 == 0, trial % 3 != 0);
    const auto nu = f.measure(1 + f.below(9), 1, trial % 2 == 1, trial % 3 != 1);
    const DistanceTable table = distance_table(mu, nu);
    const IntegerMasses masses = integer_masses(mu, nu);
    for (double t : {0.0, 0.1, 0.25, 0.5, 0.7, 1.0, 2.5}) {
      CHECK(greedy_threshold_flow_1d(mu, nu, masses, t).value == dinic_threshold_flow(table, masses, t).value);
    }
  }
}

TEST_CASE("prokhorov_exact equals brute force on 200 random instances") {
  testutil::MeasureFactory f(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + static_cast<std::size_t>(trial % 3);
    const std::size_t m = 1 + f.below(6), n = 1 + f.below(6);
    const auto mu = f.measure(m, dim, true, trial % 2 == 0);
    const auto nu = f.measure(n, dim, true, trial % 4 < 2);
    CAPTURE(trial);
    const Exact exact = prokhorov_exact_result(mu, nu).value;
    CHECK(exact == prokhorov_bruteforce_value(mu, nu));
    CHECK(exact == prokhorov_exact_result(nu, mu).value);
    CHECK(exact <= 1);
    CHECK(exact >= 0);
  }
}

TEST_CASE("wasserstein1 matches the permutation oracle") {
  testutil::MeasureFactory f(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + static_cast<std::size_t>(trial % 3);
    const std::size_t n = 1 + f.below(6);
    const auto a = f.measure(n, dim, false, trial % 2 == 0);
    const auto b = f.measure(n, dim, false, trial % 2 == 1);
    CHECK(std::fabs(wasserstein1(a, b) - permutation_w1(a, b)) <= 1e-12);
  }
}

TEST_CASE("metric axioms on random triples") {
  testutil::MeasureFactory f(5);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t dim = 1 + static_cast<std::size_t>(trial % 3);
    const auto a = f.measure(1 + f.below(5), dim, true, trial % 2 == 0);
    const auto b = f.measure(1 + f.below(5), dim, true, false);
    const auto c = f.measure(1 + f.below(5), dim, true, true);
    const double ab = prokhorov_exact(a, b), bc = prokhorov_exact(b, c), ac = prokhorov_exact(a, c);
    CHECK(ab == prokhorov_exact(b, a));
    CHECK(ac <= ab + bc + 1e-12);
    const double wab = wasserstein1(a, b), wbc = wasserstein1(b, c), wac = wasserstein1(a, c);
    CHECK(wab == doctest::Approx(wasserstein1(b, a)).epsilon(1e-12));
    CHECK(wac <= wab + wbc + 1e-12);
  }
}

TEST_CASE("rho^2 <= W for equal-weight clouds") {
  testutil::MeasureFactory f(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + static_cast<std::size_t>(trial % 3);
    const auto a = f.measure(2 + f.below(10), dim, false, trial % 2 == 0);
    const auto b = f.measure(2 + f.below(10), dim, false, trial % 3 == 0);
    const double rho = prokhorov_exact(a, b);
    CHECK(rho * rho <= wasserstein1(a, b) * (1.0 + 1e-12));
  }
}

TEST_CASE("large 1D clouds use the sorted coupling") {
  testutil::MeasureFactory f(9);
  const auto a = f.measure(3000, 1, false, false), b = f.measure(3000, 1, false, false);
  const double w = wasserstein1(a, b);
  CHECK(w >= 0.0);
  CHECK(w == wasserstein1(b, a));
  const double rho = prokhorov_exact(a.subsample(300, 1), b.subsample(300, 2));
  CHECK(rho <= 1.0);
}
