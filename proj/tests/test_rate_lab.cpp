#include <cmath>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "sdelab/metrics.hpp"
#include "sdelab/rate_lab.hpp"

using namespace sdelab;

namespace {

ErrorSeries synthetic(const std::vector<double>& dts, const std::vector<double>& errors) {
  ErrorSeries s;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    ErrorEntry e;
    e.dt = dts[i];
    e.error = errors[i];
    e.std_error = 0.0;
    e.exact = true;
    s.entries.push_back(e);
  }
  return s;
}

std::vector<double> dyadic(int from, int to) {
  std::vector<double> out;
  for (int k = from; k <= to; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

}  // namespace

TEST_CASE("fit_rate on exact power laws") {
  const auto s = synthetic({0.1, 0.05, 0.025}, {3 * 0.01, 3 * 0.0025, 3 * 0.000625});
  const RateFit f = fit_rate(s);
  CHECK(std::fabs(f.slope - 2.0) < 1e-12);
  CHECK(std::fabs(f.intercept - std::log(3.0)) < 1e-12);
  CHECK(f.residual_sum < 1e-24);
  CHECK(f.used.size() == 3);
  const RateFit again = fit_rate(s);
  CHECK(again.slope == f.slope);
  CHECK(again.intercept == f.intercept);
  CHECK(again.leverage == f.leverage);
  double lev = 0.0;
  for (double h : f.leverage) lev += h;
  CHECK(lev == doctest::Approx(2.0));

  for (double p : {0.5, 1.0, 1.5, 0.2}) {
    std::vector<double> dts = dyadic(1, 7), errs;
    for (double dt : dts) errs.push_back(0.7 * std::pow(dt, p));
    CHECK(std::fabs(fit_rate(synthetic(dts, errs)).slope - p) < 1e-12);
  }

  CHECK(std::fabs(fit_rate(synthetic({0.1, 0.05, 0.025}, {0.4, 0.4, 0.4})).slope) < 1e-14);

  ErrorSeries floored = synthetic({0.1, 0.05, 0.025, 0.0125}, {0.3, 0.075, 0.01875, 0.001});
  for (auto& e : floored.entries) e.floor = 0.001;
  const RateFit ff = fit_rate(floored);
  CHECK(ff.used == std::vector<std::size_t>{0, 1, 2});
  CHECK(ff.slope == doctest::Approx(2.0));

  ErrorSeries noisy = synthetic({0.1, 0.05}, {0.2, 0.1});
  noisy.entries[1].std_error = 0.04;
  CHECK_THROWS_AS(fit_rate(noisy), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate(synthetic({0.1}, {0.2})), std::invalid_argument);

  FitWindow w;
  w.dt_max = 0.06;
  CHECK(fit_rate(synthetic({0.1, 0.05, 0.025}, {1.0, 0.0025, 0.000625}), w).slope == doctest::Approx(2.0));
}

TEST_CASE("weak error series") {
  const std::vector<double> dts = dyadic(1, 4);
  SUBCASE("noise-free problem reduces to deterministic Euler") {
    const SdeProblem p = make_ou(1.0, 0.0, 1.0);
    const ErrorSeries s = weak_error_series(p, weak_em_increment(p), make_monomial({1}), dts, 1.0, 10, 5);
    for (const auto& e : s.entries) {
      const double euler = std::pow(1.0 - e.dt, std::round(1.0 / e.dt));
      CHECK(e.error == doctest::Approx(std::fabs(euler - std::exp(-1.0))).epsilon(1e-12));
      CHECK(e.std_error == 0.0);
    }
    CHECK(fit_rate(s).slope == doctest::Approx(1.0).epsilon(0.15));
  }
  SUBCASE("constant test function") {
    const SdeProblem p = make_ou(1.0, std::sqrt(2.0), 1.0);
    const ErrorSeries s = weak_error_series(p, weak_em_increment(p), make_constant(1, 0.7), dts, 1.0, 1000, 9);
    for (const auto& e : s.entries) CHECK(e.error <= e.std_error);
    const ErrorSeries z = local_lipschitz_weak_error(p, weak_em_increment(p), make_local_lipschitz("zero"), dts,
                                                     1.0, 1000, 9);
    for (const auto& e : z.entries) CHECK(e.error <= e.std_error);
  }
  SUBCASE("reference values") {
    const SdeProblem p = make_ou(1.0, std::sqrt(2.0), 1.0);
    const ErrorSeries s = weak_error_series(p, weak_em_increment(p), make_monomial({2}), dts, 1.0, 100, 1);
    CHECK(s.reference == doctest::Approx(0.8646647167633873 + 0.36787944117144233 * 0.36787944117144233));
    // Sigmoid has no closed form: the exact sampler supplies it.
    WeakErrorOptions o;
    o.reference_draws = 200000;
    const ErrorSeries g = weak_error_series(p, weak_em_increment(p), make_sigmoid({1.0}, 1.0, 0.0, 1), dts, 1.0,
                                            100, 1, o);
    CHECK(g.reference_std_error > 0.0);
    CHECK(g.reference_std_error < 2e-3);
  }
  SUBCASE("bitwise reproducible") {
    const SdeProblem p = make_ou(1.0, std::sqrt(2.0), 1.0);
    const std::vector<TestFunction> fs = {make_monomial({1}), make_monomial({2})};
    const auto a = weak_error_series(p, weak_em_increment(p), fs, dts, 1.0, 5000, 77);
    const auto b = weak_error_series(p, weak_em_increment(p), fs, dts, 1.0, 5000, 77);
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t i = 0; i < dts.size(); ++i) {
        CHECK(a[k].entries[i].error == b[k].entries[i].error);
        CHECK(a[k].entries[i].std_error == b[k].entries[i].std_error);
      }
  }
  SUBCASE("preconditions") {
    const SdeProblem p = make_ou(1.0, 1.0, 1.0);
    const std::vector<double> bad = {0.3};
    CHECK_THROWS(weak_error_series(p, weak_em_increment(p), make_monomial({1}), bad, 1.0, 10, 1));
    const std::vector<double> increasing = {0.125, 0.25};
    CHECK_THROWS(weak_error_series(p, weak_em_increment(p), make_monomial({1}), increasing, 1.0, 10, 1));
    const SdeProblem opaque = make_problem(
        "opaque", 1, 1, [](std::span<const double> x, std::span<double> o) { o[0] = -x[0]; },
        {[](std::span<const double>, std::span<double> o) { o[0] = 1.0; }}, {1.0});
    CHECK_THROWS(weak_error_series(opaque, weak_em_increment(opaque), make_monomial({1}), dts, 1.0, 10, 1));
    CHECK_THROWS(local_lipschitz_weak_error(p, weak_em_increment(p), make_monomial({1}), dts, 1.0, 10, 1));
  }
}

TEST_CASE("Gaussian expectation of x|x| against the exact sampler") {
  const SdeProblem p = make_ou(1.0, std::sqrt(2.0), 1.0);
  TestFunction f = make_local_lipschitz("x_abs_x");
  const std::vector<double> dts = {0.5};
  const ErrorSeries exact = local_lipschitz_weak_error(p, weak_em_increment(p), f, dts, 1.0, 10, 1);
  f.gaussian_expectation = nullptr;
  WeakErrorOptions o;
  o.reference_draws = 1'000'000;
  const ErrorSeries mc = local_lipschitz_weak_error(p, weak_em_increment(p), f, dts, 1.0, 10, 1, o);
  CHECK(std::fabs(exact.reference - mc.reference) < 4.0 * mc.reference_std_error);
}

TEST_CASE("strong error series") {
  const SdeProblem flat = make_gbm(0.05, 0.0, 1.0);
  const ErrorSeries s = strong_error_series(flat, dyadic(2, 6), 1.0, 50, 3);
  CHECK(fit_rate(s).slope >= 0.9);
  CHECK(fit_rate(s).slope <= 1.1);
  for (const auto& e : s.entries) CHECK(e.std_error < 1e-12);

  const SdeProblem gbm = make_gbm(0.05, 0.2, 1.0);
  const ErrorSeries one = strong_error_series(gbm, std::vector<double>{0.25}, 1.0, 1000, 3);
  CHECK(one.entries.size() == 1);
  CHECK_THROWS_AS(fit_rate(one), std::invalid_argument);

  const ErrorSeries g = strong_error_series(gbm, dyadic(2, 6), 1.0, 20000, 4);
  const RateFit fit = fit_rate(g);
  CHECK(fit.slope >= 0.35);
  CHECK(fit.slope <= 0.65);
  for (const auto& e : g.entries) CHECK(e.std_error < 0.1 * e.error);

  Matrix A(2, 2), B(2, 2);
  A << -1, 0, 0, -1;
  B << 1, 0, 0, 1;
  Vector x0(2);
  x0 << 1, 1;
  CHECK_THROWS(strong_error_series(make_linear2d(A, B, x0), dyadic(2, 3), 1.0, 10, 1));
}

TEST_CASE("metric error series") {
  const SdeProblem p = make_ou(1.0, std::sqrt(2.0), 1.0);
  const std::vector<double> dts = dyadic(1, 3);
  std::vector<double> rho_sq, w;
  MetricSeriesOptions o;
  o.budget = 300;
  o.on_pair = [&](std::size_t, const DiscreteMeasure& a, const DiscreteMeasure& b) {
    const double r = prokhorov_exact(a, b);
    rho_sq.push_back(r * r);
    w.push_back(wasserstein1(a, b));
  };
  const ErrorSeries same = prokhorov_error_series(p, exact_increment(p), dts, 1.0, 300, 12, o);
  for (const auto& e : same.entries) {
    CHECK(e.error <= 2.0 * e.floor);
    CHECK(e.error <= 1.0);
    CHECK(e.floor > 0.0);
  }
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(rho_sq[i] <= w[i] + 1e-12);

  const ErrorSeries weak = prokhorov_error_series(p, weak_em_increment(p), dts, 1.0, 1000, 12, o);
  for (const auto& e : weak.entries) CHECK(e.error <= 1.0);
  const ErrorSeries again = prokhorov_error_series(p, weak_em_increment(p), dts, 1.0, 1000, 12, o);
  for (std::size_t i = 0; i < dts.size(); ++i) CHECK(again.entries[i].error == weak.entries[i].error);

  const ErrorSeries wsame = wasserstein_error_series(p, exact_increment(p), dts, 1.0, 5000, 13);
  for (const auto& e : wsame.entries) CHECK(e.error <= 2.0 * e.floor);
  CHECK(wsame.budget == 0);
}

TEST_CASE("moment defects") {
  const SdeProblem ou = make_ou(1.0, std::sqrt(2.0), 1.0);
  const std::vector<double> x{1.0};
  const double d = moment_defect(ou, weak_em_increment(ou), x, 1, 0.1);
  CHECK(std::fabs(d - 0.0048374) < 1e-7);
  CHECK(d == doctest::Approx(std::fabs(std::exp(-0.1) - 1.0 + 0.1)).epsilon(1e-12));

  const SdeProblem flat = make_ou(1.0, 0.0, 1.0);
  for (double xv : {0.5, -2.0})
    for (double dt : {0.1, 0.01}) {
      const std::vector<double> y{xv};
      CHECK(moment_defect(flat, strong_em_increment(flat), y, 1, dt) ==
            doctest::Approx(std::fabs(xv) * std::fabs(std::expm1(-dt) + dt)).epsilon(1e-10));
    }

  for (int s = 1; s <= 3; ++s)
    for (const auto& scheme : {weak_em_increment(ou), strong_em_increment(ou)}) {
      ErrorSeries series;
      for (double dt : dyadic(3, 8)) {
        ErrorEntry e;
        e.dt = dt;
        e.error = moment_defect(ou, scheme, x, s, dt);
        e.std_error = 0.0;
        series.entries.push_back(e);
      }
      CHECK(fit_rate(series).slope >= 1.8);
    }
  CHECK_THROWS(moment_defect(ou, weak_em_increment(ou), x, 4, 0.1));
  CHECK_THROWS(moment_defect(ou, weak_em_increment(ou), x, 0, 0.1));
}

TEST_CASE("Stroock-Varadhan coefficients") {
  const SdeProblem bm = make_bm(0.0, 1.0, 0.0);
  const std::vector<double> x{0.3};
  const std::vector<double> eps{0.05};
  const SvCoefficients c = sv_coefficients(bm, weak_em_increment(bm), x, 0.01, eps);
  CHECK(c.exact);
  CHECK(c.b(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.gamma[0] == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(c.a(0) == 0.0);
  CHECK(sv_coefficients(bm, weak_em_increment(bm), x, 0.0016, eps).gamma[0] == 0.0);
  for (double dt : {0.5, 0.1, 0.001}) CHECK(sv_coefficients(bm, weak_em_increment(bm), x, dt, eps).a(0) == 0.0);

  // Deterministic scheme: b_dt = a a^T dt.
  const SdeProblem flat = make_ou(2.0, 0.0, 1.0);
  const std::vector<double> y{0.5};
  const SvCoefficients d = sv_coefficients(flat, strong_em_increment(flat), y, 0.01, eps, 1000, 1);
  CHECK(d.b(0, 0) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(d.a(0) == doctest::Approx(-1.0).epsilon(1e-12));

  // Truncation: increments above 1 drop out.
  const SvCoefficients big = sv_coefficients(bm, weak_em_increment(bm), x, 4.0, eps);
  CHECK(big.a(0) == 0.0);
  CHECK(big.b(0, 0) == 0.0);

  // Gaussian Monte Carlo against the truncated closed form for N(0, dt).
  const SvCoefficients mc = sv_coefficients(bm, strong_em_increment(bm), x, 0.5, eps, 200000, 3);
  CHECK_FALSE(mc.exact);
  const double s = std::sqrt(0.5), z = 1.0 / s;
  const double want = (std::erf(z / std::sqrt(2.0)) - 2.0 * z * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI));
  CHECK(std::fabs(mc.b(0, 0) - want) < 4.0 * mc.b_std_error(0, 0));

  // (1/dt) E|δ̄|^3 = dt^{1/2} exactly for weak EM with a = 0, sigma = 1.
  for (double dt : {0.25, 0.01}) {
    CHECK(scheme_abs_moment3(bm, weak_em_increment(bm), x, dt, 0, 0, 0) / dt ==
          doctest::Approx(std::sqrt(dt)).epsilon(1e-14));
    CHECK(scheme_abs_moment3(bm, strong_em_increment(bm), x, dt, 0, 0, 0) / dt ==
          doctest::Approx(2.0 * std::sqrt(2.0 / M_PI) * std::sqrt(dt)).epsilon(1e-12));
  }
}

TEST_CASE("sv_check on OU with weak EM") {
  const SdeProblem ou = make_ou(1.0, std::sqrt(2.0), 1.0);
  std::vector<std::vector<double>> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back({-2.0 + 0.1 * i});
  const std::vector<double> dts = dyadic(2, 8);
  const std::vector<double> eps{0.05};
  const SvReport r = sv_check(ou, weak_em_increment(ou), grid, dts, eps);
  CHECK(r.exact);
  CHECK(r.condition("first-moment").converging);
  CHECK(r.condition("second-moment").converging);
  CHECK(r.condition("third-moment").converging);
  CHECK(r.condition("first-moment").violations.empty());
  CHECK(r.condition("drift").values.back() <= 0.01);
  CHECK(r.condition("diffusion").values.back() <= 0.02);
  CHECK(r.condition("diffusion").values.back() == doctest::Approx(4.0 / 256.0).epsilon(1e-9));

  const SdeProblem flat = make_ou(1.0, 0.0, 1.0);
  const SvReport f = sv_check(flat, strong_em_increment(flat), grid, dts, eps, 10, 1);
  CHECK(f.condition("diffusion").converging);
  CHECK(f.condition("diffusion").values.back() == doctest::Approx(4.0 / 256.0).epsilon(1e-9));
}

TEST_CASE("series CSV round trip") {
  ErrorSeries s = synthetic({0.5, 0.25}, {0.125, 1.0 / 3.0});
  s.entries[1].std_error = 0.01;
  s.entries[1].floor = 0.002;
  s.entries[1].seed = 18446744073709551615ull;
  const std::string path = "rate_lab_series_test.csv";
  write_series_csv(path, s);
  const ErrorSeries r = read_series_csv(path);
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[1].error == 1.0 / 3.0);
  CHECK(r.entries[1].std_error == 0.01);
  CHECK(r.entries[1].floor == 0.002);
  CHECK(r.entries[1].seed == s.entries[1].seed);
  CHECK(std::isnan(r.entries[0].floor));
  std::remove(path.c_str());
}
