// Acceptance run: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "random_measures.hpp"
#include "sdelab/coupling.hpp"
#include "sdelab/integrators.hpp"
#include "sdelab/metrics.hpp"
#include "sdelab/problems.hpp"
#include "sdelab/rate_lab.hpp"
#include "sdelab/test_functions.hpp"

using namespace sdelab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> dyadic(int from, int to) {
  std::vector<double> out;
  for (int k = from; k <= to; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

std::string describe(const ErrorSeries& s) {
  std::ostringstream o;
  o.precision(4);
  for (const auto& e : s.entries) {
    o << "\n      dt=" << e.dt << " err=" << e.error;
    if (std::isfinite(e.std_error)) o << " se=" << e.std_error;
    if (std::isfinite(e.floor)) o << " floor=" << e.floor;
    o << (usable_for_fit(e) ? "" : " (excluded)");
  }
  return o.str();
}

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

struct Report {
  int failures = 0;
  void line(int id, bool pass, const std::string& what, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << "  [" << id << "] " << what << ": " << detail << std::endl;
    if (!pass) ++failures;
  }
};

// Scheme cloud vs analytic cloud pairs kept for the beta check.
struct CloudPair {
  DiscreteMeasure scheme, reference;
};

const SdeProblem kOu = make_ou(1.0, std::sqrt(2.0), 1.0);

// ------------------------------------------------------------------ 1

void criterion1(Report& r) {
  const auto t0 = Clock::now();
  testutil::MeasureFactory f(20240601);
  int agree = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + static_cast<std::size_t>(trial % 3);
    const std::size_t m = 1 + f.below(6), n = 1 + f.below(6);
    const auto mu = f.measure(m, dim, true, trial % 2 == 0);
    const auto nu = f.measure(n, dim, true, trial % 4 < 2);
    if (prokhorov_exact_result(mu, nu).value == prokhorov_bruteforce_value(mu, nu)) ++agree;
  }
  int wagree = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + static_cast<std::size_t>(trial % 3);
    const std::size_t n = 1 + f.below(6);
    const auto a = f.measure(n, dim, false, trial % 2 == 0);
    const auto b = f.measure(n, dim, false, trial % 2 == 1);
    const double gap = std::fabs(wasserstein1(a, b) - permutation_w1(a, b));
    worst = std::max(worst, gap);
    if (gap <= 1e-12) ++wagree;
  }
  const double secs = seconds_since(t0);
  r.line(1, agree == 200 && wagree == 100 && secs < 60.0, "oracle equivalence",
         "prokhorov exact==brute " + std::to_string(agree) + "/200, W1 vs permutations " + std::to_string(wagree) +
             "/100 (max gap " + fmt(worst, 3) + "), " + fmt(secs, 3) + " s");
}

// ------------------------------------------------------------------ 2

void criterion2(Report& r) {
  const auto t0 = Clock::now();
  const SchemeIncrement weak = scheme_by_name(kOu, "weak_em");
  const auto dts = dyadic(2, 6);
  const std::vector<TestFunction> fs = {make_monomial({1}), make_monomial({2})};
  const auto series = weak_error_series(kOu, weak, fs, dts, 1.0, 1'000'000, 2);
  bool pass = true;
  std::ostringstream detail;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const ErrorSeries& s = series[k];
    const char* name = k == 0 ? "f=x" : "f=x^2";
    try {
      const RateFit fit = fit_rate(s);
      bool above = true;
      for (std::size_t i : fit.used) above = above && s.entries[i].error > 3.0 * s.entries[i].std_error;
      const bool ok = fit.slope >= 0.8 && fit.slope <= 1.2 && above;
      pass = pass && ok;
      detail << name << " slope=" << fmt(fit.slope, 4) << " used=" << fit.used.size() << "/" << s.entries.size()
             << "; ";
    } catch (const std::exception& e) {
      pass = false;
      detail << name << " fit failed (" << e.what() << "); ";
    }
    if (!pass) detail << describe(s);
  }
  detail << fmt(seconds_since(t0), 3) << " s";
  r.line(2, pass, "weak order 1 (OU, weak EM, M=1e6)", detail.str());
}

// ------------------------------------------------------------------ 3

void criterion3(Report& r) {
  const auto t0 = Clock::now();
  const SdeProblem gbm = make_gbm(0.05, 0.2, 1.0);
  const ErrorSeries s = strong_error_series(gbm, dyadic(2, 8), 1.0, 100'000, 3);
  std::string detail;
  bool pass = false;
  try {
    const RateFit fit = fit_rate(s);
    pass = fit.slope >= 0.35 && fit.slope <= 0.65;
    detail = "RMS slope=" + fmt(fit.slope, 4) + " used=" + std::to_string(fit.used.size()) + "/" +
             std::to_string(s.entries.size());
  } catch (const std::exception& e) {
    detail = std::string("fit failed (") + e.what() + ")";
  }
  if (!pass) detail += describe(s);
  r.line(3, pass, "strong order 1/2 (GBM, strong EM, M=1e5)", detail + ", " + fmt(seconds_since(t0), 3) + " s");
}

// ------------------------------------------------------------------ 5, 6 (clouds reused by 4)

void criterion5(Report& r, std::vector<CloudPair>& pairs) {
  const auto t0 = Clock::now();
  MetricSeriesOptions opts;
  opts.budget = 2000;
  opts.on_pair = [&](std::size_t, const DiscreteMeasure& a, const DiscreteMeasure& b) { pairs.push_back({a, b}); };
  const ErrorSeries s =
      prokhorov_error_series(kOu, scheme_by_name(kOu, "weak_em"), dyadic(1, 5), 1.0, 2000, 5, opts);
  std::vector<double> above;
  for (const auto& e : s.entries)
    if (e.error > 3.0 * e.floor) above.push_back(e.error);
  bool decreasing = above.size() >= 2;
  for (std::size_t i = 1; i < above.size(); ++i) decreasing = decreasing && above[i] < above[i - 1];
  std::string detail;
  bool pass = false;
  try {
    const RateFit fit = fit_rate(s);
    pass = decreasing && fit.slope >= 0.15;
    detail = "slope=" + fmt(fit.slope, 4) + " over " + std::to_string(fit.used.size()) + " points above 3x floor " +
             fmt(s.entries.front().floor, 4) + (decreasing ? ", strictly decreasing" : ", NOT strictly decreasing");
  } catch (const std::exception& e) {
    detail = std::string("fit failed (") + e.what() + ")";
  }
  if (!pass) detail += describe(s);
  r.line(5, pass, "Prokhorov rate (OU, weak EM, 2000-atom clouds)", detail + ", " + fmt(seconds_since(t0), 3) + " s");
}

void criterion6(Report& r, std::vector<CloudPair>& pairs) {
  const auto t0 = Clock::now();
  MetricSeriesOptions opts;
  opts.budget = 2000;
  int coupled = 0, tail_ok = 0;
  std::string worst;
  opts.on_pair = [&](std::size_t, const DiscreteMeasure& a, const DiscreteMeasure& b) {
    pairs.push_back({a, b});
    const double alpha = prokhorov_exact_result(a, b).upper();
    const CouplingPlan plan = strassen_couple(a, b, alpha);
    ++coupled;
    const Exact tail = coupled_tail_exact(plan, alpha);
    if (tail <= to_exact(alpha)) ++tail_ok;
    else worst = format_exact(tail) + " > " + format_real(alpha);
  };
  const ErrorSeries s =
      wasserstein_error_series(kOu, scheme_by_name(kOu, "weak_em"), dyadic(2, 6), 1.0, 1'000'000, 6, opts);
  std::string detail;
  bool pass = false;
  try {
    const RateFit fit = fit_rate(s);
    pass = fit.slope >= 0.15 && coupled == static_cast<int>(s.entries.size()) && tail_ok == coupled;
    detail = "W slope=" + fmt(fit.slope, 4) + " used=" + std::to_string(fit.used.size()) + "/" +
             std::to_string(s.entries.size()) + "; coupled_tail<=alpha in " + std::to_string(tail_ok) + "/" +
             std::to_string(coupled) + " pairs" + (worst.empty() ? "" : " (" + worst + ")");
  } catch (const std::exception& e) {
    detail = std::string("fit failed (") + e.what() + ")";
  }
  if (!pass) detail += describe(s);
  r.line(6, pass, "Wasserstein rate + Strassen coupling (OU, weak EM, M=1e6)",
         detail + ", " + fmt(seconds_since(t0), 3) + " s");
}

// ------------------------------------------------------------------ 4

void criterion4(Report& r, const std::vector<CloudPair>& pairs) {
  const auto t0 = Clock::now();
  testutil::MeasureFactory f(4444);
  int ok = 0, total = 0;
  double worst = -INFINITY;
  auto check = [&](const DiscreteMeasure& a, const DiscreteMeasure& b, int l) {
    const double beta = beta_lower(a, b, l, default_dictionary(a, b, l));
    const double rho = prokhorov_exact(a, b);
    worst = std::max(worst, beta - 2.0 * rho);
    ++total;
    if (beta <= 2.0 * rho + 1e-9) ++ok;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + static_cast<std::size_t>(trial % 2);
    const auto a = f.measure(1 + f.below(8), dim, trial % 3 == 0, trial % 2 == 0);
    const auto b = f.measure(1 + f.below(8), dim, trial % 3 == 1, trial % 4 < 2);
    check(a, b, 1 + trial % 2);
  }
  const int random_ok = ok;
  for (const auto& p : pairs) check(p.scheme, p.reference, 1);
  r.line(4, ok == total && !pairs.empty(), "beta_l <= 2 rho",
         std::to_string(random_ok) + "/200 random, " + std::to_string(ok - random_ok) + "/" +
             std::to_string(pairs.size()) + " scheme-vs-analytic pairs, max(beta-2rho)=" + fmt(worst, 4) + ", " +
             fmt(seconds_since(t0), 3) + " s");
}

// ------------------------------------------------------------------ 7

void criterion7(Report& r) {
  const auto t0 = Clock::now();
  NoiseStream rng(77, 0);
  std::uint64_t counter = 0;
  auto uniform = [&] {
    const std::uint64_t c = counter++;
    return rng.uniform(c >> 20, static_cast<std::uint32_t>(c));
  };
  int violations = 0, partial = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = inst < 10 ? 1 : 2;
    std::vector<Shape> K;
    const int pieces = 1 + inst % 3;
    for (int k = 0; k < pieces; ++k) {
      std::vector<double> c(n), lo(n), hi(n);
      for (std::size_t d = 0; d < n; ++d) {
        c[d] = -1.0 + 2.0 * uniform();
        const double w = 0.05 + 0.5 * uniform();
        lo[d] = c[d] - w;
        hi[d] = c[d] + w;
      }
      if ((inst + k) % 2 == 0) K.push_back(Shape::ball(c, 0.05 + 0.5 * uniform()));
      else K.push_back(Shape::box(lo, hi));
    }
    const double eps = 0.05 + 0.6 * uniform();
    const TestFunction f = make_mollified_indicator(K, eps, 1);
    std::vector<double> x(n);
    for (int i = 0; i < 10000; ++i) {
      for (auto& v : x) v = -2.5 + 5.0 * uniform();
      const double v = f(x), dist = set_distance(K, x);
      const bool bad = !(v >= 0.0 && v <= 1.0) || (dist == 0.0 && v != 1.0) || (dist > eps && v != 0.0);
      if (bad) ++violations;
      if (v > 0.0 && v < 1.0) ++partial;
    }
  }
  const int alpha[] = {1};
  std::ostringstream ratios;
  bool ratio_ok = true;
  for (double eps : {0.4, 0.2, 0.1}) {
    const Box box{{1.0}, {1.0 + eps}};
    const double s1 =
        derivative_sup_estimate(make_mollified_indicator({Shape::box({0.0}, {1.0})}, eps, 1), alpha, box, 14, 1e-6);
    const double s2 = derivative_sup_estimate(make_mollified_indicator({Shape::box({0.0}, {1.0})}, eps / 2, 1), alpha,
                                              box, 14, 1e-6);
    const double q = s2 / s1;
    ratio_ok = ratio_ok && q >= 1.6 && q <= 2.4;
    ratios << " eps=" << eps << ":" << fmt(q, 4);
  }
  r.line(7, violations == 0 && partial > 0 && ratio_ok, "mollifier sandwich and 1/eps scaling",
         "20 instances x 1e4 points, " + std::to_string(violations) + " violations (" + std::to_string(partial) +
             " in the transition band); derivative-sup ratios" + ratios.str() + ", " + fmt(seconds_since(t0), 3) +
             " s");
}

// ------------------------------------------------------------------ 8

void criterion8(Report& r) {
  const SchemeIncrement weak = scheme_by_name(kOu, "weak_em");
  const std::vector<double> x = {1.0};
  const double d = moment_defect(kOu, weak, x, 1, 0.1);
  const bool value_ok = std::fabs(d - 0.0048374) <= 1e-7;
  std::ostringstream detail;
  detail << "defect(s=1, dt=0.1)=" << fmt(d, 8);
  bool slopes_ok = true;
  for (int s = 1; s <= 2; ++s) {
    ErrorSeries series;
    for (double dt : dyadic(3, 8)) {
      ErrorEntry e;
      e.dt = dt;
      e.error = moment_defect(kOu, weak, x, s, dt);
      e.std_error = 0.0;
      e.exact = true;
      series.entries.push_back(e);
    }
    const RateFit fit = fit_rate(series);
    slopes_ok = slopes_ok && fit.slope >= 1.8;
    detail << ", slope(s=" << s << ")=" << fmt(fit.slope, 4);
  }
  r.line(8, value_ok && slopes_ok, "moment defects (OU, weak EM, x=1)", detail.str());
}

// ------------------------------------------------------------------ 9

void criterion9(Report& r) {
  const auto t0 = Clock::now();
  const SchemeIncrement weak = scheme_by_name(kOu, "weak_em");
  std::vector<std::vector<double>> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back({-2.0 + 0.1 * i});
  const auto dts = dyadic(2, 12);
  const std::vector<double> eps = {0.05};
  const SvReport rep = sv_check(kOu, weak, grid, dts, eps);
  const std::size_t at8 = 6;  // dts[6] == 2^-8
  const double drift = rep.condition("drift").values[at8];
  const double diff = rep.condition("diffusion").values[at8];
  const double sigma = std::sqrt(2.0);
  const auto& gamma = rep.conditions[2].values;  // the single jump condition
  bool gamma_ok = rep.exact;
  int small = 0;
  for (std::size_t t = 0; t < dts.size(); ++t)
    if (std::sqrt(dts[t]) * sigma < 0.05) {
      ++small;
      gamma_ok = gamma_ok && gamma[t] == 0.0;
    }
  gamma_ok = gamma_ok && small > 0;

  // Third absolute moment ratio on constant-sigma problems.
  std::ostringstream third;
  bool third_ok = true;
  const std::vector<std::pair<std::string, SdeProblem>> problems = {{"BM(0,1)", make_bm(0.0, 1.0, 0.0)},
                                                                     {"OU", kOu}};
  for (const auto& [name, p] : problems) {
    const SchemeIncrement sch = scheme_by_name(p, "weak_em");
    ErrorSeries s;
    for (double dt : dyadic(3, 8)) {
      ErrorEntry e;
      e.dt = dt;
      e.error = scheme_abs_moment3(p, sch, std::vector<double>{1.0}, dt, 0, 0, 0, 1'000'000, 9) / dt;
      e.std_error = 0.0;
      e.exact = true;
      s.entries.push_back(e);
    }
    const double slope = fit_rate(s).slope;
    third_ok = third_ok && std::fabs(slope - 0.5) <= 0.05;
    third << " " << name << ":" << fmt(slope, 4);
  }
  const bool pass = drift <= 0.01 && diff <= 0.02 && gamma_ok && third_ok;
  r.line(9, pass, "Stroock-Varadhan diagnostics (OU, weak EM, x in [-2,2])",
         "sup|a_dt-a|=" + fmt(drift, 4) + " sup|b_dt-b|=" + fmt(diff, 4) + " at dt=2^-8; Gamma^0.05==0 on " +
             std::to_string(small) + " dt values with sqrt(dt)*sigma<0.05" + (gamma_ok ? "" : " (FAILED)") +
             "; third-moment slopes" + third.str() + ", " + fmt(seconds_since(t0), 3) + " s");
}

}  // namespace

int main() {
  Report r;
  std::vector<CloudPair> pairs;
  const std::vector<std::function<void()>> steps = {
      [&] { criterion1(r); },        [&] { criterion2(r); },        [&] { criterion3(r); },
      [&] { criterion5(r, pairs); }, [&] { criterion6(r, pairs); }, [&] { criterion4(r, pairs); },
      [&] { criterion7(r); },        [&] { criterion8(r); },        [&] { criterion9(r); }};
  for (const auto& step : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      std::cout << "FAIL  criterion raised: " << e.what() << std::endl;
      ++r.failures;
    }
  }
  std::cout << (r.failures == 0 ? "all acceptance criteria passed" : std::to_string(r.failures) + " failed")
            << std::endl;
  return r.failures == 0 ? 0 : 1;
}
