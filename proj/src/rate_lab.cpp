#include "sdelab/rate_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "sdelab/csv.hpp"
#include "sdelab/error.hpp"
#include "sdelab/metrics.hpp"
#include "sdelab/moments.hpp"

namespace sdelab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Tags for derived seeds.
constexpr std::uint64_t kReferenceTag = 0x52454600;
constexpr std::uint64_t kFloorA = 0x464C4141;
constexpr std::uint64_t kFloorB = 0x464C4142;
constexpr std::uint64_t kSubsampleTag = 0x53554200;

void check_grid(std::span<const double> dts, double T) {
  if (dts.empty()) throw std::invalid_argument("empty dt grid");
  for (std::size_t i = 0; i < dts.size(); ++i) {
    if (!(dts[i] > 0.0)) throw std::invalid_argument("dt must be positive");
    if (i > 0 && !(dts[i] < dts[i - 1])) throw std::invalid_argument("dt grid must be strictly decreasing");
    if (plan_steps(dts[i], T).last_dt != 0.0)
      throw std::invalid_argument("T must be a multiple of every dt in the grid");
  }
}

std::uint64_t entry_seed(std::uint64_t seed, std::size_t i) { return derive_seed(seed, i + 1); }

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // sample variance
};

// Two-pass mean (with a correction sweep) and sample variance.
Moments moments_of(std::span<const double> v) {
  Moments m;
  const double n = static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += x;
  double mean = s / n;
  double corr = 0.0, sq = 0.0;
  for (double x : v) {
    corr += x - mean;
    sq += (x - mean) * (x - mean);
  }
  mean += corr / n;
  m.mean = mean;
  m.variance = v.size() > 1 ? std::max(0.0, (sq - corr * corr / n) / (n - 1.0)) : 0.0;
  return m;
}

struct Reference {
  double value = kNaN;
  double std_error = 0.0;
  bool exact = false;
};

Reference reference_value(const SdeProblem& problem, const TestFunction& f, double T, std::size_t draws,
                          std::uint64_t seed, unsigned workers) {
  const AnalyticLaw& law = *problem.law;
  if (!f.monomial.empty() && law.moment) return {law.moment(T, f.monomial), 0.0, true};
  if (law.gaussian && problem.dim == 1 && f.gaussian_expectation)
    return {f.gaussian_expectation(law.mean(T)(0), law.covariance(T)(0, 0)), 0.0, true};
  if (draws < 2) throw std::invalid_argument("reference needs at least 2 exact draws");
  const std::size_t chunk = 1 << 16;
  const std::size_t nchunks = (draws + chunk - 1) / chunk;
  std::vector<double> sums(nchunks), squares(nchunks);
  const std::uint64_t ref_seed = derive_seed(seed, kReferenceTag);
  // Shift by f at the mean to keep the sums well conditioned.
  std::vector<double> centre_x(problem.dim);
  const Vector mu = law.mean(T);
  for (std::size_t i = 0; i < problem.dim; ++i) centre_x[i] = mu(static_cast<Eigen::Index>(i));
  const double centre = f(centre_x);
  parallel_chunks(draws, chunk, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(problem.dim);
    double s = 0.0, q = 0.0;
    for (std::size_t m = begin; m < end; ++m) {
      law.sample(T, NoiseStream(ref_seed, m), x);
      const double v = f(x) - centre;
      s += v;
      q += v * v;
    }
    sums[begin / chunk] = s;
    squares[begin / chunk] = q;
  });
  double s = 0.0, q = 0.0;
  for (std::size_t c = 0; c < nchunks; ++c) {
    s += sums[c];
    q += squares[c];
  }
  const double n = static_cast<double>(draws);
  const double mean = s / n;
  const double var = std::max(0.0, (q - s * mean) / (n - 1.0));
  return {centre + mean, std::sqrt(var / n), false};
}

std::string series_label(const SdeProblem& problem, const SchemeIncrement& scheme) {
  return problem.label + "/" + scheme.label;
}

DiscreteMeasure budget_subsample(const DiscreteMeasure& m, std::size_t budget, std::uint64_t seed) {
  if (budget == 0 || m.size() <= budget) return m;
  return m.subsample(budget, seed);
}

}  // namespace

// ---------------------------------------------------------------- weak and strong

std::vector<ErrorSeries> weak_error_series(const SdeProblem& problem, const SchemeIncrement& scheme,
                                           const std::vector<TestFunction>& fs, std::span<const double> dts,
                                           double T, std::size_t M, std::uint64_t seed,
                                           const WeakErrorOptions& options) {
  if (!problem.law) throw std::invalid_argument("problem '" + problem.label + "' has no analytic law");
  check_grid(dts, T);
  if (M < 2) throw std::invalid_argument("weak error needs at least 2 samples");
  std::vector<ErrorSeries> out(fs.size());
  std::vector<Reference> refs;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    if (fs[k].dim != problem.dim) throw std::invalid_argument("test function dimension differs from the problem");
    refs.push_back(reference_value(problem, fs[k], T, options.reference_draws, seed, options.workers));
    out[k].kind = "weak";
    out[k].label = series_label(problem, scheme) + "/" + fs[k].label;
    out[k].reference = refs[k].value;
    out[k].reference_std_error = refs[k].std_error;
  }
  std::vector<double> values(M), x(problem.dim);
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const std::uint64_t s = entry_seed(seed, i);
    const DiscreteMeasure cloud = sample_terminal_cloud(problem, scheme, dts[i], T, M, s, options.workers);
    for (std::size_t k = 0; k < fs.size(); ++k) {
      for (std::size_t m = 0; m < M; ++m) {
        cloud.point(m, x);
        values[m] = fs[k](x);
      }
      const Moments mo = moments_of(values);
      ErrorEntry e;
      e.dt = dts[i];
      e.error = std::fabs(mo.mean - refs[k].value);
      e.std_error = std::sqrt(mo.variance / static_cast<double>(M) + refs[k].std_error * refs[k].std_error);
      e.samples = M;
      e.seed = s;
      out[k].entries.push_back(e);
    }
  }
  return out;
}

ErrorSeries weak_error_series(const SdeProblem& problem, const SchemeIncrement& scheme, const TestFunction& f,
                              std::span<const double> dts, double T, std::size_t M, std::uint64_t seed,
                              const WeakErrorOptions& options) {
  return weak_error_series(problem, scheme, std::vector<TestFunction>{f}, dts, T, M, seed, options).front();
}

ErrorSeries local_lipschitz_weak_error(const SdeProblem& problem, const SchemeIncrement& scheme,
                                       const TestFunction& f, std::span<const double> dts, double T, std::size_t M,
                                       std::uint64_t seed, const WeakErrorOptions& options) {
  if (std::isnan(f.kappa)) throw std::invalid_argument("test function '" + f.label + "' declares no kappa");
  ErrorSeries s = weak_error_series(problem, scheme, f, dts, T, M, seed, options);
  s.kind = "local-lipschitz";
  return s;
}

ErrorSeries strong_error_series(const SdeProblem& problem, std::span<const double> dts, double T, std::size_t M,
                                std::uint64_t seed, unsigned workers) {
  const auto& inc = problem.increments;
  if (!inc || !inc->same_noise || inc->noise_dim != problem.drivers)
    throw std::invalid_argument("problem '" + problem.label + "' has no same-noise exact solution");
  check_grid(dts, T);
  if (M < 2) throw std::invalid_argument("strong error needs at least 2 samples");
  const SchemeIncrement scheme = strong_em_increment(problem);
  const std::size_t n = problem.dim;
  ErrorSeries out;
  out.kind = "strong";
  out.label = series_label(problem, scheme);
  std::vector<double> sq(M);
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double dt = dts[i];
    const std::uint64_t s = entry_seed(seed, i);
    const std::size_t steps = plan_steps(dt, T).full_steps;
    parallel_chunks(M, 256, workers, [&](std::size_t begin, std::size_t end) {
      std::vector<double> x(n), y(n), next(n), delta(n), xi(problem.drivers);
      for (std::size_t m = begin; m < end; ++m) {
        const NoiseStream stream(s, m);
        std::copy(problem.initial.begin(), problem.initial.end(), x.begin());
        y = x;
        for (std::size_t k = 0; k < steps; ++k) {
          stream.draw(NoiseKind::gaussian, static_cast<std::uint32_t>(k), xi);
          scheme.step(x, dt, xi, delta);
          for (std::size_t d = 0; d < n; ++d) x[d] = x[d] + delta[d];
          inc->transition(y, dt, xi, next);
          y.swap(next);
          for (std::size_t d = 0; d < n; ++d)
            if (!std::isfinite(x[d]) || !std::isfinite(y[d])) throw DivergenceError(m, k + 1);
        }
        double e = 0.0;
        for (std::size_t d = 0; d < n; ++d) e += (x[d] - y[d]) * (x[d] - y[d]);
        sq[m] = e;
      }
    });
    double total = 0.0;
    for (double v : sq) total += v;
    const double Md = static_cast<double>(M);
    const double rms = std::sqrt(total / Md);
    // Jackknife over leave-one-out RMS values.
    double mean_loo = 0.0;
    for (double v : sq) mean_loo += std::sqrt(std::max(0.0, total - v) / (Md - 1.0));
    mean_loo /= Md;
    double var = 0.0;
    for (double v : sq) {
      const double d = std::sqrt(std::max(0.0, total - v) / (Md - 1.0)) - mean_loo;
      var += d * d;
    }
    ErrorEntry e;
    e.dt = dt;
    e.error = rms;
    e.std_error = std::sqrt((Md - 1.0) / Md * var);
    e.samples = M;
    e.seed = s;
    out.entries.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------- metric series

namespace {

template <typename Metric>
ErrorSeries metric_series(const char* kind, const SdeProblem& problem, const SchemeIncrement& scheme,
                          std::span<const double> dts, double T, std::size_t M, std::uint64_t seed,
                          const MetricSeriesOptions& options, bool full_clouds, Metric metric) {
  if (!problem.law) throw std::invalid_argument("problem '" + problem.label + "' has no analytic law");
  check_grid(dts, T);
  ErrorSeries out;
  out.kind = kind;
  out.label = series_label(problem, scheme);
  out.budget = full_clouds ? 0 : options.budget;
  const std::uint64_t sa = derive_seed(seed, kFloorA), sb = derive_seed(seed, kFloorB);
  const DiscreteMeasure ref = sample_analytic_cloud(problem, T, M, sa, options.workers);
  const DiscreteMeasure ref_sub = budget_subsample(ref, options.budget, derive_seed(sa, kSubsampleTag));
  double floor = 0.0;
  {
    const DiscreteMeasure other = sample_analytic_cloud(problem, T, M, sb, options.workers);
    floor = full_clouds ? metric(ref, other)
                        : metric(ref_sub, budget_subsample(other, options.budget, derive_seed(sb, kSubsampleTag)));
  }
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const std::uint64_t s = entry_seed(seed, i);
    const DiscreteMeasure cloud = sample_terminal_cloud(problem, scheme, dts[i], T, M, s, options.workers);
    const DiscreteMeasure sub = budget_subsample(cloud, options.budget, derive_seed(s, kSubsampleTag));
    ErrorEntry e;
    e.dt = dts[i];
    e.error = full_clouds ? metric(cloud, ref) : metric(sub, ref_sub);
    e.samples = M;
    e.seed = s;
    e.floor = floor;
    out.entries.push_back(e);
    if (options.on_pair) options.on_pair(i, sub, ref_sub);
  }
  return out;
}

}  // namespace

ErrorSeries prokhorov_error_series(const SdeProblem& problem, const SchemeIncrement& scheme,
                                   std::span<const double> dts, double T, std::size_t M, std::uint64_t seed,
                                   const MetricSeriesOptions& options) {
  return metric_series("prokhorov", problem, scheme, dts, T, M, seed, options, false,
                       [](const DiscreteMeasure& a, const DiscreteMeasure& b) { return prokhorov_exact(a, b); });
}

ErrorSeries wasserstein_error_series(const SdeProblem& problem, const SchemeIncrement& scheme,
                                     std::span<const double> dts, double T, std::size_t M, std::uint64_t seed,
                                     const MetricSeriesOptions& options) {
  return metric_series("wasserstein", problem, scheme, dts, T, M, seed, options, problem.dim == 1,
                       [](const DiscreteMeasure& a, const DiscreteMeasure& b) { return wasserstein1(a, b); });
}

// ---------------------------------------------------------------- fitting

bool usable_for_fit(const ErrorEntry& e) {
  if (!(e.error > 0.0) || !std::isfinite(e.error)) return false;
  if (std::isfinite(e.std_error) && !(e.error > 3.0 * e.std_error)) return false;
  if (std::isfinite(e.floor) && !(e.error > 3.0 * e.floor)) return false;
  return true;
}

RateFit fit_rate(const ErrorSeries& series, const FitWindow& window) {
  RateFit fit;
  fit.window = window;
  std::vector<double> u, v;
  for (std::size_t i = 0; i < series.entries.size(); ++i) {
    const ErrorEntry& e = series.entries[i];
    if (e.dt < window.dt_min || e.dt > window.dt_max || !usable_for_fit(e)) continue;
    fit.used.push_back(i);
    u.push_back(std::log(e.dt));
    v.push_back(std::log(e.error));
  }
  if (u.size() < 2) throw std::invalid_argument("rate fit needs at least 2 usable points");
  const double n = static_cast<double>(u.size());
  double ub = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    ub += u[i];
    vb += v[i];
  }
  ub /= n;
  vb /= n;
  double suu = 0.0, suv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - ub) * (u[i] - ub);
    suv += (u[i] - ub) * (v[i] - vb);
  }
  if (!(suu > 0.0)) throw std::invalid_argument("rate fit needs at least 2 distinct dt values");
  fit.slope = suv / suu;
  fit.intercept = vb - fit.slope * ub;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = v[i] - (fit.intercept + fit.slope * u[i]);
    fit.residual_sum += r * r;
    fit.leverage.push_back(1.0 / n + (u[i] - ub) * (u[i] - ub) / suu);
  }
  return fit;
}

// ---------------------------------------------------------------- moment defects

double moment_defect(const SdeProblem& problem, const SchemeIncrement& scheme, std::span<const double> x, int s,
                     double dt) {
  if (s < 1 || s > 3) throw std::invalid_argument("moment order s must be 1, 2 or 3");
  if (!problem.increments) throw std::invalid_argument("problem '" + problem.label + "' has no increment oracle");
  if (x.size() != problem.dim) throw std::invalid_argument("point dimension differs from the problem");
  double worst = 0.0;
  for (const auto& idx : index_tuples(problem.dim, static_cast<std::size_t>(s))) {
    const double exact = problem.increments->moment(x, dt, idx);
    const double approx = scheme_increment_moment(problem, scheme, x, dt, idx);
    worst = std::max(worst, std::fabs(exact - approx));
  }
  return worst;
}

// ---------------------------------------------------------------- Stroock-Varadhan

namespace {

bool finite_outcomes(const SchemeIncrement& scheme) {
  return scheme.noise == NoiseKind::rademacher || scheme.noise == NoiseKind::gaussian_sign;
}

// Calls fn(weight, δ̄) over the exact outcomes or over Monte Carlo draws.
void for_each_increment(const SdeProblem& problem, const SchemeIncrement& scheme, std::span<const double> x,
                        double dt, std::size_t samples, std::uint64_t seed,
                        const std::function<void(double, std::span<const double>)>& fn) {
  std::vector<double> delta(problem.dim);
  if (finite_outcomes(scheme)) {
    enumerate_sign_outcomes(scheme.noise_dim, [&](double p, std::span<const double> xi) {
      scheme.step(x, dt, xi, delta);
      fn(p, delta);
    });
    return;
  }
  if (samples < 2) throw std::invalid_argument("Monte Carlo needs at least 2 samples");
  std::vector<double> xi(scheme.noise_dim);
  const double w = 1.0 / static_cast<double>(samples);
  for (std::size_t m = 0; m < samples; ++m) {
    NoiseStream(seed, m).draw(scheme.noise, 0, xi);
    scheme.step(x, dt, xi, delta);
    fn(w, delta);
  }
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

SvCoefficients sv_coefficients(const SdeProblem& problem, const SchemeIncrement& scheme, std::span<const double> x,
                               double dt, std::span<const double> eps, std::size_t samples, std::uint64_t seed) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  for (double e : eps)
    if (!(e > 0.0)) throw std::invalid_argument("eps must be positive");
  const std::size_t n = problem.dim;
  const auto N = static_cast<Eigen::Index>(n);
  Vector a1 = Vector::Zero(N), a2 = Vector::Zero(N);
  Matrix b1 = Matrix::Zero(N, N), b2 = Matrix::Zero(N, N);
  std::vector<double> g(eps.size(), 0.0);
  for_each_increment(problem, scheme, x, dt, samples, seed, [&](double w, std::span<const double> d) {
    const double r = norm(d);
    for (std::size_t k = 0; k < eps.size(); ++k)
      if (r >= eps[k]) g[k] += w;
    if (r > 1.0) return;
    for (Eigen::Index i = 0; i < N; ++i) {
      const double di = d[static_cast<std::size_t>(i)];
      a1(i) += w * di;
      a2(i) += w * di * di;
      for (Eigen::Index j = 0; j < N; ++j) {
        const double p = di * d[static_cast<std::size_t>(j)];
        b1(i, j) += w * p;
        b2(i, j) += w * p * p;
      }
    }
  });
  SvCoefficients out;
  out.exact = finite_outcomes(scheme);
  out.a = a1 / dt;
  out.b = b1 / dt;
  for (double v : g) out.gamma.push_back(v / dt);
  out.a_std_error = Vector::Zero(N);
  out.b_std_error = Matrix::Zero(N, N);
  out.gamma_std_error.assign(eps.size(), 0.0);
  if (!out.exact) {
    const double Md = static_cast<double>(samples);
    auto se = [&](double m1, double m2) { return std::sqrt(std::max(0.0, m2 - m1 * m1) / (Md - 1.0)) / dt; };
    for (Eigen::Index i = 0; i < N; ++i) {
      out.a_std_error(i) = se(a1(i), a2(i));
      for (Eigen::Index j = 0; j < N; ++j) out.b_std_error(i, j) = se(b1(i, j), b2(i, j));
    }
    for (std::size_t k = 0; k < eps.size(); ++k) out.gamma_std_error[k] = se(g[k], g[k]);
  }
  return out;
}

double scheme_abs_moment3(const SdeProblem& problem, const SchemeIncrement& scheme, std::span<const double> x,
                          double dt, std::size_t i, std::size_t j, std::size_t k, std::size_t samples,
                          std::uint64_t seed) {
  if (i >= problem.dim || j >= problem.dim || k >= problem.dim) throw std::invalid_argument("index out of range");
  if (scheme.euler_form && scheme.noise == NoiseKind::gaussian && problem.dim == 1) {
    // δ̄ ~ N(a dt, b dt): E|δ̄|^3 in closed form.
    double a = 0.0;
    problem.eval_drift(x, std::span<double>(&a, 1));
    const double b = diffusion_matrix(problem, x)(0, 0);
    const double m = a * dt, v = b * dt;
    if (v == 0.0) return std::fabs(m) * m * m;
    const double s = std::sqrt(v), z = m / s;
    const double Phi = 0.5 * std::erfc(-z / std::sqrt(2.0));
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
    return v * s * ((z * z * z + 3.0 * z) * (2.0 * Phi - 1.0) + 2.0 * (z * z + 2.0) * phi);
  }
  double acc = 0.0;
  for_each_increment(problem, scheme, x, dt, samples, seed,
                     [&](double w, std::span<const double> d) { acc += w * std::fabs(d[i] * d[j] * d[k]); });
  return acc;
}

const SvCondition& SvReport::condition(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return c;
  throw std::out_of_range("no condition named '" + name + "'");
}

SvReport sv_check(const SdeProblem& problem, const SchemeIncrement& scheme,
                  const std::vector<std::vector<double>>& x_grid, std::span<const double> dts,
                  std::span<const double> eps, std::size_t samples, std::uint64_t seed) {
  if (x_grid.empty()) throw std::invalid_argument("empty x grid");
  if (dts.empty()) throw std::invalid_argument("empty dt grid");
  const std::size_t n = problem.dim;
  SvReport report;
  report.dts.assign(dts.begin(), dts.end());
  report.eps.assign(eps.begin(), eps.end());
  report.exact = finite_outcomes(scheme);
  std::vector<SvCondition> conds(5 + eps.size());
  conds[0].name = "drift";
  conds[1].name = "diffusion";
  for (std::size_t k = 0; k < eps.size(); ++k) conds[2 + k].name = "jump(eps=" + format_real(eps[k]) + ")";
  conds[2 + eps.size()].name = "first-moment";
  conds[3 + eps.size()].name = "second-moment";
  conds[4 + eps.size()].name = "third-moment";
  for (std::size_t t = 0; t < dts.size(); ++t) {
    const double dt = dts[t];
    std::vector<double> sup(conds.size(), 0.0);
    for (std::size_t p = 0; p < x_grid.size(); ++p) {
      const std::vector<double>& x = x_grid[p];
      if (x.size() != n) throw std::invalid_argument("x grid point dimension differs from the problem");
      const std::uint64_t s = derive_seed(seed, t * x_grid.size() + p);
      const SvCoefficients c = sv_coefficients(problem, scheme, x, dt, eps, samples, s);
      Vector a(static_cast<Eigen::Index>(n));
      problem.eval_drift(x, std::span<double>(a.data(), n));
      sup[0] = std::max(sup[0], (c.a - a).norm());
      sup[1] = std::max(sup[1], (c.b - diffusion_matrix(problem, x)).norm());
      for (std::size_t k = 0; k < eps.size(); ++k) sup[2 + k] = std::max(sup[2 + k], c.gamma[k]);
      if (problem.increments) {
        sup[2 + eps.size()] = std::max(sup[2 + eps.size()], moment_defect(problem, scheme, x, 1, dt) / dt);
        sup[3 + eps.size()] = std::max(sup[3 + eps.size()], moment_defect(problem, scheme, x, 2, dt) / dt);
      } else {
        sup[2 + eps.size()] = sup[3 + eps.size()] = kNaN;
      }
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t k = 0; k < n; ++k)
            sup.back() = std::max(sup.back(), scheme_abs_moment3(problem, scheme, x, dt, i, j, k, samples, s) / dt);
    }
    for (std::size_t c = 0; c < conds.size(); ++c) conds[c].values.push_back(sup[c]);
  }
  for (auto& c : conds) {
    const auto& v = c.values;
    for (std::size_t t = 1; t < v.size(); ++t)
      if (!(v[t] < v[t - 1]) && !(v[t] == 0.0 && v[t - 1] == 0.0)) c.violations.push_back(t);
    // Converging: ends at zero, or the last (up to three) values decrease.
    bool tail = v.size() >= 2;
    for (std::size_t t = v.size() >= 3 ? v.size() - 2 : 1; t < v.size(); ++t) tail = tail && v[t] < v[t - 1];
    c.converging = !v.empty() && (v.back() <= 1e-12 || tail);
  }
  report.conditions = std::move(conds);
  return report;
}

// ---------------------------------------------------------------- CSV

void write_series_csv(const std::string& path, const ErrorSeries& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "dt,error,std_error,exact,samples,seed,floor\n";
  for (const auto& e : series.entries)
    out << format_real(e.dt) << ',' << format_real(e.error) << ',' << format_real(e.std_error) << ','
        << (e.exact ? 1 : 0) << ',' << e.samples << ',' << e.seed << ',' << format_real(e.floor) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

ErrorSeries read_series_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < t.header.size(); ++i) col[t.header[i]] = i;
  if (!col.count("dt") || !col.count("error")) throw std::runtime_error("'" + path + "' needs dt and error columns");
  ErrorSeries s;
  s.kind = "file";
  s.label = path;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t line = r + 2;
    auto real = [&](const char* name, double fallback) {
      auto it = col.find(name);
      return it == col.end() ? fallback : parse_real(row[it->second], path, line);
    };
    ErrorEntry e;
    e.dt = real("dt", 0.0);
    e.error = real("error", 0.0);
    e.std_error = real("std_error", kNaN);
    e.exact = real("exact", 0.0) != 0.0;
    e.samples = static_cast<std::size_t>(real("samples", 0.0));
    if (auto it = col.find("seed"); it != col.end()) e.seed = std::stoull(row[it->second]);
    e.floor = real("floor", kNaN);
    if (!(e.dt > 0.0) || !(e.error >= 0.0))
      throw std::runtime_error(path + ":" + std::to_string(line) + ": dt must be positive and error nonnegative");
    s.entries.push_back(e);
  }
  return s;
}

}  // namespace sdelab
