#pragma once

// Error series over dt grids, log-log rate fits, moment defects and
// Stroock-Varadhan coefficient diagnostics.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sdelab/integrators.hpp"
#include "sdelab/measure.hpp"
#include "sdelab/problems.hpp"
#include "sdelab/test_functions.hpp"

namespace sdelab {

struct ErrorEntry {
  double dt = 0.0;
  double error = 0.0;
  /// Monte Carlo standard error; 0 for exact entries, NaN when not estimated.
  double std_error = std::numeric_limits<double>::quiet_NaN();
  bool exact = false;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  /// Same-law noise floor for metric series, NaN otherwise.
  double floor = std::numeric_limits<double>::quiet_NaN();
};

struct ErrorSeries {
  std::string kind;   // weak | strong | prokhorov | wasserstein | defect | ...
  std::string label;  // problem/scheme/function
  std::vector<ErrorEntry> entries;
  /// Atom budget used for flow-based metrics (0 when not subsampled).
  std::size_t budget = 0;
  /// Reference value E f(X(T)) and its standard error (weak series).
  double reference = std::numeric_limits<double>::quiet_NaN();
  double reference_std_error = 0.0;
};

struct FitWindow {
  double dt_min = 0.0;
  double dt_max = std::numeric_limits<double>::infinity();
};

struct RateFit {
  double slope = 0.0;
  /// log C in error ~ C dt^slope.
  double intercept = 0.0;
  double residual_sum = 0.0;
  /// Indices of the series entries used, and their leverages.
  std::vector<std::size_t> used;
  std::vector<double> leverage;
  FitWindow window;
};

struct WeakErrorOptions {
  /// Exact-sampler draws for E f(X(T)) when no closed form exists.
  std::size_t reference_draws = 10'000'000;
  unsigned workers = 0;
};

/// |mean of f over M scheme draws - E f(X(T))| per dt, one series per f.
/// The clouds are shared between the functions.
std::vector<ErrorSeries> weak_error_series(const SdeProblem& problem, const SchemeIncrement& scheme,
                                           const std::vector<TestFunction>& fs, std::span<const double> dts,
                                           double T, std::size_t M, std::uint64_t seed,
                                           const WeakErrorOptions& options = {});
ErrorSeries weak_error_series(const SdeProblem& problem, const SchemeIncrement& scheme, const TestFunction& f,
                              std::span<const double> dts, double T, std::size_t M, std::uint64_t seed,
                              const WeakErrorOptions& options = {});

/// Weak error for a locally Lipschitz f with declared growth exponent kappa.
ErrorSeries local_lipschitz_weak_error(const SdeProblem& problem, const SchemeIncrement& scheme,
                                       const TestFunction& f, std::span<const double> dts, double T, std::size_t M,
                                       std::uint64_t seed, const WeakErrorOptions& options = {});

/// RMS of X_EM(T) - X(T) with the exact solution driven by the same normals.
ErrorSeries strong_error_series(const SdeProblem& problem, std::span<const double> dts, double T, std::size_t M,
                                std::uint64_t seed, unsigned workers = 0);

struct MetricSeriesOptions {
  std::size_t budget = 2000;
  unsigned workers = 0;
  /// Receives the budget-sized scheme and reference subsamples of every entry.
  std::function<void(std::size_t entry, const DiscreteMeasure& scheme, const DiscreteMeasure& reference)> on_pair;
};

/// prokhorov_exact between subsampled scheme and exact-law clouds; the floor
/// compares two independent exact-law clouds.
ErrorSeries prokhorov_error_series(const SdeProblem& problem, const SchemeIncrement& scheme,
                                   std::span<const double> dts, double T, std::size_t M, std::uint64_t seed,
                                   const MetricSeriesOptions& options = {});

/// wasserstein1 on full clouds in 1D, on budget subsamples otherwise.
ErrorSeries wasserstein_error_series(const SdeProblem& problem, const SchemeIncrement& scheme,
                                     std::span<const double> dts, double T, std::size_t M, std::uint64_t seed,
                                     const MetricSeriesOptions& options = {});

/// Whether an entry may enter a fit: error above 3 stderr and 3 floor.
bool usable_for_fit(const ErrorEntry& e);

/// Least squares of log error on log dt over usable entries in the window.
RateFit fit_rate(const ErrorSeries& series, const FitWindow& window = {});

/// max over index tuples of |E prod δ_{i_j} - E prod δ̄_{i_j}|, s in 1..3.
double moment_defect(const SdeProblem& problem, const SchemeIncrement& scheme, std::span<const double> x, int s,
                     double dt);

struct SvCoefficients {
  Vector a;
  Matrix b;
  /// Gamma^eps for each requested eps.
  std::vector<double> gamma;
  bool exact = false;
  Vector a_std_error;
  Matrix b_std_error;
  std::vector<double> gamma_std_error;
};

/// a_dt = E δ̄ 1{|δ̄| <= 1} / dt, b_dt = E δ̄ δ̄^T 1{|δ̄| <= 1} / dt and
/// Gamma^eps = P(|δ̄| >= eps) / dt. Sign schemes are enumerated exactly;
/// Gaussian schemes use `samples` Monte Carlo draws.
SvCoefficients sv_coefficients(const SdeProblem& problem, const SchemeIncrement& scheme, std::span<const double> x,
                               double dt, std::span<const double> eps, std::size_t samples = 1'000'000,
                               std::uint64_t seed = 0);

/// E |δ̄_i δ̄_j δ̄_k|: enumeration, the Gaussian closed form in 1D, or Monte Carlo.
double scheme_abs_moment3(const SdeProblem& problem, const SchemeIncrement& scheme, std::span<const double> x,
                          double dt, std::size_t i, std::size_t j, std::size_t k, std::size_t samples = 1'000'000,
                          std::uint64_t seed = 0);

struct SvCondition {
  std::string name;
  /// One value per dt, in grid order.
  std::vector<double> values;
  /// Grid positions where the value did not decrease as dt decreased.
  std::vector<std::size_t> violations;
  bool converging = false;
};

struct SvReport {
  std::vector<double> dts;
  std::vector<double> eps;
  bool exact = false;
  std::vector<SvCondition> conditions;

  const SvCondition& condition(const std::string& name) const;
};

SvReport sv_check(const SdeProblem& problem, const SchemeIncrement& scheme,
                  const std::vector<std::vector<double>>& x_grid, std::span<const double> dts,
                  std::span<const double> eps, std::size_t samples = 1'000'000, std::uint64_t seed = 0);

/// Columns dt,error,std_error,exact,samples,seed,floor.
void write_series_csv(const std::string& path, const ErrorSeries& series);
/// Needs dt and error columns; the others are optional.
ErrorSeries read_series_csv(const std::string& path);

}  // namespace sdelab
