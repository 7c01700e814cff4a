#pragma once

// One-step schemes X_{k+1} = X_k + δ̄(X_k, dt; ξ_k), path simulation and
// terminal clouds.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sdelab/measure.hpp"
#include "sdelab/noise.hpp"
#include "sdelab/problems.hpp"

namespace sdelab {

enum class WeakVariant { independent, sign_coupled };

struct SchemeIncrement {
  std::string label;
  NoiseKind noise = NoiseKind::gaussian;
  std::size_t noise_dim = 0;
  int order_weak = 1;
  /// out = δ̄(x, dt; xi). Pure.
  std::function<void(std::span<const double> x, double dt, std::span<const double> xi,
                     std::span<double> out)>
      step;
  /// δ̄ = a(x) dt + sum_r σ_r(x) sqrt(dt) ξ_r for the problem it was built from.
  bool euler_form = false;
  /// δ̄ is the exact transition of a catalog problem.
  bool exact = false;
};

SchemeIncrement strong_em_increment(const SdeProblem& problem);
SchemeIncrement weak_em_increment(const SdeProblem& problem, WeakVariant variant = WeakVariant::independent);
/// The exact transition as a scheme (errors if the problem has no oracle).
SchemeIncrement exact_increment(const SdeProblem& problem);

/// Builds a scheme by name: strong_em | weak_em | weak_em_sign | exact.
SchemeIncrement scheme_by_name(const SdeProblem& problem, const std::string& name);

struct DiscretePath {
  std::size_t dim = 0;
  std::vector<double> times;
  /// Row-major (times.size() x dim).
  std::vector<double> states;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::span<const double> state(std::size_t k) const { return {states.data() + k * dim, dim}; }
};

/// Step plan for [0, T]: full steps of dt plus one shortened final step when
/// T is not a multiple of dt (ratios within 1e-12 of an integer count as multiples).
struct StepPlan {
  std::size_t full_steps = 0;
  double last_dt = 0.0;  // 0 when there is no partial step
  std::size_t total() const noexcept { return full_steps + (last_dt > 0.0 ? 1 : 0); }
};
StepPlan plan_steps(double dt, double T);

DiscretePath simulate_path(const SdeProblem& problem, const SchemeIncrement& scheme, double dt, double T,
                           const NoiseStream& stream);

/// Terminal state only; out has problem.dim entries.
void simulate_terminal(const SdeProblem& problem, const SchemeIncrement& scheme, double dt, double T,
                       const NoiseStream& stream, std::span<double> out);

/// Linear interpolant of the chain; exact stored states at grid points.
std::vector<double> interpolate_path(const DiscretePath& path, double t);

/// M terminal states, trajectory m driven by NoiseStream(seed, m). Output is
/// independent of `workers` (0 means hardware concurrency).
DiscreteMeasure sample_terminal_cloud(const SdeProblem& problem, const SchemeIncrement& scheme, double dt,
                                      double T, std::size_t M, std::uint64_t seed, unsigned workers = 0);

/// M exact draws of X(T), draw m from NoiseStream(seed, m).
DiscreteMeasure sample_analytic_cloud(const SdeProblem& problem, double T, std::size_t M, std::uint64_t seed,
                                      unsigned workers = 0);

/// E prod_j δ̄_{i_j}(x, dt) in closed form: enumeration of the 2^q sign
/// outcomes for Rademacher noise, Isserlis for Euler-form Gaussian noise, and
/// the problem oracle for the exact scheme.
double scheme_increment_moment(const SdeProblem& problem, const SchemeIncrement& scheme,
                               std::span<const double> x, double dt, std::span<const std::size_t> indices);

/// Calls fn(probability, xi) for each of the 2^q equiprobable sign vectors.
void enumerate_sign_outcomes(std::size_t q, const std::function<void(double, std::span<const double>)>& fn);

void write_path_csv(const std::string& path, const DiscretePath& p);

/// Runs fn(begin, end) over [0, count) in chunks on `workers` threads.
void parallel_chunks(std::size_t count, std::size_t chunk, unsigned workers,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace sdelab
