#include "sdelab/integrators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "sdelab/error.hpp"
#include "sdelab/kernels.hpp"
#include "sdelab/moments.hpp"

namespace sdelab {

namespace {

SchemeIncrement euler_scheme(const SdeProblem& problem, NoiseKind noise, std::string label) {
  SchemeIncrement s;
  s.label = std::move(label);
  s.noise = noise;
  s.noise_dim = problem.drivers;
  s.order_weak = 1;
  s.euler_form = true;
  s.step = [drift = problem.drift, diffusion = problem.diffusion, n = problem.dim](
               std::span<const double> x, double dt, std::span<const double> xi, std::span<double> out) {
    thread_local std::vector<double> sigma;
    sigma.resize(n);
    drift(x, out);
    const double sqrt_dt = std::sqrt(dt);
    for (std::size_t i = 0; i < n; ++i) out[i] = out[i] * dt;
    for (std::size_t r = 0; r < diffusion.size(); ++r) {
      diffusion[r](x, sigma);
      const double dw = sqrt_dt * xi[r];
      for (std::size_t i = 0; i < n; ++i) out[i] = out[i] + sigma[i] * dw;
    }
  };
  return s;
}

bool finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

template <typename OnState>
void run_chain(const SdeProblem& problem, const SchemeIncrement& scheme, double dt, double T,
               const NoiseStream& stream, std::span<double> x, OnState&& on_state) {
  if (!scheme.step) throw std::invalid_argument("scheme has no step function");
  const StepPlan plan = plan_steps(dt, T);
  std::copy(problem.initial.begin(), problem.initial.end(), x.begin());
  thread_local std::vector<double> xi, delta;
  xi.resize(scheme.noise_dim);
  delta.resize(problem.dim);
  const std::size_t total = plan.total();
  for (std::size_t k = 0; k < total; ++k) {
    const double h = k < plan.full_steps ? dt : plan.last_dt;
    stream.draw(scheme.noise, static_cast<std::uint32_t>(k), xi);
    scheme.step(x, h, xi, delta);
    for (std::size_t i = 0; i < problem.dim; ++i) x[i] = x[i] + delta[i];
    if (!finite(x)) throw DivergenceError(stream.stream(), k + 1);
    on_state(k + 1, std::span<const double>(x));
  }
}

bool batchable(const SdeProblem& problem, const SchemeIncrement& scheme) {
  return scheme.euler_form && problem.affine && problem.dim == 1 && problem.drivers == 1 &&
         scheme.noise_dim == 1;
}

// Trajectories [begin, end) of a scalar affine Euler scheme, lane-parallel.
// Reproduces run_chain bitwise: same Philox counters, same noise transform,
// same floating-point operation order.
void batched_affine_chunk(const SdeProblem& problem, const SchemeIncrement& scheme, double dt, double T,
                          std::uint64_t seed, std::size_t begin, std::size_t end, double* out) {
  const auto& k = kernels::active();
  const std::size_t count = end - begin;
  const AffineCoefficients& c = *problem.affine;
  const StepPlan plan = plan_steps(dt, T);
  std::vector<std::uint32_t> ctr(4 * count), words(4 * count);
  std::vector<double> noise(count);
  const std::uint32_t* ctr_ptr[4];
  std::uint32_t* out_ptr[4];
  for (int w = 0; w < 4; ++w) {
    ctr_ptr[w] = ctr.data() + w * count;
    out_ptr[w] = words.data() + w * count;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t m = begin + i;
    ctr[i] = 0;
    ctr[2 * count + i] = static_cast<std::uint32_t>(m);
    ctr[3 * count + i] = static_cast<std::uint32_t>(m >> 32);
  }
  const NoiseStream keyed(seed, 0);
  const PhiloxKey key = keyed.key();
  std::fill(out, out + count, problem.initial[0]);
  const std::size_t total = plan.total();
  for (std::size_t s = 0; s < total; ++s) {
    const double h = s < plan.full_steps ? dt : plan.last_dt;
    const kernels::AffineStep1D coef{c.drift_offset(0), c.drift_linear(0, 0), c.diffusion_offset[0](0),
                                     c.diffusion_linear[0](0, 0), h, std::sqrt(h)};
    std::fill(ctr.begin() + static_cast<std::ptrdiff_t>(count), ctr.begin() + static_cast<std::ptrdiff_t>(2 * count),
              static_cast<std::uint32_t>(s));
    k.philox(ctr_ptr, out_ptr, count, key[0], key[1]);
    for (std::size_t i = 0; i < count; ++i) {
      const PhiloxBlock b{words[i], words[count + i], words[2 * count + i], words[3 * count + i]};
      double z = 0.0;
      noise_from_blocks(scheme.noise, std::span<const PhiloxBlock>(&b, 1), std::span<double>(&z, 1));
      noise[i] = z;
    }
    k.affine_em_step(out, noise.data(), count, coef);
  }
  for (std::size_t i = 0; i < count; ++i)
    if (!std::isfinite(out[i])) {
      // Re-run the trajectory on the generic path to locate the step.
      double x = 0.0;
      run_chain(problem, scheme, dt, T, NoiseStream(seed, begin + i), std::span<double>(&x, 1),
                [](std::size_t, std::span<const double>) {});
      throw DivergenceError(begin + i, plan.total());
    }
}

}  // namespace

SchemeIncrement strong_em_increment(const SdeProblem& problem) {
  return euler_scheme(problem, NoiseKind::gaussian, "strong_em");
}

SchemeIncrement weak_em_increment(const SdeProblem& problem, WeakVariant variant) {
  if (variant == WeakVariant::sign_coupled) return euler_scheme(problem, NoiseKind::gaussian_sign, "weak_em_sign");
  return euler_scheme(problem, NoiseKind::rademacher, "weak_em");
}

SchemeIncrement exact_increment(const SdeProblem& problem) {
  if (!problem.increments) throw std::invalid_argument("problem '" + problem.label + "' has no exact transition");
  SchemeIncrement s;
  s.label = "exact";
  s.noise = NoiseKind::gaussian;
  s.noise_dim = problem.increments->noise_dim;
  s.order_weak = std::numeric_limits<int>::max();
  s.exact = true;
  s.step = [inc = problem.increments](std::span<const double> x, double dt, std::span<const double> xi,
                                      std::span<double> out) {
    inc->transition(x, dt, xi, out);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = out[i] - x[i];
  };
  return s;
}

SchemeIncrement scheme_by_name(const SdeProblem& problem, const std::string& name) {
  if (name == "strong_em") return strong_em_increment(problem);
  if (name == "weak_em") return weak_em_increment(problem, WeakVariant::independent);
  if (name == "weak_em_sign") return weak_em_increment(problem, WeakVariant::sign_coupled);
  if (name == "exact") return exact_increment(problem);
  throw ConfigError("scheme", "unknown scheme '" + name + "'");
}

StepPlan plan_steps(double dt, double T) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive and finite");
  if (!std::isfinite(T)) throw std::invalid_argument("T must be finite");
  const double ratio = T / dt;
  if (!(ratio >= 1.0 - 1e-12)) throw std::invalid_argument("T must be at least dt");
  if (ratio > static_cast<double>(std::numeric_limits<std::uint32_t>::max()))
    throw std::invalid_argument("T/dt exceeds the step counter range");
  StepPlan plan;
  const double nearest = std::round(ratio);
  if (std::fabs(ratio - nearest) <= 1e-12 * std::max(1.0, ratio)) {
    plan.full_steps = static_cast<std::size_t>(nearest);
    return plan;
  }
  plan.full_steps = static_cast<std::size_t>(std::floor(ratio));
  plan.last_dt = T - static_cast<double>(plan.full_steps) * dt;
  return plan;
}

DiscretePath simulate_path(const SdeProblem& problem, const SchemeIncrement& scheme, double dt, double T,
                           const NoiseStream& stream) {
  const StepPlan plan = plan_steps(dt, T);
  DiscretePath path;
  path.dim = problem.dim;
  path.seed = stream.seed();
  path.stream = stream.stream();
  path.times.reserve(plan.total() + 1);
  path.states.reserve((plan.total() + 1) * problem.dim);
  path.times.push_back(0.0);
  path.states.insert(path.states.end(), problem.initial.begin(), problem.initial.end());
  std::vector<double> x(problem.dim);
  run_chain(problem, scheme, dt, T, stream, x, [&](std::size_t k, std::span<const double> state) {
    path.times.push_back(k <= plan.full_steps ? static_cast<double>(k) * dt : T);
    path.states.insert(path.states.end(), state.begin(), state.end());
  });
  return path;
}

void simulate_terminal(const SdeProblem& problem, const SchemeIncrement& scheme, double dt, double T,
                       const NoiseStream& stream, std::span<double> out) {
  run_chain(problem, scheme, dt, T, stream, out, [](std::size_t, std::span<const double>) {});
}

std::vector<double> interpolate_path(const DiscretePath& path, double t) {
  if (path.times.empty()) throw std::invalid_argument("empty path");
  const double T = path.times.back();
  if (!(t >= 0.0 && t <= T)) throw std::invalid_argument("t outside [0, T]");
  const std::size_t K = path.times.size() - 1;
  const double dt = K > 0 ? path.times[1] - path.times[0] : 0.0;
  std::vector<double> out(path.dim);
  if (K == 0) {
    auto s = path.state(0);
    std::copy(s.begin(), s.end(), out.begin());
    return out;
  }
  // Segment index from the uniform grid; the shortened last segment is
  // handled by locating t among the stored times.
  std::size_t k = static_cast<std::size_t>(std::floor(t / dt));
  if (k >= K) k = K - 1;
  while (k > 0 && path.times[k] > t) --k;
  while (k + 1 < K && path.times[k + 1] <= t) ++k;
  const auto a = path.state(k);
  if (t == path.times[k]) {
    std::copy(a.begin(), a.end(), out.begin());
    return out;
  }
  const auto b = path.state(k + 1);
  if (t == path.times[k + 1]) {
    std::copy(b.begin(), b.end(), out.begin());
    return out;
  }
  const double frac = (t - path.times[k]) / (path.times[k + 1] - path.times[k]);
  for (std::size_t i = 0; i < path.dim; ++i) out[i] = a[i] + frac * (b[i] - a[i]);
  return out;
}

void parallel_chunks(std::size_t count, std::size_t chunk, unsigned workers,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t nchunks = (count + chunk - 1) / chunk;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, nchunks));
  std::vector<std::exception_ptr> errors(nchunks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t c; (c = next.fetch_add(1)) < nchunks;) {
      try {
        fn(c * chunk, std::min(count, (c + 1) * chunk));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

DiscreteMeasure sample_terminal_cloud(const SdeProblem& problem, const SchemeIncrement& scheme, double dt,
                                      double T, std::size_t M, std::uint64_t seed, unsigned workers) {
  if (M == 0) throw std::invalid_argument("sample count must be at least 1");
  plan_steps(dt, T);
  const std::size_t n = problem.dim;
  std::vector<double> points(M * n);
  if (batchable(problem, scheme)) {
    parallel_chunks(M, 1024, workers, [&](std::size_t begin, std::size_t end) {
      batched_affine_chunk(problem, scheme, dt, T, seed, begin, end, points.data() + begin);
    });
  } else {
    parallel_chunks(M, 256, workers, [&](std::size_t begin, std::size_t end) {
      for (std::size_t m = begin; m < end; ++m)
        simulate_terminal(problem, scheme, dt, T, NoiseStream(seed, m), std::span<double>(points.data() + m * n, n));
    });
  }
  return DiscreteMeasure::uniform(n, points);
}

DiscreteMeasure sample_analytic_cloud(const SdeProblem& problem, double T, std::size_t M, std::uint64_t seed,
                                      unsigned workers) {
  if (!problem.law) throw std::invalid_argument("problem '" + problem.label + "' has no analytic law");
  if (M == 0) throw std::invalid_argument("sample count must be at least 1");
  const std::size_t n = problem.dim;
  std::vector<double> points(M * n);
  parallel_chunks(M, 1024, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t m = begin; m < end; ++m)
      problem.law->sample(T, NoiseStream(seed, m), std::span<double>(points.data() + m * n, n));
  });
  return DiscreteMeasure::uniform(n, points);
}

void enumerate_sign_outcomes(std::size_t q, const std::function<void(double, std::span<const double>)>& fn) {
  if (q > 24) throw std::invalid_argument("too many drivers for outcome enumeration");
  const std::uint64_t count = std::uint64_t{1} << q;
  const double p = 1.0 / static_cast<double>(count);
  std::vector<double> xi(q);
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    for (std::size_t r = 0; r < q; ++r) xi[r] = (bits >> r) & 1u ? 1.0 : -1.0;
    fn(p, xi);
  }
}

double scheme_increment_moment(const SdeProblem& problem, const SchemeIncrement& scheme,
                               std::span<const double> x, double dt, std::span<const std::size_t> indices) {
  if (scheme.exact) {
    if (!problem.increments) throw std::invalid_argument("problem has no increment oracle");
    return problem.increments->moment(x, dt, indices);
  }
  if (scheme.noise == NoiseKind::rademacher || scheme.noise == NoiseKind::gaussian_sign) {
    std::vector<double> delta(problem.dim);
    double total = 0.0;
    enumerate_sign_outcomes(scheme.noise_dim, [&](double p, std::span<const double> xi) {
      scheme.step(x, dt, xi, delta);
      double prod = 1.0;
      for (std::size_t i : indices) prod *= delta[i];
      total += p * prod;
    });
    return total;
  }
  if (scheme.euler_form) {
    const std::size_t n = problem.dim;
    std::vector<double> a(n);
    problem.eval_drift(x, a);
    Vector mean(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) mean(static_cast<Eigen::Index>(i)) = a[i] * dt;
    Matrix cov = diffusion_matrix(problem, x) * dt;
    return gaussian_product_moment(mean, cov, indices);
  }
  throw std::invalid_argument("no closed-form increment moments for scheme '" + scheme.label + "'");
}

void write_path_csv(const std::string& file, const DiscretePath& p) {
  std::ofstream out(file);
  if (!out) throw Error("cannot open " + file + " for writing");
  out << 't';
  for (std::size_t d = 0; d < p.dim; ++d) out << ",x" << d + 1;
  out << '\n';
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    out << format_real(p.times[k]);
    for (double v : p.state(k)) out << ',' << format_real(v);
    out << '\n';
  }
  if (!out) throw Error("write failed for " + file);
}

}  // namespace sdelab
