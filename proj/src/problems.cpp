#include "sdelab/problems.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "sdelab/error.hpp"
#include "sdelab/moments.hpp"

namespace sdelab {

void AnalyticLaw::sample(double T, const NoiseStream& stream, std::span<double> out) const {
  std::vector<double> normals(noise_dim);
  stream.draw(NoiseKind::gaussian, 0, normals);
  transform(T, normals, out);
}

SdeProblem make_problem(std::string label, std::size_t dim, std::size_t drivers, VectorField drift,
                        std::vector<VectorField> diffusion, std::vector<double> initial) {
  if (dim == 0) throw std::invalid_argument("problem dimension must be positive");
  if (drivers == 0) throw std::invalid_argument("driver count must be positive");
  if (diffusion.size() != drivers) throw std::invalid_argument("one diffusion field per driver required");
  if (initial.size() != dim) throw std::invalid_argument("initial state has wrong length");
  if (!drift) throw std::invalid_argument("drift is empty");
  for (const auto& s : diffusion)
    if (!s) throw std::invalid_argument("diffusion field is empty");
  SdeProblem p;
  p.label = std::move(label);
  p.dim = dim;
  p.drivers = drivers;
  p.drift = std::move(drift);
  p.diffusion = std::move(diffusion);
  p.initial = std::move(initial);
  p.params = nlohmann::json{{"problem", p.label}};
  return p;
}

namespace {

VectorField affine_field(Vector offset, Matrix linear) {
  return [offset = std::move(offset), linear = std::move(linear)](std::span<const double> x,
                                                                   std::span<double> out) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
      double v = offset(static_cast<Eigen::Index>(i));
      for (std::size_t j = 0; j < n; ++j)
        v = v + linear(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * x[j];
      out[i] = v;
    }
  };
}

// Gaussian transition X(dt) = Phi x + c + N(0, Q).
struct GaussianStep {
  Matrix phi_minus_identity;
  Vector offset;
  Matrix cov;
};

using GaussianStepFn = std::function<GaussianStep(double dt)>;

struct CachedStep {
  GaussianStep step;
  Matrix factor;
};

// Per-thread memo of the last (oracle, dt) pair; oracles are called with the
// same dt for every step of a path, and the matrix exponential is not cheap.
const CachedStep& cached_step(const GaussianStepFn& fn, std::uint64_t owner, double dt) {
  thread_local std::uint64_t last_owner = 0;
  thread_local double last_dt = 0.0;
  thread_local CachedStep cache;
  if (last_owner != owner || last_dt != dt) {
    cache.step = fn(dt);
    cache.factor = psd_factor(cache.step.cov);
    last_owner = owner;
    last_dt = dt;
  }
  return cache;
}

std::uint64_t next_owner_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

// next = x + (Phi - I) x + c + F z, written out so the scalar case allocates nothing.
void gaussian_map(const CachedStep& c, std::span<const double> x, std::span<const double> z,
                  std::span<double> out) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = x[static_cast<std::size_t>(i)];
    double drift = c.step.offset(i);
    for (Eigen::Index j = 0; j < n; ++j) drift += c.step.phi_minus_identity(i, j) * x[static_cast<std::size_t>(j)];
    double noise = 0.0;
    for (Eigen::Index j = 0; j < c.factor.cols(); ++j) noise += c.factor(i, j) * z[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = v + drift + noise;
  }
}

void attach_gaussian_oracles(SdeProblem& p, GaussianStepFn step) {
  const std::size_t n = p.dim;
  const Vector x0 = Eigen::Map<const Vector>(p.initial.data(), static_cast<Eigen::Index>(n));
  const std::uint64_t owner = next_owner_id();

  auto law = std::make_shared<AnalyticLaw>();
  law->noise_dim = n;
  law->gaussian = true;
  law->mean = [step, x0](double T) {
    const GaussianStep s = step(T);
    return Vector(x0 + s.phi_minus_identity * x0 + s.offset);
  };
  law->covariance = [step](double T) { return step(T).cov; };
  law->transform = [step, owner, init = p.initial](double T, std::span<const double> normals,
                                                   std::span<double> out) {
    gaussian_map(cached_step(step, owner, T), init, normals, out);
  };
  law->moment = [step, x0](double T, std::span<const int> alpha) {
    const GaussianStep s = step(T);
    const std::vector<std::size_t> tuple = multi_index_to_tuple(alpha);
    return gaussian_product_moment(x0 + s.phi_minus_identity * x0 + s.offset, s.cov, tuple);
  };
  p.law = law;

  auto inc = std::make_shared<TrueIncrementOracle>();
  inc->noise_dim = n;
  // The covariance factor equals the dW scaling only in the scalar case.
  inc->same_noise = n == 1 && p.drivers == 1;
  inc->transition = [step, owner](std::span<const double> x, double dt, std::span<const double> normals,
                                  std::span<double> out) {
    gaussian_map(cached_step(step, owner, dt), x, normals, out);
  };
  inc->moment = [step](std::span<const double> x, double dt, std::span<const std::size_t> idx) {
    const GaussianStep s = step(dt);
    const Vector xv = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
    return gaussian_product_moment(s.phi_minus_identity * xv + s.offset, s.cov, idx);
  };
  p.increments = inc;
}

Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }
Vector scalar_vector(double v) { return Vector::Constant(1, v); }

}  // namespace

SdeProblem make_affine_problem(std::string label, AffineCoefficients c, std::vector<double> initial) {
  const std::size_t n = static_cast<std::size_t>(c.drift_offset.size());
  const std::size_t q = c.diffusion_offset.size();
  if (c.drift_linear.rows() != c.drift_offset.size() || c.drift_linear.cols() != c.drift_offset.size())
    throw std::invalid_argument("affine drift has inconsistent shape");
  if (c.diffusion_linear.size() != q) throw std::invalid_argument("affine diffusion has inconsistent shape");
  std::vector<VectorField> diffusion;
  for (std::size_t r = 0; r < q; ++r) {
    if (static_cast<std::size_t>(c.diffusion_offset[r].size()) != n ||
        static_cast<std::size_t>(c.diffusion_linear[r].rows()) != n ||
        static_cast<std::size_t>(c.diffusion_linear[r].cols()) != n)
      throw std::invalid_argument("affine diffusion has inconsistent shape");
    diffusion.push_back(affine_field(c.diffusion_offset[r], c.diffusion_linear[r]));
  }
  SdeProblem p = make_problem(std::move(label), n, q, affine_field(c.drift_offset, c.drift_linear),
                              std::move(diffusion), std::move(initial));
  p.affine = std::move(c);
  return p;
}

SdeProblem make_ou(double theta, double sigma, double x0) {
  if (!(theta > 0.0)) throw std::invalid_argument("OU requires theta > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("OU requires sigma >= 0");
  AffineCoefficients c{scalar_vector(0.0), scalar_matrix(-theta), {scalar_vector(sigma)}, {scalar_matrix(0.0)}};
  SdeProblem p = make_affine_problem("ou", std::move(c), {x0});
  p.params = {{"problem", "ou"}, {"theta", theta}, {"sigma", sigma}, {"x0", x0}};
  attach_gaussian_oracles(p, [theta, sigma](double dt) {
    return GaussianStep{scalar_matrix(std::expm1(-theta * dt)), scalar_vector(0.0),
                        scalar_matrix(sigma * sigma * -std::expm1(-2.0 * theta * dt) / (2.0 * theta))};
  });
  return p;
}

SdeProblem make_bm(double mu, double sigma, double x0) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("BM requires sigma >= 0");
  AffineCoefficients c{scalar_vector(mu), scalar_matrix(0.0), {scalar_vector(sigma)}, {scalar_matrix(0.0)}};
  SdeProblem p = make_affine_problem("bm", std::move(c), {x0});
  p.params = {{"problem", "bm"}, {"mu", mu}, {"sigma", sigma}, {"x0", x0}};
  attach_gaussian_oracles(p, [mu, sigma](double dt) {
    return GaussianStep{scalar_matrix(0.0), scalar_vector(mu * dt), scalar_matrix(sigma * sigma * dt)};
  });
  return p;
}

SdeProblem make_linear2d(const Matrix& A, const Matrix& B, const Vector& x0) {
  if (A.rows() != 2 || A.cols() != 2 || B.rows() != 2 || B.cols() != 2 || x0.size() != 2)
    throw std::invalid_argument("linear2d expects 2x2 A, 2x2 B and a 2-vector x0");
  AffineCoefficients c{Vector::Zero(2), A, {B.col(0), B.col(1)}, {Matrix::Zero(2, 2), Matrix::Zero(2, 2)}};
  SdeProblem p = make_affine_problem("linear2d", std::move(c), {x0(0), x0(1)});
  p.params = {{"problem", "linear2d"},
              {"a", {{A(0, 0), A(0, 1)}, {A(1, 0), A(1, 1)}}},
              {"b", {{B(0, 0), B(0, 1)}, {B(1, 0), B(1, 1)}}},
              {"x0", {x0(0), x0(1)}}};
  const Matrix G = B * B.transpose();
  attach_gaussian_oracles(p, [A, G](double dt) {
    // Van Loan: expm([[-A, G], [0, A^T]] dt) = [[., F12], [0, F22]], Q = F22^T F12.
    Matrix block = Matrix::Zero(4, 4);
    block.topLeftCorner(2, 2) = -A * dt;
    block.topRightCorner(2, 2) = G * dt;
    block.bottomRightCorner(2, 2) = A.transpose() * dt;
    const Matrix e = block.exp();
    const Matrix phi = e.bottomRightCorner(2, 2).transpose();
    Matrix q = phi * e.topRightCorner(2, 2);
    q = 0.5 * (q + q.transpose());
    return GaussianStep{phi - Matrix::Identity(2, 2), Vector::Zero(2), q};
  });
  return p;
}

SdeProblem make_gbm(double mu, double sigma, double x0) {
  if (!(x0 > 0.0)) throw std::invalid_argument("GBM requires x0 > 0");
  AffineCoefficients c{scalar_vector(0.0), scalar_matrix(mu), {scalar_vector(0.0)}, {scalar_matrix(sigma)}};
  SdeProblem p = make_affine_problem("gbm", std::move(c), {x0});
  p.params = {{"problem", "gbm"}, {"mu", mu}, {"sigma", sigma}, {"x0", x0}};
  const double drift = mu - 0.5 * sigma * sigma;

  auto law = std::make_shared<AnalyticLaw>();
  law->noise_dim = 1;
  law->mean = [mu, x0](double T) { return scalar_vector(x0 * std::exp(mu * T)); };
  law->covariance = [mu, sigma, x0](double T) {
    return scalar_matrix(x0 * x0 * std::exp(2.0 * mu * T) * std::expm1(sigma * sigma * T));
  };
  law->transform = [drift, sigma, x0](double T, std::span<const double> z, std::span<double> out) {
    out[0] = x0 * std::exp(drift * T + sigma * std::sqrt(T) * z[0]);
  };
  law->moment = [drift, sigma, x0](double T, std::span<const int> alpha) {
    const double k = alpha[0];
    return std::pow(x0, k) * std::exp(k * drift * T + 0.5 * k * k * sigma * sigma * T);
  };
  p.law = law;

  auto inc = std::make_shared<TrueIncrementOracle>();
  inc->noise_dim = 1;
  inc->same_noise = true;
  inc->transition = [drift, sigma](std::span<const double> x, double dt, std::span<const double> z,
                                   std::span<double> out) {
    out[0] = x[0] * std::exp(drift * dt + sigma * std::sqrt(dt) * z[0]);
  };
  inc->moment = [drift, sigma](std::span<const double> x, double dt, std::span<const std::size_t> idx) {
    // δ = x (e^Y - 1), Y ~ N(drift dt, sigma^2 dt).
    const int s = static_cast<int>(idx.size());
    const double m = drift * dt, v = sigma * sigma * dt;
    if (s == 0) return 1.0;
    if (s == 1) return x[0] * std::expm1(m + 0.5 * v);
    double total = 0.0, binom = 1.0;
    for (int k = 0; k <= s; ++k) {
      const double sign = (s - k) % 2 == 0 ? 1.0 : -1.0;
      total += sign * binom * std::exp(k * m + 0.5 * k * k * v);
      binom = binom * (s - k) / (k + 1);
    }
    return std::pow(x[0], s) * total;
  };
  p.increments = inc;
  return p;
}

Matrix diffusion_matrix(const SdeProblem& problem, std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("diffusion_matrix requires a finite state");
  const std::size_t n = problem.dim;
  Matrix b = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> s(n);
  for (std::size_t r = 0; r < problem.drivers; ++r) {
    problem.eval_diffusion(r, x, s);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += s[i] * s[j];
  }
  return b;
}

namespace {

double number_at(const nlohmann::json& spec, const std::string& key) {
  if (!spec.contains(key)) throw ConfigError(key, "missing parameter");
  if (!spec.at(key).is_number()) throw ConfigError(key, "expected a number");
  return spec.at(key).get<double>();
}

Matrix matrix_at(const nlohmann::json& spec, const std::string& key, Eigen::Index rows, Eigen::Index cols) {
  if (!spec.contains(key)) throw ConfigError(key, "missing parameter");
  const auto& m = spec.at(key);
  if (!m.is_array() || static_cast<Eigen::Index>(m.size()) != rows)
    throw ConfigError(key, "expected a " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = m.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ConfigError(key, "expected a " + std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!row.at(static_cast<std::size_t>(j)).is_number()) throw ConfigError(key, "expected numbers");
      out(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
  }
  return out;
}

void reject_unknown(const nlohmann::json& spec, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : spec.items())
    if (!allowed.count(key)) throw ConfigError(key, "unknown key");
}

}  // namespace

SdeProblem problem_from_json(const nlohmann::json& spec) {
  if (!spec.is_object()) throw ConfigError("problem", "expected an object");
  if (!spec.contains("problem") || !spec.at("problem").is_string())
    throw ConfigError("problem", "missing problem label");
  const std::string label = spec.at("problem").get<std::string>();
  try {
    if (label == "ou") {
      reject_unknown(spec, {"problem", "theta", "sigma", "x0"});
      return make_ou(number_at(spec, "theta"), number_at(spec, "sigma"), number_at(spec, "x0"));
    }
    if (label == "gbm") {
      reject_unknown(spec, {"problem", "mu", "sigma", "x0"});
      return make_gbm(number_at(spec, "mu"), number_at(spec, "sigma"), number_at(spec, "x0"));
    }
    if (label == "bm") {
      reject_unknown(spec, {"problem", "mu", "sigma", "x0"});
      return make_bm(number_at(spec, "mu"), number_at(spec, "sigma"), number_at(spec, "x0"));
    }
    if (label == "linear2d") {
      reject_unknown(spec, {"problem", "a", "b", "x0"});
      const Matrix x0 = matrix_at(nlohmann::json{{"x0", {spec.value("x0", nlohmann::json{})}}}, "x0", 1, 2);
      return make_linear2d(matrix_at(spec, "a", 2, 2), matrix_at(spec, "b", 2, 2), x0.row(0).transpose());
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("problem", e.what());
  }
  throw ConfigError("problem", "unknown problem '" + label + "'");
}

}  // namespace sdelab
