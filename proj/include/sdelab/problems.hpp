#pragma once

// SDE test problems dX = a(X) dt + sum_r sigma_r(X) dW_r and exact oracles
// for the catalog ones.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "sdelab/noise.hpp"

namespace sdelab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// x in R^n -> out in R^n. Must be pure.
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;

/// a(x) = a0 + A x, sigma_r(x) = s_r + S_r x. Evaluation order is fixed:
/// start from the offset, add the linear terms column by column.
struct AffineCoefficients {
  Vector drift_offset;
  Matrix drift_linear;
  std::vector<Vector> diffusion_offset;
  std::vector<Matrix> diffusion_linear;
};

/// Exact law of X(T) for a catalog problem.
struct AnalyticLaw {
  std::function<Vector(double T)> mean;
  std::function<Matrix(double T)> covariance;
  /// Number of standard normals consumed by one exact draw.
  std::size_t noise_dim = 0;
  /// Maps standard normals to a draw of X(T).
  std::function<void(double T, std::span<const double> normals, std::span<double> out)> transform;
  /// E prod_i X_i(T)^{alpha_i}; exact at least through total order 4.
  std::function<double(double T, std::span<const int> multi_index)> moment;
  /// X(T) is Gaussian with the stated mean and covariance.
  bool gaussian = false;

  /// One draw of X(T) from stream step 0.
  void sample(double T, const NoiseStream& stream, std::span<double> out) const;
};

/// Exact one-step transition of a catalog problem, δ(x, dt) = X(dt) - x.
struct TrueIncrementOracle {
  /// Number of standard normals driving one transition. When equal to the
  /// driver count, the normals play the role of dW / sqrt(dt), which couples
  /// the exact transition to an Euler step on the same noise.
  std::size_t noise_dim = 0;
  bool same_noise = false;
  /// out = X(dt) given X(0) = x.
  std::function<void(std::span<const double> x, double dt, std::span<const double> normals,
                     std::span<double> out)>
      transition;
  /// E prod_j δ_{i_j}(x, dt) in closed form (tuple length <= 4).
  std::function<double(std::span<const double> x, double dt, std::span<const std::size_t> indices)>
      moment;
};

struct SdeProblem {
  std::string label;
  std::size_t dim = 0;
  std::size_t drivers = 0;
  VectorField drift;
  std::vector<VectorField> diffusion;
  std::vector<double> initial;
  std::optional<AffineCoefficients> affine;
  std::shared_ptr<const AnalyticLaw> law;
  std::shared_ptr<const TrueIncrementOracle> increments;
  /// Flat parameter record used by configs ({"problem": label, ...}).
  nlohmann::json params;

  bool has_law() const noexcept { return law != nullptr; }

  void eval_drift(std::span<const double> x, std::span<double> out) const { drift(x, out); }
  void eval_diffusion(std::size_t r, std::span<const double> x, std::span<double> out) const {
    diffusion[r](x, out);
  }
};

/// General problem from user-supplied fields; no oracles attached.
SdeProblem make_problem(std::string label, std::size_t dim, std::size_t drivers, VectorField drift,
                        std::vector<VectorField> diffusion, std::vector<double> initial);

/// Problem whose coefficients are affine; no oracles attached.
SdeProblem make_affine_problem(std::string label, AffineCoefficients coefficients,
                               std::vector<double> initial);

/// Ornstein-Uhlenbeck dX = -theta X dt + sigma dW.
SdeProblem make_ou(double theta, double sigma, double x0);

/// Geometric Brownian motion dX = mu X dt + sigma X dW.
SdeProblem make_gbm(double mu, double sigma, double x0);

/// Brownian motion with drift dX = mu dt + sigma dW.
SdeProblem make_bm(double mu, double sigma, double x0);

/// Linear system dX = A X dt + B dW with additive noise (B is n x q, here 2 x 2).
SdeProblem make_linear2d(const Matrix& A, const Matrix& B, const Vector& x0);

/// b(x) = sum_r sigma_r(x) sigma_r(x)^T.
Matrix diffusion_matrix(const SdeProblem& problem, std::span<const double> x);

/// Builds a catalog problem from {"problem": "ou", "theta": 1, ...}.
/// Unknown keys and missing parameters raise ConfigError.
SdeProblem problem_from_json(const nlohmann::json& spec);

}  // namespace sdelab
