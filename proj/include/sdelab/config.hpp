#pragma once

// Experiment configuration files (JSON objects).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace sdelab {

struct XGrid {
  double lo = -2.0;
  double hi = 2.0;
  std::size_t count = 41;

  std::vector<double> points() const;
  bool operator==(const XGrid&) const = default;
};

struct ExperimentConfig {
  std::string command;
  /// Catalog problem, e.g. {"problem": "ou", "theta": 1, "sigma": 1, "x0": 1}.
  nlohmann::json problem = nlohmann::json::object();
  std::string scheme = "weak_em";
  /// Test function spec for weak-error experiments.
  nlohmann::json function = nlohmann::json::object();
  /// Dictionary for beta; empty means the default dictionary.
  nlohmann::json dictionary = nlohmann::json::array();
  /// Mollified indicator spec for mollify.
  nlohmann::json mollifier = nlohmann::json::object();
  std::string metric = "prokhorov";
  std::vector<double> dt;
  double T = 1.0;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::size_t budget = 2000;
  std::size_t reference_draws = 10'000'000;
  std::vector<double> x;
  XGrid x_grid;
  std::vector<double> eps;
  int s = 1;
  int order = 1;
  std::optional<double> alpha;
  std::optional<std::vector<double>> band;
  std::vector<std::string> inputs;
  std::string out;
  unsigned workers = 0;

  nlohmann::json to_json() const;
  /// Rejects unknown keys and wrong types with ConfigError naming the key.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  void save(const std::string& path) const;
};

/// Parses "0.25,0.125" or "2^-2..2^-6" (every power of two in between).
std::vector<double> parse_real_list(const std::string& text);

}  // namespace sdelab
