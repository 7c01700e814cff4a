#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdelab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trajectory produced a non-finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t trajectory, std::size_t step)
      : Error("non-finite state in trajectory " + std::to_string(trajectory) +
              " at step " + std::to_string(step)),
        trajectory_(trajectory),
        step_(step) {}

  std::size_t trajectory() const noexcept { return trajectory_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t trajectory_;
  std::size_t step_;
};

/// Malformed or unknown configuration entry; names the key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace sdelab
