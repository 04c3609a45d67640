#pragma once

#include <stdexcept>
#include <string>

namespace tclgen {

// Malformed input; path names the offending field, e.g. "bath.omega".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// A numerical identity required by an operation does not hold, e.g.
// "trace annihilation" or "map invertibility".
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string identity, const std::string& what)
      : std::runtime_error(identity + ": " + what), identity_(std::move(identity)) {}
  const std::string& identity() const { return identity_; }

 private:
  std::string identity_;
};

}  // namespace tclgen
