#pragma once

#include <stdexcept>
#include <string>

namespace lao {

// Malformed input files or malformed model output.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid input that violates a domain invariant.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Completion backend failures. `uncached` distinguishes a replay miss
// (the request hash is absent from the store) from transport problems.
class GatewayError : public std::runtime_error {
public:
  GatewayError(const std::string& what, bool uncached = false)
      : std::runtime_error(what), uncached_(uncached) {}
  bool uncached() const { return uncached_; }

private:
  bool uncached_ = false;
};

class ScoringError : public std::runtime_error {
public:
  explicit ScoringError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace lao
