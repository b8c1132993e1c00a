#pragma once

#include <stdexcept>
#include <string>

namespace wattops {

// Bad model/config values (domain errors, inconsistent settings).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or schema-violating scenario input.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Provisioning problem has no feasible answer under the given constraints.
struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wattops
