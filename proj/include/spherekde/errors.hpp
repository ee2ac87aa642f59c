#pragma once

#include <stdexcept>
#include <string>

namespace spherekde {

/// Malformed input files (CSV points, JSON configs).
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Structurally valid but unusable configuration (unknown target, bad method
/// set, out-of-range field).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// The admissible bandwidth set is empty for the given sample size.
class GridError : public std::runtime_error {
public:
  explicit GridError(const std::string& what) : std::runtime_error(what) {}
};

/// Operation needs more observations than the sample provides.
class InsufficientDataError : public std::runtime_error {
public:
  explicit InsufficientDataError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A kernel moment integral failed to converge (non-negligible tail).
class MomentError : public std::runtime_error {
public:
  explicit MomentError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spherekde
