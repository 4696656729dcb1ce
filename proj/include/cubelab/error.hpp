#pragma once

#include <stdexcept>
#include <string>

namespace cubelab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension out of range or mismatched between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A size cap (enumeration, naive loop, BFS closure) would be exceeded.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// The operation is not provided for this system / group type.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// Input violates a mathematical precondition (not downward-closed, theta != 0, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NotGlueable : public Error {
 public:
  explicit NotGlueable(double discrepancy)
      : Error("cubes are not glueable: max face discrepancy " + std::to_string(discrepancy)),
        max_discrepancy(discrepancy) {}
  double max_discrepancy;
};

/// Invalid experiment configuration; `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field_name, const std::string& what)
      : Error("config field '" + field_name + "': " + what), field(std::move(field_name)) {}
  std::string field;
};

}  // namespace cubelab
