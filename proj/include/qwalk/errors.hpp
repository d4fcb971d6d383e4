#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

/// Invalid probability triple or loop specification.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation was called on an input outside its domain
/// (e.g. a stationary distribution requested for a transient walk).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Neither recurrence series resolved and no declared class was available.
class IndeterminateClassification : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical invariant failed beyond its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario file. Carries the offending field and source line
/// (0 when unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, int line, const std::string& what)
      : std::runtime_error(format(field, line, what)), field_(field), reason_(what), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, int line, const std::string& what) {
    std::string out = "config error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!field.empty()) out += " in '" + field + "'";
    return out + ": " + what;
  }

  std::string field_;
  std::string reason_;
  int line_;
};

}  // namespace qwalk
