#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ictmdp {

/// Base class for all library failures that callers are expected to handle.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::string field, std::size_t line, const std::string& what)
      : Error(format(field, line, what)), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, std::size_t line,
                            const std::string& what) {
    std::string out = "parse error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!field.empty()) out += " in field '" + field + "'";
    return out + ": " + what;
  }

  std::string field_;
  std::size_t line_;
};

/// The model (or epidemic parameter set) breaks one of its declared invariants.
class InvalidModelError : public Error {
 public:
  InvalidModelError(const std::string& what, std::vector<std::string> details = {})
      : Error(what), details_(std::move(details)) {}

  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  std::vector<std::string> details_;
};

/// An iterative scheme hit its iteration cap before meeting its tolerance.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> last_iterate,
                      double last_step, std::size_t iterations)
      : Error(what),
        last_iterate_(std::move(last_iterate)),
        last_step_(last_step),
        iterations_(iterations) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  double last_step() const noexcept { return last_step_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::vector<double> last_iterate_;
  double last_step_;
  std::size_t iterations_;
};

/// An impulse chain failed to reach a gradual state.
class ImproperChainError : public Error {
 public:
  ImproperChainError(const std::string& what, std::size_t witness_state)
      : Error(what), witness_(witness_state) {}

  std::size_t witness_state() const noexcept { return witness_; }

 private:
  std::size_t witness_;
};

/// Unknown (state, action) pair.
class KeyError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Arguments outside the domain of a function (e.g. a state outside the box).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace ictmdp
