#pragma once

#include <stdexcept>
#include <string>

namespace skiff {

/// Base for all library-specific failures. Precondition violations use
/// std::invalid_argument instead.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Step response of a model did not settle within the iteration cap.
class NonConvergentGainError : public Error {
public:
  using Error::Error;
};

/// Innovation covariance S = C P C' + R came out non-positive.
class DegenerateInnovationError : public Error {
public:
  using Error::Error;
};

/// The RLS gain matrix could not be assembled (singular or cond > 1e14).
class IllConditionedUpdateError : public Error {
public:
  using Error::Error;
};

/// Input estimate exceeded the configured divergence bound.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string& what, long step)
      : Error(what), step_(step) {}
  long step() const { return step_; }

private:
  long step_;
};

/// Fitting data carries no usable signal (flat series, zero steady state).
class DegenerateDataError : public Error {
public:
  using Error::Error;
};

/// A record lies outside the local projection's validity bound.
class OutOfProjectionError : public Error {
public:
  using Error::Error;
};

/// Degradation left fewer records than any consumer can work with.
class DegenerateRunError : public Error {
public:
  using Error::Error;
};

/// Two reports do not share a step grid and cannot be compared.
class IncompatibleReportError : public Error {
public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
  ParseError(const std::string& what, long line = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

/// Configuration failed schema validation.
class ValidationError : public Error {
public:
  using Error::Error;
};

}  // namespace skiff
