#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ivr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a fresh node would push the table past its node limit.
/// The phase is filled in by whichever construction step was running.
class NodeLimitExceeded : public Error {
 public:
  explicit NodeLimitExceeded(std::size_t limit, std::string phase = {})
      : Error("node limit of " + std::to_string(limit) + " exceeded" +
              (phase.empty() ? "" : " during " + phase)),
        limit_(limit),
        phase_(std::move(phase)) {}

  std::size_t limit() const { return limit_; }
  const std::string& phase() const { return phase_; }

 private:
  std::size_t limit_;
  std::string phase_;
};

class TimeBudgetExceeded : public Error {
 public:
  explicit TimeBudgetExceeded(std::string phase = {})
      : Error("time budget exceeded" +
              (phase.empty() ? std::string() : " during " + phase)),
        phase_(std::move(phase)) {}

  const std::string& phase() const { return phase_; }

 private:
  std::string phase_;
};

class KindMismatch : public Error {
 public:
  using Error::Error;
};

class SupportViolation : public Error {
 public:
  using Error::Error;
};

class IncompleteAssignment : public Error {
 public:
  using Error::Error;
};

/// Syntax error in program text, with 1-based position.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& msg)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Semantic problems in a parsed program (duplicates, types, probabilities).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

class ExplicitBoundExceeded : public Error {
 public:
  explicit ExplicitBoundExceeded(std::size_t bound)
      : Error("explicit state bound of " + std::to_string(bound) + " exceeded") {}
};

class OutOfDomainUpdate : public Error {
 public:
  using Error::Error;
};

class OverlappingGuards : public Error {
 public:
  using Error::Error;
};

class EmptyInit : public Error {
 public:
  EmptyInit() : Error("init expression is unsatisfiable") {}
};

}  // namespace ivr
