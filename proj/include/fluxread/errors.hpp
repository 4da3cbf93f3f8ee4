#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>

namespace fluxread {

/// Base of every error raised by the library. Anything derived from it is a
/// computation failure (CLI exit code 1) unless it is a ConfigError.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by a caller-supplied value.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Basis truncation too small for the requested levels.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& msg, double relative_shift)
      : Error(msg), relative_shift_(relative_shift) {}
  double relative_shift() const { return relative_shift_; }

 private:
  double relative_shift_;
};

/// Time or flux sampling too coarse for the dynamics being resolved.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// A qubit transition sits (or passes) on the resonator frequency, where the
/// perturbative pull is meaningless.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& msg, double flux, int from, int to)
      : Error(msg), flux_(flux), from_(from), to_(to) {}
  double flux() const { return flux_; }
  int from() const { return from_; }
  int to() const { return to_; }

 private:
  double flux_;
  int from_;
  int to_;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class InversionError : public Error {
 public:
  InversionError(const std::string& msg, double condition_number)
      : Error(msg), condition_number_(condition_number) {}
  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

/// Wraps the failure of one point of a grid scan. The original exception is
/// kept in cause() so callers can rethrow or inspect it.
class GridPointError : public Error {
 public:
  GridPointError(std::size_t index, double flux, std::exception_ptr cause,
                 const std::string& what)
      : Error("grid point " + std::to_string(index) + " (phi=" + std::to_string(flux) +
              "): " + what),
        index_(index),
        flux_(flux),
        cause_(std::move(cause)) {}
  std::size_t index() const { return index_; }
  double flux() const { return flux_; }
  std::exception_ptr cause() const { return cause_; }

 private:
  std::size_t index_;
  double flux_;
  std::exception_ptr cause_;
};

/// Invalid configuration or command-line usage (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fluxread
