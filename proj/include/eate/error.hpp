#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eate {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  IndexOutOfRange(std::size_t index, std::size_t size)
      : Error("unit index " + std::to_string(index) + " out of range for n = " +
              std::to_string(size)) {}
};

/// Raised when an exact computation would need more support points (or
/// subsets, or cost entries) than the caller allowed.
class SupportTooLarge : public Error {
 public:
  SupportTooLarge(double actual, double limit)
      : Error("support too large: " + std::to_string(actual) + " > limit " +
              std::to_string(limit)),
        actual_(actual),
        limit_(limit) {}
  double actual() const noexcept { return actual_; }
  double limit() const noexcept { return limit_; }

 private:
  double actual_;
  double limit_;
};

class TooLargeForExactDetection : public Error {
 public:
  using Error::Error;
};

class ProblemTooLarge : public Error {
 public:
  using Error::Error;
};

/// The Hajek estimator is 0/0 when an arm is empty.
class DegenerateAssignment : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  explicit NotConverged(long max_iter)
      : Error("power iteration did not converge within " + std::to_string(max_iter) +
              " iterations"),
        max_iter_(max_iter) {}
  long max_iter() const noexcept { return max_iter_; }

 private:
  long max_iter_;
};

/// Input file error anchored to a 1-based line number (0 when unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace eate
