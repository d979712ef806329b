#pragma once

#include <stdexcept>
#include <string>

namespace nse {

// Error category drives the CLI exit code: usage -> 1, data -> 2, numeric -> 3.
enum class ErrorCategory { usage, data, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory cat, std::string msg)
      : std::runtime_error(std::move(msg)), category_(cat) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

// Bad value passed by the caller (edge >= Nyquist, negative q, ...).
struct InvalidParameterError : Error {
  explicit InvalidParameterError(const std::string& msg) : Error(ErrorCategory::data, msg) {}
};

// Input does not satisfy a structural precondition (index range, shape, ...).
struct OutOfRangeError : Error {
  explicit OutOfRangeError(const std::string& msg) : Error(ErrorCategory::data, msg) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(ErrorCategory::data, msg) {}
};

struct LengthError : Error {
  explicit LengthError(const std::string& msg) : Error(ErrorCategory::data, msg) {}
};

struct AlignmentError : Error {
  explicit AlignmentError(const std::string& msg) : Error(ErrorCategory::data, msg) {}
};

struct InsufficientDataError : Error {
  explicit InsufficientDataError(const std::string& msg) : Error(ErrorCategory::data, msg) {}
};

struct CoverageError : Error {
  explicit CoverageError(const std::string& msg) : Error(ErrorCategory::data, msg) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error(ErrorCategory::data, msg) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error(ErrorCategory::data, msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(ErrorCategory::data, msg) {}
};

struct DegenerateInputError : Error {
  explicit DegenerateInputError(const std::string& msg) : Error(ErrorCategory::data, msg) {}
};

// Numerical failures.
struct DesignFailureError : Error {
  explicit DesignFailureError(const std::string& msg) : Error(ErrorCategory::numeric, msg) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& msg) : Error(ErrorCategory::numeric, msg) {}
};

struct DecompositionError : Error {
  explicit DecompositionError(const std::string& msg) : Error(ErrorCategory::numeric, msg) {}
};

struct RankError : Error {
  explicit RankError(const std::string& msg) : Error(ErrorCategory::numeric, msg) {}
};

}  // namespace nse
