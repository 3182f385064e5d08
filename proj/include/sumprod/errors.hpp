#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sumprod {

enum class ErrorKind {
  NonUnit,
  UniverseMismatch,
  ZeroDenominator,
  EmptyInput,
  ParamOutOfRange,
  ResourceLimit,
  BadModulus,
  DegenerateBisector,
  IsotropicLine,
  NotOnUnitCircle,
  NonUnitRadius,
  NormMismatch,
  NonUnitDistance,
  PreconditionUnmet,
  NonSquare,
  NonConvergence,
  AsymmetricConnectionSet,
  NonPositiveElement,
  ZeroElement,
  UsageError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonUnit: return "NonUnit";
    case ErrorKind::UniverseMismatch: return "UniverseMismatch";
    case ErrorKind::ZeroDenominator: return "ZeroDenominator";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorKind::ResourceLimit: return "ResourceLimit";
    case ErrorKind::BadModulus: return "BadModulus";
    case ErrorKind::DegenerateBisector: return "DegenerateBisector";
    case ErrorKind::IsotropicLine: return "IsotropicLine";
    case ErrorKind::NotOnUnitCircle: return "NotOnUnitCircle";
    case ErrorKind::NonUnitRadius: return "NonUnitRadius";
    case ErrorKind::NormMismatch: return "NormMismatch";
    case ErrorKind::NonUnitDistance: return "NonUnitDistance";
    case ErrorKind::PreconditionUnmet: return "PreconditionUnmet";
    case ErrorKind::NonSquare: return "NonSquare";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::AsymmetricConnectionSet: return "AsymmetricConnectionSet";
    case ErrorKind::NonPositiveElement: return "NonPositiveElement";
    case ErrorKind::ZeroElement: return "ZeroElement";
    case ErrorKind::UsageError: return "UsageError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

/// Work and wall-clock limits for the enumeration-heavy operations. A
/// computation estimates its tuple count up front and refuses to start when
/// the estimate exceeds max_tuples.
struct Budget {
  std::uint64_t max_tuples = std::numeric_limits<std::uint64_t>::max();
  double max_seconds = std::numeric_limits<double>::infinity();

  void check_tuples(std::uint64_t estimate, std::string_view what) const {
    if (estimate > max_tuples) {
      fail(ErrorKind::ResourceLimit, std::string(what) + " needs " + std::to_string(estimate) +
                                         " tuples, budget is " + std::to_string(max_tuples));
    }
  }
};

/// Tracks elapsed time against Budget::max_seconds.
class Deadline {
 public:
  explicit Deadline(const Budget& budget)
      : limit_(budget.max_seconds), start_(std::chrono::steady_clock::now()) {}

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void check(std::string_view stage) const {
    if (elapsed() > limit_) {
      fail(ErrorKind::ResourceLimit, "time budget exceeded during " + std::string(stage));
    }
  }

 private:
  double limit_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace sumprod
