#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qte {

enum class ErrorKind {
  EmptyArm,
  NonFinite,
  BadIndicator,
  BadQuantile,
  TooFewPoints,
  DegenerateScale,
  DegenerateDensity,
  DegenerateInfo,
  BadTrim,
  BadParams,
  BadLaw,
  AllTruncated,
  NoBracket,
  NoSolution,
  MissingVariance,
  ResampleFailure,
  NonIntegrable,
  BadConfig,
};

std::string_view error_name(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the ErrorKind tags;
/// the CLI reports the tag name verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& detail);

}  // namespace qte
