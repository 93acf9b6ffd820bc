#include "qte/errors.hpp"

namespace qte {

std::string_view error_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyArm: return "EmptyArm";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::BadIndicator: return "BadIndicator";
    case ErrorKind::BadQuantile: return "BadQuantile";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::DegenerateScale: return "DegenerateScale";
    case ErrorKind::DegenerateDensity: return "DegenerateDensity";
    case ErrorKind::DegenerateInfo: return "DegenerateInfo";
    case ErrorKind::BadTrim: return "BadTrim";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::BadLaw: return "BadLaw";
    case ErrorKind::AllTruncated: return "AllTruncated";
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::NoSolution: return "NoSolution";
    case ErrorKind::MissingVariance: return "MissingVariance";
    case ErrorKind::ResampleFailure: return "ResampleFailure";
    case ErrorKind::NonIntegrable: return "NonIntegrable";
    case ErrorKind::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& detail) { throw Error(kind, detail); }

}  // namespace qte
