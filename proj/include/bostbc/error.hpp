#pragma once

#include <stdexcept>
#include <string>

namespace bostbc {

/// Failure categories surfaced by the library. The CLI maps every one of
/// these to exit code 2 (invalid input), except Internal.
enum class Errc {
  RankDeficient,
  NotUnitary,
  UnsupportedSize,
  PremiseViolated,
  InvalidPermutation,
  TooFewReceiveAntennas,
  InvalidProfile,
  NotUpperTriangular,
  TooLarge,
  Overflow,
  DimensionMismatch,
  InvalidConfig,
  Parse,
  Internal,
};

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::RankDeficient: return "rank deficient";
    case Errc::NotUnitary: return "not unitary";
    case Errc::UnsupportedSize: return "unsupported size";
    case Errc::PremiseViolated: return "premise violated";
    case Errc::InvalidPermutation: return "invalid permutation";
    case Errc::TooFewReceiveAntennas: return "too few receive antennas";
    case Errc::InvalidProfile: return "invalid profile";
    case Errc::NotUpperTriangular: return "not upper triangular";
    case Errc::TooLarge: return "too large";
    case Errc::Overflow: return "overflow";
    case Errc::DimensionMismatch: return "dimension mismatch";
    case Errc::InvalidConfig: return "invalid config";
    case Errc::Parse: return "parse error";
    case Errc::Internal: return "internal error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace bostbc
