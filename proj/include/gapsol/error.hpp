// Error type shared by every gapsol module.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gapsol {

enum class ErrorCode {
  InvalidArgument,
  InvalidGrid,
  GridMismatch,
  NonIntegerShift,
  ZeroInSpectrum,
  GapContainsZero,
  NoSpectrumAbove,
  IncompleteDecomposition,
  NegativeSquare,
  AssumptionViolated,
  SignIllegal,
  OffManifold,
  SeedDegenerate,
  ProjectionDiverged,
  CollapsedToZero,
  AllRestartsCollapsed,
  VerificationFailed,
  InvalidSweep,
  WindowTooSmall,
  InsufficientSpan,
  MixedSignChi,
  EdgeTooClose,
  ParseError,
  ValidationError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonIntegerShift: return "NonIntegerShift";
    case ErrorCode::ZeroInSpectrum: return "ZeroInSpectrum";
    case ErrorCode::GapContainsZero: return "GapContainsZero";
    case ErrorCode::NoSpectrumAbove: return "NoSpectrumAbove";
    case ErrorCode::IncompleteDecomposition: return "IncompleteDecomposition";
    case ErrorCode::NegativeSquare: return "NegativeSquare";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::SignIllegal: return "SignIllegal";
    case ErrorCode::OffManifold: return "OffManifold";
    case ErrorCode::SeedDegenerate: return "SeedDegenerate";
    case ErrorCode::ProjectionDiverged: return "ProjectionDiverged";
    case ErrorCode::CollapsedToZero: return "CollapsedToZero";
    case ErrorCode::AllRestartsCollapsed: return "AllRestartsCollapsed";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::InvalidSweep: return "InvalidSweep";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::InsufficientSpan: return "InsufficientSpan";
    case ErrorCode::MixedSignChi: return "MixedSignChi";
    case ErrorCode::EdgeTooClose: return "EdgeTooClose";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Domain refusals: the inputs describe a problem outside the solver's
/// hypotheses (as opposed to a malfunction). The CLI maps these to exit 2.
inline bool is_refusal(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroInSpectrum:
    case ErrorCode::GapContainsZero:
    case ErrorCode::AssumptionViolated:
    case ErrorCode::SignIllegal:
    case ErrorCode::MixedSignChi:
    case ErrorCode::EdgeTooClose:
    case ErrorCode::AllRestartsCollapsed:
    case ErrorCode::VerificationFailed:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {})
      : std::runtime_error(format(code, message, stage)),
        code_(code),
        stage_(std::move(stage)),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Pipeline stage that raised the error ("gap", "decompose", ...); may be empty.
  const std::string& stage() const noexcept { return stage_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same error relabelled with a pipeline stage.
  Error at_stage(std::string stage) const { return Error(code_, detail_, std::move(stage)); }

 private:
  static std::string format(ErrorCode code, const std::string& message,
                            const std::string& stage) {
    std::string out(to_string(code));
    if (!stage.empty()) out += " [stage " + stage + "]";
    out += ": ";
    out += message;
    return out;
  }

  ErrorCode code_;
  std::string stage_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

// Names used in refusal messages for the structural hypotheses.
namespace hypothesis {
inline constexpr std::string_view spectral_gap =
    "spectral-gap hypothesis (0 must not belong to the spectrum of -Laplacian+V)";
inline constexpr std::string_view defocusing_needs_spectrum_below =
    "defocusing hypothesis (the '-' equation needs spectrum of -Laplacian+V below 0; "
    "otherwise there is no nontrivial solution)";
inline constexpr std::string_view sign_definite_kerr =
    "sign-definite Kerr hypothesis (a sign-changing chi is an open problem and is not supported)";
}  // namespace hypothesis

}  // namespace gapsol
