#include "smc/error.hpp"

namespace smc {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidSignal: return "InvalidSignal";
    case ErrorCode::InvalidLag: return "InvalidLag";
    case ErrorCode::InvalidBandwidth: return "InvalidBandwidth";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::NonCausal: return "NonCausal";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::TooFewChannels: return "TooFewChannels";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::UnknownDesign: return "UnknownDesign";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace smc
