#include "treemax/error.hpp"

namespace treemax {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RejectedModel: return "RejectedModel";
    case ErrorCode::NonFiniteMoment: return "NonFiniteMoment";
    case ErrorCode::NoIncreasingRoot: return "NoIncreasingRoot";
    case ErrorCode::AmbiguousRoot: return "AmbiguousRoot";
    case ErrorCode::NoContractiveBeta: return "NoContractiveBeta";
    case ErrorCode::UnusableProfile: return "UnusableProfile";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::ReplicaFailed: return "ReplicaFailed";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::DegenerateTail: return "DegenerateTail";
    case ErrorCode::NegativeBeyondCI: return "NegativeBeyondCI";
    case ErrorCode::CertificateFailed: return "CertificateFailed";
    case ErrorCode::UnsupportedDependence: return "UnsupportedDependence";
    case ErrorCode::DegenerateSymmetrization: return "DegenerateSymmetrization";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingArtifacts: return "MissingArtifacts";
  }
  return "Unknown";
}

}  // namespace treemax
