// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/error.hpp"

namespace funnelforge {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::NearSingular: return "NearSingular";
    case ErrorCode::EmptySamples: return "EmptySamples";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::InsideObstacle: return "InsideObstacle";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::InfeasibleEndpoint: return "InfeasibleEndpoint";
    case ErrorCode::InitNotAttached: return "InitNotAttached";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnsupportedFragment: return "UnsupportedFragment";
    case ErrorCode::EmptyLiveness: return "EmptyLiveness";
    case ErrorCode::NoAcceptingRun: return "NoAcceptingRun";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SafetyViolation: return "SafetyViolation";
    case ErrorCode::Timeout: return "Timeout";
  }
  return "Unknown";
}

}  // namespace funnelforge
