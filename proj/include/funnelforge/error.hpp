// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <stdexcept>
#include <string>

namespace funnelforge {

enum class ErrorCode {
  Unsupported,
  Unreachable,
  NearSingular,
  EmptySamples,
  DimensionMismatch,
  Infeasible,
  MaxIterations,
  InsideObstacle,
  DegenerateDirection,
  InfeasibleEndpoint,
  InitNotAttached,
  SyntaxError,
  UnsupportedFragment,
  EmptyLiveness,
  NoAcceptingRun,
  ParseError,
  ValidationError,
  ConfigError,
  IoError,
  SafetyViolation,
  Timeout,
};

const char* to_string(ErrorCode code);

// All library failures carry a code so callers (the planner, the CLI) can
// branch on recoverable signals such as Infeasible without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace funnelforge
