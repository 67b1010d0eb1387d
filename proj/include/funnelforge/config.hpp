// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "funnelforge/bp_synth.hpp"
#include "funnelforge/bprrt.hpp"
#include "funnelforge/dynamics.hpp"
#include "funnelforge/executor.hpp"
#include "funnelforge/serialize.hpp"
#include "funnelforge/world.hpp"

namespace funnelforge::config {

struct ExecutionConfig {
  double dt = 1e-3;
  double t_max = 30.0;
  /// Defaults to epsilon / 2 when unset.
  std::optional<double> switch_level;

  executor::SimulationOptions resolve(double epsilon) const;
};

struct MissionConfig {
  std::string ltl;
  int cycles = 1;
};

struct Bundle {
  std::string description;
  dynamics::RobotModel robot;
  world::Workspace workspace;
  bp::SynthesisConfig synthesis;
  bprrt::PlannerConfig planner;
  ExecutionConfig execution;
  MissionConfig mission;

  /// Cross-block checks on top of each block's own validation. Throws
  /// ValidationError with the field path.
  void validate() const;
};

/// Throws IoError, ParseError (not JSON, empty file) or ValidationError
/// (unknown key, wrong type, broken invariant; message starts with the path).
Bundle load_config(const std::string& path);
Bundle parse_config(const io::Json& j);

/// Every field written out, defaults included; parse_config inverts it.
io::Json config_to_json(const Bundle& b);

/// FNV-1a of the canonical JSON, 16 hex digits.
std::string config_hash(const Bundle& b);

/// Command-line overrides, revalidated.
void apply_overrides(Bundle& b, std::optional<double> epsilon, std::optional<double> alpha,
                     std::optional<std::uint64_t> seed);

}  // namespace funnelforge::config
