// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "funnelforge/error.hpp"

// The subcommands behind the funnelforge executable. Each writes its
// artifacts plus one manifest.json into `out` and returns a process exit code.
namespace funnelforge::app {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,      // bad arguments, config, IO, malformed artifacts
  kInfeasible = 2,       // synthesis has no certified barrier pair
  kPlanningFailed = 3,   // BP-RRT ran out of iterations
  kUnsupported = 4,      // mission formula outside the patrol fragment
  kMissionFailed = 5,    // simulated execution left the specification
  kCheckFailed = 6,      // an artifact failed replay validation
};

/// Exit code for a library error raised by any command.
int exit_code_for(ErrorCode code);

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<double> alpha;
};

int cmd_synth(const Options& opt, const std::string& region, std::ostream& log);
int cmd_plan(const Options& opt, const std::string& from, const std::string& to, std::ostream& log);
int cmd_run(const Options& opt, std::ostream& log);
/// Simulates a stored chain from a seeded rest state in `from` (default: the
/// task region holding the first pair's equilibrium) until `goal` is reached.
int cmd_simulate(const Options& opt, const std::string& chain_file, const std::string& goal,
                 const std::optional<std::string>& from, std::ostream& log);
/// Replays artifacts by their "kind"; `opt.config` is optional and enables
/// the checks that need the mission or workspace.
int cmd_check(const Options& opt, const std::vector<std::string>& files, std::ostream& log);

}  // namespace funnelforge::app
