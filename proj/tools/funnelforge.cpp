// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "funnelforge/app.hpp"

namespace app = funnelforge::app;

namespace {

void common_flags(CLI::App* cmd, app::Options& opt, bool config_required = true) {
  auto* c = cmd->add_option("--config", opt.config, "Configuration JSON");
  if (config_required) c->required();
  cmd->add_option("--out", opt.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", opt.seed, "Planner and sampling seed (overrides planner.seed)");
  cmd->add_option("--eps", opt.epsilon, "Barrier hand-off level epsilon in (-1, 0]");
  cmd->add_option("--alpha", opt.alpha, "Barrier decay rate alpha > 0");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"funnelforge: barrier-pair funnels, BP-RRT planning and patrol execution for planar arms"};
  cli.require_subcommand(1);
  app::Options opt;

  std::string region;
  auto* synth = cli.add_subcommand("synth", "Synthesize a barrier pair at a region's center");
  common_flags(synth, opt);
  synth->add_option("--region", region, "Region name")->required();

  std::string from, to;
  auto* plan = cli.add_subcommand("plan", "Grow a BP-RRT between two regions and extract the chain");
  common_flags(plan, opt);
  plan->add_option("--from", from, "Start region")->required();
  plan->add_option("--to", to, "Goal region")->required();

  auto* run = cli.add_subcommand("run", "Plan and simulate the configured patrol mission");
  common_flags(run, opt);

  std::string chain_file, goal;
  std::optional<std::string> sim_from;
  auto* simulate = cli.add_subcommand("simulate", "Simulate a stored chain until the goal region is reached");
  common_flags(simulate, opt);
  simulate->add_option("--chain", chain_file, "Chain JSON written by plan or run")->required();
  simulate->add_option("--goal", goal, "Goal region")->required();
  simulate->add_option("--from", sim_from, "Start region (default: region of the first pair)");

  std::vector<std::string> files;
  auto* check = cli.add_subcommand("check", "Replay and validate artifacts");
  common_flags(check, opt, false);
  check->add_option("files", files, "Artifact JSON files")->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::kConfigError;
  }

  if (*synth) return app::cmd_synth(opt, region, std::cerr);
  if (*plan) return app::cmd_plan(opt, from, to, std::cerr);
  if (*run) return app::cmd_run(opt, std::cerr);
  if (*simulate) return app::cmd_simulate(opt, chain_file, goal, sim_from, std::cerr);
  if (*check) return app::cmd_check(opt, files, std::cerr);
  return app::kConfigError;
}
