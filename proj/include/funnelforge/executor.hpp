// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "funnelforge/bp_synth.hpp"
#include "funnelforge/dynamics.hpp"
#include "funnelforge/logic.hpp"
#include "funnelforge/world.hpp"

namespace funnelforge::executor {

/// Classical RK4 of the arm dynamics with u held over the step.
dynamics::JointState rk4_step(const dynamics::RobotModel& model, const dynamics::JointState& state,
                              const Eigen::VectorXd& u, double dt);

struct TraceSample {
  double t = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd qdot;
  Eigen::VectorXd u;  // applied (post-clamp) torque
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  int active = 0;
  double barrier_active = 0.0;
  std::optional<double> barrier_next;  // absent on the last pair of the chain
  logic::Label labels;

  bool operator==(const TraceSample&) const = default;
};

struct Trace {
  double dt = 1e-3;
  std::vector<TraceSample> samples;

  /// Throws ValidationError unless times advance by dt and active never decreases.
  void check() const;

  bool operator==(const Trace&) const = default;
};

enum class Outcome { Success, Timeout, SafetyViolation };

const char* to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct SimulationOptions {
  double dt = 1e-3;
  double t_max = 30.0;
  /// Hand off to pair i + 1 once its barrier drops to this level.
  double switch_level = -0.1;
};

struct LegResult {
  std::string goal;
  Outcome outcome = Outcome::Timeout;
  Trace trace;
  int torque_clamps = 0;          // samples where any joint torque was clamped
  int obstacle_samples = 0;       // samples labeled with a forbidden region
  double max_active_barrier = 0.0;
  dynamics::JointState final_state;
  int final_active = 0;

  /// Throws SafetyViolation or Timeout for the corresponding outcomes.
  void require_success() const;
};

/// Runs the chain from `initial` until the end effector lies in `goal_region`.
/// Forbidden regions: every obstacle and base region, and every task region
/// other than the goal and those containing the initial end-effector position.
/// Throws ValidationError when `initial` is outside the first pair's funnel or
/// the chain is empty.
LegResult simulate_chain(const dynamics::RobotModel& model, const std::vector<bp::BarrierPair>& chain,
                         const dynamics::JointState& initial, const std::string& goal_region,
                         const world::Workspace& workspace, const SimulationOptions& options = {});

struct MissionReport {
  std::vector<logic::TransitionRequest> requests;
  std::vector<LegResult> legs;  // cycles * requests.size() on success
  bool success = false;
};

/// Executes the requests in order for `cycles` rounds, each leg starting from
/// the previous leg's final state. A leg runs the unfinished tail of the
/// previous leg's chain followed by its own chain, so the hand-off at a shared
/// region passes through the previous goal funnel. Stops at the first failed
/// leg. Throws ConfigError when chains and requests differ in count or a chain
/// is empty.
MissionReport run_mission(const dynamics::RobotModel& model, const std::vector<logic::TransitionRequest>& requests,
                          const std::vector<std::vector<bp::BarrierPair>>& chains,
                          const dynamics::JointState& initial, const world::Workspace& workspace,
                          const SimulationOptions& options = {}, int cycles = 1);

/// Labels with consecutive repeats merged, with the first sample index of each.
struct LabelProjection {
  std::vector<logic::Label> word;
  std::vector<std::size_t> first_sample;
};

LabelProjection project_labels(const std::vector<const Trace*>& traces);

struct TraceVerdict {
  bool accepted_prefix = true;
  std::optional<std::size_t> divergence;         // index into the projected word
  std::optional<std::size_t> divergence_sample;  // sample index where it happens
  std::vector<logic::Label> word;
};

/// Replays the projected labels of one or more consecutive traces against the
/// automaton, starting from its initial states or from every state when
/// `from_any_state` (for legs that start mid-run).
TraceVerdict validate_trace(const std::vector<const Trace*>& traces, const logic::BuchiAutomaton& automaton,
                            bool from_any_state = false);
TraceVerdict validate_trace(const Trace& trace, const logic::BuchiAutomaton& automaton, bool from_any_state = false);

/// Header row then one row per sample; labels joined by '|'.
void write_trace_csv(const Trace& trace, std::ostream& out);

}  // namespace funnelforge::executor
