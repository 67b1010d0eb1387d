// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/executor.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>

#include "funnelforge/error.hpp"
#include "funnelforge/log.hpp"

namespace funnelforge::executor {

using dynamics::JointState;
using Eigen::VectorXd;

JointState rk4_step(const dynamics::RobotModel& model, const JointState& s, const VectorXd& u, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::ValidationError, "rk4_step: dt must be positive");
  auto f = [&](const JointState& x) { return dynamics::dynamics_rhs(model, x, u); };
  auto shifted = [](const JointState& x, const dynamics::StateDerivative& k, double h) {
    return JointState{x.q + h * k.qdot, x.qdot + h * k.qddot};
  };
  const auto k1 = f(s);
  const auto k2 = f(shifted(s, k1, dt / 2));
  const auto k3 = f(shifted(s, k2, dt / 2));
  const auto k4 = f(shifted(s, k3, dt));
  return {s.q + dt / 6.0 * (k1.qdot + 2 * k2.qdot + 2 * k3.qdot + k4.qdot),
          s.qdot + dt / 6.0 * (k1.qddot + 2 * k2.qddot + 2 * k3.qddot + k4.qddot)};
}

void Trace::check() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::ValidationError, "trace: " + why); };
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double step = samples[i].t - samples[i - 1].t;
    if (!(step > 0.0) || std::abs(step - dt) > 1e-9 * std::max(1.0, samples[i].t)) {
      fail("sample " + std::to_string(i) + " breaks the fixed time step");
    }
    if (samples[i].active < samples[i - 1].active) fail("active index decreases at sample " + std::to_string(i));
  }
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "Success";
    case Outcome::Timeout: return "Timeout";
    case Outcome::SafetyViolation: return "SafetyViolation";
  }
  return "?";
}

Outcome outcome_from_string(const std::string& s) {
  for (Outcome o : {Outcome::Success, Outcome::Timeout, Outcome::SafetyViolation}) {
    if (s == to_string(o)) return o;
  }
  throw Error(ErrorCode::ParseError, "unknown outcome '" + s + "'");
}

void LegResult::require_success() const {
  if (outcome == Outcome::SafetyViolation) {
    throw Error(ErrorCode::SafetyViolation, "leg to '" + goal + "' entered a forbidden region");
  }
  if (outcome == Outcome::Timeout) throw Error(ErrorCode::Timeout, "leg to '" + goal + "' did not arrive in time");
}

LegResult simulate_chain(const dynamics::RobotModel& model, const std::vector<bp::BarrierPair>& chain,
                         const JointState& initial, const std::string& goal_region,
                         const world::Workspace& workspace, const SimulationOptions& options) {
  if (chain.empty()) throw Error(ErrorCode::ValidationError, "simulate_chain: empty chain");
  if (!(options.dt > 0.0) || !(options.t_max > 0.0)) {
    throw Error(ErrorCode::ValidationError, "simulate_chain: dt and t_max must be positive");
  }
  if (!workspace.has_region(goal_region)) {
    throw Error(ErrorCode::ValidationError, "simulate_chain: unknown goal region '" + goal_region + "'");
  }
  const double b0 = bp::barrier_value(chain.front(), initial);
  if (b0 > 0.0) {
    throw Error(ErrorCode::ValidationError,
                "simulate_chain: initial state has barrier " + std::to_string(b0) + " > 0 on the first pair");
  }

  std::set<std::string> forbidden;
  const world::Labeling start_labels = world::label(workspace, dynamics::forward_kinematics(model, initial.q));
  for (const auto& r : workspace.regions) {
    const std::string& name = r.polytope.name();
    if (name == goal_region) continue;
    if (r.role == world::RegionRole::Task && start_labels.has(name)) continue;
    forbidden.insert(name);
  }

  LegResult out;
  out.goal = goal_region;
  out.trace.dt = options.dt;
  out.max_active_barrier = -std::numeric_limits<double>::infinity();
  const VectorXd& ubar = model.torque_limits;
  const auto steps = static_cast<long>(std::ceil(options.t_max / options.dt - 1e-9));

  JointState s = initial;
  int active = 0;
  const int last = static_cast<int>(chain.size()) - 1;
  for (long k = 0;; ++k) {
    while (active < last && bp::barrier_value(chain[static_cast<std::size_t>(active + 1)], s) <= options.switch_level) {
      ++active;
      log::debug("simulate_chain: t = ", k * options.dt, " switched to pair ", active);
    }
    TraceSample smp;
    smp.t = static_cast<double>(k) * options.dt;
    smp.q = s.q;
    smp.qdot = s.qdot;
    smp.x = dynamics::forward_kinematics(model, s.q);
    smp.active = active;
    smp.barrier_active = bp::barrier_value(chain[static_cast<std::size_t>(active)], s);
    if (active < last) smp.barrier_next = bp::barrier_value(chain[static_cast<std::size_t>(active + 1)], s);
    const world::Labeling lab = world::label(workspace, smp.x);
    smp.labels = lab.labels;

    VectorXd u = bp::controller_output(chain[static_cast<std::size_t>(active)], s);
    bool clamped = false;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (std::abs(u[i]) > ubar[i]) {
        u[i] = std::clamp(u[i], -ubar[i], ubar[i]);
        clamped = true;
      }
    }
    smp.u = u;
    out.torque_clamps += clamped ? 1 : 0;
    out.max_active_barrier = std::max(out.max_active_barrier, smp.barrier_active);
    const bool hit = std::any_of(smp.labels.begin(), smp.labels.end(),
                                 [&](const std::string& l) { return forbidden.contains(l); });
    const bool arrived = lab.has(goal_region);
    out.trace.samples.push_back(std::move(smp));
    out.final_state = s;
    out.final_active = active;

    if (hit) {
      ++out.obstacle_samples;
      out.outcome = Outcome::SafetyViolation;
      log::warn("simulate_chain: forbidden region at t = ", k * options.dt);
      return out;
    }
    if (arrived) {
      out.outcome = Outcome::Success;
      return out;
    }
    if (k >= steps) {
      out.outcome = Outcome::Timeout;
      return out;
    }
    s = rk4_step(model, s, u, options.dt);
  }
}

MissionReport run_mission(const dynamics::RobotModel& model, const std::vector<logic::TransitionRequest>& requests,
                          const std::vector<std::vector<bp::BarrierPair>>& chains, const JointState& initial,
                          const world::Workspace& workspace, const SimulationOptions& options, int cycles) {
  if (chains.size() != requests.size()) {
    throw Error(ErrorCode::ConfigError, "run_mission: " + std::to_string(requests.size()) + " requests but " +
                                            std::to_string(chains.size()) + " chains");
  }
  for (std::size_t i = 0; i < chains.size(); ++i) {
    if (chains[i].empty()) {
      throw Error(ErrorCode::ConfigError,
                  "run_mission: no chain for '" + requests[i].from + "' -> '" + requests[i].to + "'");
    }
  }
  MissionReport report;
  report.requests = requests;
  JointState state = initial;
  std::vector<bp::BarrierPair> carried;
  for (int c = 0; c < cycles; ++c) {
    for (std::size_t i = 0; i < requests.size(); ++i) {
      std::vector<bp::BarrierPair> chain = carried;
      chain.insert(chain.end(), chains[i].begin(), chains[i].end());
      LegResult leg = simulate_chain(model, chain, state, requests[i].to, workspace, options);
      log::info("run_mission: cycle ", c, " leg ", requests[i].from, " -> ", requests[i].to, ": ",
                to_string(leg.outcome), " after ", leg.trace.samples.size(), " samples");
      const bool ok = leg.outcome == Outcome::Success;
      state = leg.final_state;
      carried.assign(chain.begin() + leg.final_active, chain.end());
      report.legs.push_back(std::move(leg));
      if (!ok) return report;
    }
  }
  report.success = true;
  return report;
}

LabelProjection project_labels(const std::vector<const Trace*>& traces) {
  LabelProjection p;
  std::size_t index = 0;
  for (const Trace* t : traces) {
    for (const auto& s : t->samples) {
      if (p.word.empty() || p.word.back() != s.labels) {
        p.word.push_back(s.labels);
        p.first_sample.push_back(index);
      }
      ++index;
    }
  }
  return p;
}

TraceVerdict validate_trace(const std::vector<const Trace*>& traces, const logic::BuchiAutomaton& automaton,
                            bool from_any_state) {
  const LabelProjection p = project_labels(traces);
  std::vector<int> start;
  if (from_any_state) {
    for (int s = 0; s < static_cast<int>(automaton.states.size()); ++s) start.push_back(s);
  }
  const logic::ReplayVerdict r = logic::replay(automaton, p.word, start);
  TraceVerdict v;
  v.accepted_prefix = r.accepted_prefix;
  v.divergence = r.divergence;
  if (r.divergence) v.divergence_sample = p.first_sample[*r.divergence];
  v.word = p.word;
  return v;
}

TraceVerdict validate_trace(const Trace& trace, const logic::BuchiAutomaton& automaton, bool from_any_state) {
  return validate_trace(std::vector<const Trace*>{&trace}, automaton, from_any_state);
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  const int n = trace.samples.empty() ? 0 : static_cast<int>(trace.samples.front().q.size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",q" << i;
  for (int i = 1; i <= n; ++i) out << ",qdot" << i;
  for (int i = 1; i <= n; ++i) out << ",u" << i;
  out << ",x,y,active,barrier_active,barrier_next,labels\n";
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::setprecision(17);
  for (const auto& s : trace.samples) {
    out << s.t;
    for (int i = 0; i < n; ++i) out << ',' << s.q[i];
    for (int i = 0; i < n; ++i) out << ',' << s.qdot[i];
    for (int i = 0; i < n; ++i) out << ',' << s.u[i];
    out << ',' << s.x.x() << ',' << s.x.y() << ',' << s.active << ',' << s.barrier_active << ',';
    if (s.barrier_next) out << *s.barrier_next;
    out << ',';
    bool first = true;
    for (const auto& l : s.labels) {
      out << (first ? "" : "|") << l;
      first = false;
    }
    out << '\n';
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace funnelforge::executor
