// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/app.hpp"

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <set>
#include <sstream>

#include "funnelforge/bprrt.hpp"
#include "funnelforge/config.hpp"
#include "funnelforge/executor.hpp"
#include "funnelforge/log.hpp"
#include "funnelforge/logic.hpp"
#include "funnelforge/serialize.hpp"
#include "funnelforge/svg.hpp"

#ifndef FUNNELFORGE_VERSION
#define FUNNELFORGE_VERSION "0.0.0"
#endif

namespace funnelforge::app {

namespace fs = std::filesystem;
using io::Json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Infeasible:
    case ErrorCode::InfeasibleEndpoint:
    case ErrorCode::Unreachable:
    case ErrorCode::InsideObstacle:
    case ErrorCode::NearSingular:
      return kInfeasible;
    case ErrorCode::MaxIterations:
      return kPlanningFailed;
    case ErrorCode::SyntaxError:
    case ErrorCode::UnsupportedFragment:
    case ErrorCode::EmptyLiveness:
    case ErrorCode::NoAcceptingRun:
      return kUnsupported;
    case ErrorCode::SafetyViolation:
    case ErrorCode::Timeout:
      return kMissionFailed;
    default:
      return kConfigError;
  }
}

namespace {

// Collects the files of one command and writes the manifest that lists them.
class Output {
 public:
  explicit Output(std::string dir) : dir_(std::move(dir)) {}

  std::string put(const std::string& name, const std::string& contents) {
    const std::string path = (fs::path(dir_) / name).string();
    io::write_file_atomic(path, contents);
    files_.push_back({{"path", name}, {"fnv1a", io::hex64(io::fnv1a(contents))}, {"bytes", contents.size()}});
    return path;
  }

  void finish(const std::string& command, const config::Bundle& b, const std::string& config_path) {
    Json created = nullptr;
    std::time_t when = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) when = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    std::tm tm{};
    gmtime_r(&when, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    created = buf;
    const Json manifest = {{"kind", "manifest"},
                           {"tool", "funnelforge"},
                           {"version", FUNNELFORGE_VERSION},
                           {"command", command},
                           {"config", config_path},
                           {"config_hash", config::config_hash(b)},
                           {"seed", b.planner.rng_seed},
                           {"created", created},
                           {"artifacts", files_}};
    io::write_file_atomic((fs::path(dir_) / "manifest.json").string(), io::dump(manifest));
  }

 private:
  std::string dir_;
  Json files_ = Json::array();
};

config::Bundle load(const Options& opt) {
  if (opt.config.empty()) throw Error(ErrorCode::ConfigError, "--config is required");
  config::Bundle b = config::load_config(opt.config);
  config::apply_overrides(b, opt.epsilon, opt.alpha, opt.seed);
  return b;
}

const world::Polytope& region_or_throw(const config::Bundle& b, const std::string& name) {
  if (!b.workspace.has_region(name)) throw Error(ErrorCode::ConfigError, "no region named '" + name + "'");
  return b.workspace.region(name).polytope;
}

void stamp(bp::BarrierPair& bp, const config::Bundle& b) {
  bp.provenance = {config::config_hash(b), b.planner.rng_seed};
}

bprrt::BPRRTGraph plan_leg(const config::Bundle& b, const std::string& from, const std::string& to) {
  bprrt::Rng rng(b.planner.rng_seed);
  bprrt::BPRRTGraph g = bprrt::bp_rrt(region_or_throw(b, from), region_or_throw(b, to),
                                      b.workspace.obstacles_for_leg(from, to), b.synthesis, b.planner, b.robot, rng);
  g.check_invariants();
  for (auto& bp : g.barrier_pairs) stamp(bp, b);
  return g;
}

/// Uniform point of the region (rejection in its bounding box), at rest.
dynamics::JointState sample_rest_state(const config::Bundle& b, const world::Polytope& region, std::uint64_t seed) {
  std::seed_seq seq{seed, std::uint64_t{0x1a2b3c4d}};
  std::mt19937_64 rng(seq);
  Eigen::Vector2d lo = region.vertices().front(), hi = lo;
  for (const auto& v : region.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
  for (;;) {
    const Eigen::Vector2d x(ux(rng), uy(rng));
    if (world::contains(region, x)) {
      return dynamics::JointState::at_rest(dynamics::inverse_kinematics(b.robot, x, b.synthesis.ik_branch).q);
    }
  }
}

std::vector<Eigen::Vector2d> thinned_path(const executor::Trace& t, std::size_t every = 20) {
  std::vector<Eigen::Vector2d> out;
  for (std::size_t i = 0; i < t.samples.size(); i += every) out.push_back(t.samples[i].x);
  if (!t.samples.empty() && (t.samples.size() - 1) % every != 0) out.push_back(t.samples.back().x);
  return out;
}

template <typename F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    log << "funnelforge: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    log << "funnelforge: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace

int cmd_synth(const Options& opt, const std::string& region, std::ostream& log) {
  return guarded(log, [&] {
    const config::Bundle b = load(opt);
    const world::Polytope& poly = region_or_throw(b, region);
    bp::BarrierPair bp;
    try {
      bp = bp::synth_bp(poly.geometric_center(), poly, b.workspace.obstacles_for_leg(region, region), b.synthesis,
                        b.robot);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MaxIterations) throw Error(ErrorCode::Infeasible, e.what());
      throw;
    }
    stamp(bp, b);
    Output out(opt.out);
    out.put("bp_" + region + ".json", io::dump(io::barrier_pair_to_json(bp)));
    svg::Figure fig{"barrier pair at " + region, &b.workspace, {&bp}, {}, {}};
    out.put("bp_" + region + ".svg", svg::render(fig));
    out.finish("synth", b, opt.config);
    log << "synth " << region << ": log det " << bp.log_det << ", certified residual " << bp.certified_residual << '\n';
    return int{kOk};
  });
}

int cmd_plan(const Options& opt, const std::string& from, const std::string& to, std::ostream& log) {
  return guarded(log, [&] {
    const config::Bundle b = load(opt);
    const bprrt::BPRRTGraph g = plan_leg(b, from, to);
    const auto chain = bprrt::extract_chain(g);
    const std::string stem = from + "_" + to;
    Output out(opt.out);
    out.put("graph_" + stem + ".json", io::dump(io::graph_to_json(g)));
    out.put("chain_" + stem + ".json", io::dump(io::chain_to_json(chain)));
    svg::Figure fig{"BP-RRT " + from + " to " + to, &b.workspace, {}, {}, {}};
    for (const auto& bp : chain) fig.funnels.push_back(&bp);
    for (const auto& v : g.vertices) fig.points.push_back(v.x_e);
    out.put("plan_" + stem + ".svg", svg::render(fig));
    out.finish("plan", b, opt.config);
    log << "plan " << from << " -> " << to << ": " << g.iterations << " samples, " << g.size() << " vertices, chain of "
        << chain.size() << '\n';
    return int{kOk};
  });
}

int cmd_run(const Options& opt, std::ostream& log) {
  return guarded(log, [&] {
    const config::Bundle b = load(opt);
    const logic::FormulaPtr phi = logic::parse_ltl(b.mission.ltl);
    std::set<std::string> declared{std::string(world::kFreeLabel)};
    for (const auto& r : b.workspace.regions) declared.insert(r.polytope.name());
    logic::check_propositions(phi, declared);
    const logic::PatrolSpec patrol = logic::recognize_patrol(phi);
    if (patrol.safe_label != world::kFreeLabel) {
      throw Error(ErrorCode::UnsupportedFragment, "the transit label must be '" + std::string(world::kFreeLabel) + "'");
    }
    const logic::BuchiAutomaton automaton =
        logic::build_patrol_automaton(patrol.liveness, patrol.init_region, patrol.safe_label);
    const logic::AcceptingRun run = logic::find_accepting_run(automaton);
    run.check(automaton);
    const auto requests = logic::run_to_transitions(run, patrol.safe_label);

    std::vector<std::future<bprrt::BPRRTGraph>> pending;
    for (const auto& r : requests) {
      pending.push_back(std::async(std::launch::async, [&b, r] { return plan_leg(b, r.from, r.to); }));
    }
    std::vector<bprrt::BPRRTGraph> graphs;
    for (auto& f : pending) graphs.push_back(f.get());
    std::vector<std::vector<bp::BarrierPair>> chains;
    for (const auto& g : graphs) chains.push_back(bprrt::extract_chain(g));

    const auto initial = sample_rest_state(b, region_or_throw(b, patrol.init_region), b.planner.rng_seed);
    const executor::MissionReport report = executor::run_mission(
        b.robot, requests, chains, initial, b.workspace, b.execution.resolve(b.planner.epsilon), b.mission.cycles);
    std::vector<const executor::Trace*> traces;
    for (const auto& l : report.legs) traces.push_back(&l.trace);
    const executor::TraceVerdict verdict = executor::validate_trace(traces, automaton);

    Output out(opt.out);
    out.put("automaton.json", io::dump(io::automaton_to_json(automaton)));
    out.put("accepting_run.json", io::dump(io::run_to_json(run)));
    for (std::size_t i = 0; i < requests.size(); ++i) {
      const std::string stem = "leg" + std::to_string(i) + "_" + requests[i].from + "_" + requests[i].to;
      out.put("graph_" + stem + ".json", io::dump(io::graph_to_json(graphs[i])));
      out.put("chain_" + stem + ".json", io::dump(io::chain_to_json(chains[i])));
    }
    std::vector<std::string> trace_files;
    for (std::size_t k = 0; k < report.legs.size(); ++k) {
      const auto& leg = report.legs[k];
      const auto& req = requests[k % requests.size()];
      const std::string stem = "trace" + std::to_string(k) + "_" + req.from + "_" + req.to;
      trace_files.push_back(stem + ".json");
      out.put(stem + ".json", io::dump(io::trace_to_json(leg.trace)));
      std::ostringstream csv;
      executor::write_trace_csv(leg.trace, csv);
      out.put(stem + ".csv", csv.str());
      svg::Figure fig{"leg " + std::to_string(k) + ": " + req.from + " to " + req.to, &b.workspace, {}, thinned_path(leg.trace), {}};
      for (const auto& bp : chains[k % requests.size()]) fig.funnels.push_back(&bp);
      out.put(stem + ".svg", svg::render(fig));
    }
    Json rep = io::mission_report_to_json(report, trace_files);
    Json word = Json::array();
    for (const auto& l : verdict.word) word.push_back(std::vector<std::string>(l.begin(), l.end()));
    rep["trace_verdict"] = {{"accepted_prefix", verdict.accepted_prefix},
                            {"divergence", verdict.divergence ? Json(*verdict.divergence) : Json(nullptr)},
                            {"word", word}};
    out.put("report.json", io::dump(rep));
    out.finish("run", b, opt.config);

    for (std::size_t k = 0; k < report.legs.size(); ++k) {
      const auto& leg = report.legs[k];
      log << "leg " << k << " " << requests[k % requests.size()].from << " -> " << leg.goal << ": "
          << executor::to_string(leg.outcome) << " at t = " << leg.trace.samples.back().t << " s, "
          << graphs[k % requests.size()].iterations << " planner samples\n";
    }
    const bool ok = report.success && verdict.accepted_prefix;
    log << "mission " << (ok ? "Success" : "Failure") << '\n';
    return int{ok ? kOk : kMissionFailed};
  });
}

int cmd_simulate(const Options& opt, const std::string& chain_file, const std::string& goal,
                 const std::optional<std::string>& from, std::ostream& log) {
  return guarded(log, [&] {
    const config::Bundle b = load(opt);
    const auto chain = io::chain_from_json(io::read_json_file(chain_file));
    if (chain.empty()) throw Error(ErrorCode::ConfigError, "chain file holds no barrier pairs");
    region_or_throw(b, goal);
    std::string start = from.value_or("");
    if (start.empty()) {
      for (const auto& r : b.workspace.regions) {
        if (r.role == world::RegionRole::Task && world::contains(r.polytope, chain.front().x_e())) start = r.polytope.name();
      }
      if (start.empty()) throw Error(ErrorCode::ConfigError, "first pair lies in no task region; pass --from");
    }
    const auto initial = sample_rest_state(b, region_or_throw(b, start), b.planner.rng_seed);
    const auto leg = executor::simulate_chain(b.robot, chain, initial, goal, b.workspace,
                                              b.execution.resolve(b.planner.epsilon));
    Output out(opt.out);
    out.put("trace.json", io::dump(io::trace_to_json(leg.trace)));
    std::ostringstream csv;
    executor::write_trace_csv(leg.trace, csv);
    out.put("trace.csv", csv.str());
    svg::Figure fig{"simulation " + start + " to " + goal, &b.workspace, {}, thinned_path(leg.trace), {}};
    for (const auto& bp : chain) fig.funnels.push_back(&bp);
    out.put("simulation.svg", svg::render(fig));
    out.finish("simulate", b, opt.config);
    log << "simulate " << start << " -> " << goal << ": " << executor::to_string(leg.outcome) << " at t = "
        << leg.trace.samples.back().t << " s, " << leg.torque_clamps << " clamped samples\n";
    return int{leg.outcome == executor::Outcome::Success ? kOk : kMissionFailed};
  });
}

namespace {

struct Checker {
  const config::Bundle* bundle = nullptr;
  std::optional<logic::BuchiAutomaton> automaton;
  std::ostream& log;
  int failures = 0;

  void fail(const std::string& file, const std::string& why) {
    ++failures;
    log << "FAIL " << file << ": " << why << '\n';
  }

  double epsilon() const { return bundle ? bundle->planner.epsilon : bprrt::PlannerConfig{}.epsilon; }

  void trace(const std::string& file, const executor::Trace& t, bool from_start) {
    t.check();
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
      if (t.samples[i].barrier_active > 0.0) {
        fail(file, "active barrier above 0 at sample " + std::to_string(i));
        return;
      }
    }
    if (!bundle) return;
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
      for (const auto& l : t.samples[i].labels) {
        if (bundle->workspace.has_region(l) && bundle->workspace.region(l).role != world::RegionRole::Task) {
          fail(file, "sample " + std::to_string(i) + " lies in '" + l + "'");
          return;
        }
      }
    }
    if (automaton) {
      const auto v = executor::validate_trace(t, *automaton, !from_start);
      if (!v.accepted_prefix) fail(file, "labels diverge from the mission at symbol " + std::to_string(*v.divergence));
    }
  }

  void chain(const std::string& file, const std::vector<bp::BarrierPair>& c) {
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
      const double v = bp::barrier_value(c[i + 1], dynamics::JointState::at_rest(c[i].q_e()));
      if (v > epsilon() + 1e-9) fail(file, "pair " + std::to_string(i) + " is outside the next funnel's level set");
    }
  }

  void check(const std::string& file) {
    const Json j = io::read_json_file(file);
    if (!j.is_object() || !j.contains("kind")) throw Error(ErrorCode::ParseError, file + ": no \"kind\" field");
    const std::string kind = j["kind"].get<std::string>();
    const fs::path dir = fs::path(file).parent_path();
    try {
      if (kind == "barrier_pair") {
        io::barrier_pair_from_json(j);
      } else if (kind == "chain") {
        chain(file, io::chain_from_json(j));
      } else if (kind == "bprrt_graph") {
        const auto g = io::graph_from_json(j);
        g.check_invariants();
        chain(file, bprrt::extract_chain(g));
      } else if (kind == "trace") {
        trace(file, io::trace_from_json(j), false);
      } else if (kind == "buchi_automaton") {
        logic::find_accepting_run(io::automaton_from_json(j)).check(io::automaton_from_json(j));
      } else if (kind == "accepting_run") {
        if (automaton) io::run_from_json(j).check(*automaton);
      } else if (kind == "mission_report") {
        const auto r = io::mission_report_from_json(j);
        if (!r.success) fail(file, "mission did not succeed");
        std::vector<executor::Trace> traces;
        for (const auto& leg : j["legs"]) {
          if (leg["trace_file"].is_null()) continue;
          traces.push_back(io::trace_from_json(io::read_json_file((dir / leg["trace_file"].get<std::string>()).string())));
        }
        std::vector<const executor::Trace*> ptrs;
        for (const auto& t : traces) {
          trace(file, t, false);
          ptrs.push_back(&t);
        }
        if (automaton && !ptrs.empty() && !executor::validate_trace(ptrs, *automaton).accepted_prefix) {
          fail(file, "concatenated legs diverge from the mission");
        }
      } else if (kind == "manifest") {
        for (const auto& a : j["artifacts"]) {
          const auto path = (dir / a["path"].get<std::string>()).string();
          std::ifstream in(path, std::ios::binary);
          std::stringstream ss;
          ss << in.rdbuf();
          if (!in || io::hex64(io::fnv1a(ss.str())) != a["fnv1a"].get<std::string>()) fail(file, "hash mismatch for " + path);
        }
      } else {
        fail(file, "unknown kind '" + kind + "'");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError || e.code() == ErrorCode::ParseError) throw;
      fail(file, e.what());
    }
  }
};

}  // namespace

int cmd_check(const Options& opt, const std::vector<std::string>& files, std::ostream& log) {
  return guarded(log, [&] {
    std::optional<config::Bundle> b;
    if (!opt.config.empty()) b = load(opt);
    Checker c{b ? &*b : nullptr, std::nullopt, log};
    if (b) {
      try {
        const auto patrol = logic::recognize_patrol(logic::parse_ltl(b->mission.ltl));
        c.automaton = logic::build_patrol_automaton(patrol.liveness, patrol.init_region, patrol.safe_label);
      } catch (const Error& e) {
        log << "note: mission not checked: " << e.what() << '\n';
      }
    }
    if (files.empty()) throw Error(ErrorCode::ConfigError, "check: no artifacts given");
    for (const auto& f : files) {
      const int before = c.failures;
      c.check(f);
      if (c.failures == before) log << "ok   " << f << '\n';
    }
    return int{c.failures == 0 ? kOk : kCheckFailed};
  });
}

}  // namespace funnelforge::app
