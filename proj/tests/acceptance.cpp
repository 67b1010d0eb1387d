// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
//
// End-to-end acceptance run on the shipped example. Prints one PASS/FAIL line
// per criterion and exits non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "bp_checks.hpp"
#include "funnelforge/app.hpp"
#include "funnelforge/config.hpp"
#include "funnelforge/dynamics.hpp"
#include "funnelforge/executor.hpp"
#include "funnelforge/logic.hpp"
#include "funnelforge/sdp.hpp"
#include "mission_fixture.hpp"

using namespace funnelforge;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const std::string kConfig = FUNNELFORGE_SOURCE_DIR "/config/patrol_example.json";

const config::Bundle& bundle() {
  static const config::Bundle b = config::load_config(kConfig);
  return b;
}

// Collects the findings of one criterion; any failed expectation fails it.
struct Verdict {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int g_failures = 0;

void report(int id, const std::string& title, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = Clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.ok = false;
    v.detail << " [exception: " << e.what() << "]";
  }
  if (!v.ok) ++g_failures;
  std::cout << (v.ok ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << seconds_since(t0) << " s)"
            << v.detail.str() << std::endl;
}

// ---------------------------------------------------------------------------

void maxdet_solver(Verdict& v) {
  const auto t0 = Clock::now();
  using sdp::AffineMatrix;
  {
    sdp::MaxDetProblem p;
    const auto Q = p.add_symmetric("Q", 1);
    p.maximize_log_det("Q");
    p.add_constraint("cap", AffineMatrix::identity(1) - Q);
    p.add_constraint("psd", Q);
    const auto s = sdp::solve(p);
    v.expect(s.status == sdp::Status::Optimal && std::abs(s.values.at("Q")(0, 0) - 1.0) <= 1e-6 &&
                 std::abs(s.objective) <= 1e-6,
             "scalar cap optimum 1");
  }
  {
    sdp::MaxDetProblem p;
    const auto Q = p.add_symmetric("Q", 2);
    p.maximize_log_det("Q");
    AffineMatrix trace(MatrixXd::Constant(1, 1, 2.0));
    trace -= MatrixXd(Eigen::RowVector2d(1, 0)) * Q * MatrixXd(Eigen::Vector2d(1, 0));
    trace -= MatrixXd(Eigen::RowVector2d(0, 1)) * Q * MatrixXd(Eigen::Vector2d(0, 1));
    p.add_constraint("trace", trace);
    p.add_constraint("psd", Q);
    const auto s = sdp::solve(p);
    v.expect(s.status == sdp::Status::Optimal &&
                 (s.values.at("Q") - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-6 &&
                 std::abs(s.objective) <= 1e-6,
             "trace cap optimum I");
  }
  {
    sdp::MaxDetProblem p;
    const auto Q = p.add_symmetric("Q", 2);
    p.maximize_log_det("Q");
    MatrixXd cap = MatrixXd::Zero(2, 2);
    cap.diagonal() << 1.0, 4.0;
    p.add_constraint("cap", AffineMatrix(cap) - Q);
    const auto s = sdp::solve(p);
    v.expect(s.status == sdp::Status::Optimal && (s.values.at("Q") - cap).cwiseAbs().maxCoeff() <= 1e-6 &&
                 std::abs(s.objective - std::log(4.0)) <= 1e-6,
             "diagonal cap optimum diag(1, 4)");
  }
  {
    sdp::MaxDetProblem p;
    const auto Q = p.add_symmetric("Q", 2);
    p.maximize_log_det("Q");
    p.add_constraint("lower", Q - 2.0 * AffineMatrix::identity(2));
    p.add_constraint("upper", AffineMatrix::identity(2) - Q);
    v.expect(sdp::solve(p).status == sdp::Status::Infeasible, "contradictory problem is Infeasible");
  }
  const double t = seconds_since(t0);
  v.detail << " solve time " << t << " s";
  v.expect(t < 1.0, "runtime < 1 s");
}

void certification(Verdict& v) {
  const auto t0 = Clock::now();
  const auto& b = bundle();
  const auto& region = b.workspace.region("a1").polytope;
  const auto obstacles = b.workspace.obstacles_for_leg("a0", "a1");
  const auto pair = bp::synth_bp(region.geometric_center(), region, obstacles, b.synthesis, b.robot);

  // The maxdet program behind the returned pair, solved and checked independently.
  bool matched = false;
  double worst_residual = 0.0;
  for (double scale : b.synthesis.box_scales) {
    auto sp = bp::build_synthesis_problem(pair.q_e(), region, obstacles, b.synthesis, b.robot, scale);
    const auto sol = sdp::solve(sp.problem, b.synthesis.solver);
    if (sol.status != sdp::Status::Optimal) continue;
    if ((sol.values.at("Q") - pair.Q()).cwiseAbs().maxCoeff() != 0.0) continue;
    matched = true;
    worst_residual = sdp::check_solution(sp.problem, sol.values).max_residual;
  }
  v.expect(matched, "returned pair comes from an Optimal solve");
  v.expect(worst_residual >= -1e-7, "independent residual >= -1e-7");

  const double inv = bpcheck::max_invariance_residual(pair, 1000, 50, 11);
  v.expect(inv <= 1e-6, "invariance over 1000 states x 50 draws");
  const auto sup = bpcheck::support_bounds(pair, b.synthesis, bp::select_exclusion_edges(pair.x_e(), obstacles), 50, 12);
  v.expect(sup.velocity <= 1e-6, "velocity support bound");
  v.expect(sup.torque <= 1e-6, "torque support bound");
  v.expect(sup.position <= 1e-6, "position support bound");
  v.expect(sup.exclusion <= 1e-6, "obstacle support bound");
  const double t = seconds_since(t0);
  v.detail << " log det " << pair.log_det << ", residual " << worst_residual << ", invariance " << inv;
  v.expect(t < 60.0, "runtime < 60 s");
}

const mission::Planned& planned() {
  static const mission::Planned p = mission::plan(bundle());
  return p;
}

void planning(Verdict& v) {
  const auto t0 = Clock::now();
  const auto& p = planned();
  const double t = seconds_since(t0);
  const double eps = bundle().planner.epsilon;
  const std::vector<logic::TransitionRequest> legs = {{"a0", "a1"}, {"a1", "a2"}, {"a2", "a0"}};
  v.expect(p.requests == legs, "legs a0->a1, a1->a2, a2->a0");
  for (std::size_t i = 0; i < p.graphs.size(); ++i) {
    const auto& g = p.graphs[i];
    double worst = -1.0;
    for (const auto& e : g.edges()) {
      worst = std::max(worst, bp::barrier_value(g.barrier_pairs[e.near],
                                                dynamics::JointState::at_rest(g.barrier_pairs[e.next].q_e())));
    }
    const auto& chain = p.chains[i];
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
      worst = std::max(worst, bp::barrier_value(chain[k + 1], dynamics::JointState::at_rest(chain[k].q_e())));
    }
    v.detail << " " << p.requests[i].from << "->" << p.requests[i].to << ": " << g.iterations << " samples, chain "
             << chain.size() << ", worst edge " << worst << ";";
    v.expect(g.init_vertex.has_value() && g.iterations <= 500, "leg " + std::to_string(i) + " within 500 samples");
    v.expect(worst <= eps + 1e-9, "leg " + std::to_string(i) + " edge barrier <= eps");
  }
  v.expect(t < 600.0, "runtime < 10 min");
}

void closed_loop_mission(Verdict& v) {
  const auto& b = bundle();
  const auto& p = planned();
  const auto options = b.execution.resolve(b.planner.epsilon);
  std::mt19937_64 rng(2024);
  int successes = 0, obstacle = 0, clamps = 0, canonical = 0;
  double worst_barrier = -1.0;
  for (int i = 0; i < 20; ++i) {
    const auto s0 = mission::rest_state_in(b, b.workspace.region("a0").polytope, rng);
    const auto r = executor::run_mission(b.robot, p.requests, p.chains, s0, b.workspace, options, 1);
    if (r.success && r.legs.size() == p.requests.size()) ++successes;
    std::vector<const executor::Trace*> traces;
    for (const auto& leg : r.legs) {
      obstacle += leg.obstacle_samples;
      clamps += leg.torque_clamps;
      for (const auto& s : leg.trace.samples) worst_barrier = std::max(worst_barrier, s.barrier_active);
      traces.push_back(&leg.trace);
    }
    if (executor::validate_trace(traces, p.automaton).accepted_prefix) ++canonical;
  }
  v.detail << " " << successes << "/20 Success, " << obstacle << " obstacle samples, " << clamps
           << " clamped samples, max active barrier " << worst_barrier << "; " << canonical
           << "/20 label words on the canonical patrol order";
  v.expect(successes == 20, "20/20 Success");
  v.expect(obstacle == 0, "no obstacle samples");
  v.expect(clamps == 0, "no torque clamps");
  v.expect(worst_barrier <= 0.0, "active barrier <= 0");
}

std::vector<logic::Label> labels_of(const std::vector<std::string>& names) {
  std::vector<logic::Label> out;
  for (const auto& n : names) out.push_back({n});
  return out;
}

void logic_layer(Verdict& v) {
  const auto a = logic::build_patrol_automaton({"a0", "a1", "a2"}, "a0", "free");
  const auto canon = labels_of({"a0", "free", "a1", "free", "a2", "free"});
  v.expect(logic::accepts_lasso(a, {}, canon), "canonical patrol accepted");

  const auto run = logic::find_accepting_run(a);
  run.check(a);
  std::vector<logic::Label> prefix, cycle;
  for (const auto& s : run.prefix) prefix.push_back(s.label);
  for (const auto& s : run.cycle) cycle.push_back(s.label);
  v.expect(logic::accepts_lasso(a, prefix, cycle), "found lasso accepted");
  std::vector<logic::Label> word(prefix);
  for (int lap = 0; lap < 3; ++lap) word.insert(word.end(), cycle.begin(), cycle.end());
  v.expect(logic::replay(a, word).accepted_prefix, "lasso replays");

  const auto alphabet = labels_of({"a0", "a1", "a2", "free", "a3"});
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<std::size_t> sym(0, alphabet.size() - 1);
  int tested = 0, rejected = 0;
  while (tested < 100) {
    std::vector<logic::Label> c(canon);
    c.insert(c.end(), canon.begin(), canon.end());
    std::uniform_int_distribution<std::size_t> pos(0, c.size() - 1);
    const std::size_t i = pos(rng);
    switch (kind(rng)) {
      case 0: c[i] = alphabet[sym(rng)]; break;
      case 1: c.erase(c.begin() + static_cast<long>(i)); break;
      case 2: c.insert(c.begin() + static_cast<long>(i), c[i]); break;
      default: std::swap(c[i], c[(i + 1) % c.size()]); break;
    }
    std::vector<logic::Label> unrolled;
    while (unrolled.size() < 60) unrolled.push_back(c[unrolled.size() % c.size()]);
    bool is_patrol = true;
    for (std::size_t k = 0; k < unrolled.size(); ++k) is_patrol = is_patrol && unrolled[k] == canon[k % canon.size()];
    if (is_patrol) continue;
    ++tested;
    if (!logic::accepts_lasso(a, {}, c) && !logic::replay(a, unrolled).accepted_prefix) ++rejected;
  }
  v.detail << " " << rejected << "/100 perturbed words rejected";
  v.expect(rejected == 100, "all perturbed words rejected");
}

void numerical_oracles(Verdict& v) {
  const auto& arm = bundle().robot;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(-M_PI, M_PI);
  const double h = 1e-6;
  double jac = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const VectorXd q = (VectorXd(2) << U(rng), U(rng)).finished();
    MatrixXd fd(2, 2);
    for (int k = 0; k < 2; ++k) {
      const VectorXd e = VectorXd::Unit(2, k);
      fd.col(k) = (dynamics::forward_kinematics(arm, q + h * e) - dynamics::forward_kinematics(arm, q - h * e)) / (2 * h);
    }
    jac = std::max(jac, (dynamics::jacobian(arm, q) - fd).cwiseAbs().maxCoeff());
  }
  v.expect(jac <= 1e-6, "Jacobian vs finite differences");

  const VectorXd u = (VectorXd(2) << 2.0, -1.0).finished();
  auto integrate = [&](dynamics::JointState s, double dt) {
    const int steps = static_cast<int>(std::lround(1.0 / dt));
    for (int k = 0; k < steps; ++k) s = executor::rk4_step(arm, s, u, dt);
    return s.stacked();
  };
  const dynamics::JointState s0{(VectorXd(2) << 0.4, -0.9).finished(), (VectorXd(2) << 1.0, -1.5).finished()};
  const VectorXd ref = integrate(s0, 1e-4);
  double order = 1e9;
  double prev = (integrate(s0, 0.1) - ref).norm();
  for (double dt : {0.05, 0.025, 0.0125}) {
    const double err = (integrate(s0, dt) - ref).norm();
    order = std::min(order, std::log2(prev / err));
    prev = err;
  }
  v.expect(order >= 3.8, "RK4 observed order >= 3.8");

  dynamics::JointState s{(VectorXd(2) << 0.3, -1.1).finished(), (VectorXd(2) << 1.5, -2.0).finished()};
  double drift = 0.0;
  for (int k = 0; k < 5000; ++k) {
    const double e0 = dynamics::kinetic_energy(arm, s);
    s = executor::rk4_step(arm, s, VectorXd::Zero(2), 1e-3);
    drift = std::max(drift, std::abs(dynamics::kinetic_energy(arm, s) - e0));
  }
  v.expect(drift <= 1e-8, "energy drift per step <= 1e-8");
  v.detail << " Jacobian error " << jac << ", RK4 order " << order << ", energy drift " << drift;
}

std::map<std::string, std::string> json_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

void determinism(Verdict& v) {
  setenv("SOURCE_DATE_EPOCH", "1767225600", 1);
  const fs::path root = fs::temp_directory_path() / "funnelforge_acceptance";
  fs::remove_all(root);
  std::ostringstream log;
  auto run_twice = [&](const std::string& name, const std::function<int(const app::Options&)>& cmd) {
    std::map<std::string, std::string> first;
    for (int k = 0; k < 2; ++k) {
      app::Options o;
      o.config = kConfig;
      o.out = (root / (name + std::to_string(k))).string();
      const int code = cmd(o);
      v.expect(code == app::kOk, name + " exit code " + std::to_string(code));
      const auto files = json_files(o.out);
      if (k == 0) {
        first = files;
        v.detail << " " << name << ": " << files.size() << " JSON files";
      } else {
        v.expect(files == first, name + " artifacts byte-identical");
      }
    }
  };
  run_twice("plan", [&](const app::Options& o) { return app::cmd_plan(o, "a0", "a1", log); });
  run_twice("run", [&](const app::Options& o) { return app::cmd_run(o, log); });
  fs::remove_all(root);
}

}  // namespace

int main() {
  report(1, "maxdet solver optima and infeasibility", maxdet_solver);
  report(2, "barrier-pair certification at the example parameters", certification);
  report(3, "BP-RRT chains for the three patrol legs", planning);
  report(4, "closed-loop patrol from 20 seeded starts", closed_loop_mission);
  report(5, "patrol automaton, lasso replay and perturbations", logic_layer);
  report(6, "Jacobian, RK4 order and energy oracles", numerical_oracles);
  report(7, "byte-identical plan and run artifacts", determinism);
  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed") << std::endl;
  return g_failures == 0 ? 0 : 1;
}
