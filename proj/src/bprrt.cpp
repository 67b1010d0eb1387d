// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/bprrt.hpp"

#include <algorithm>
#include <cmath>

#include "funnelforge/error.hpp"
#include "funnelforge/log.hpp"

namespace funnelforge::bprrt {

using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

bool in_any(const std::vector<world::Polytope>& obstacles, const Vector2d& x) {
  return std::any_of(obstacles.begin(), obstacles.end(),
                     [&](const world::Polytope& p) { return world::contains(p, x); });
}

double at_rest_barrier(const bp::BarrierPair& bp, const VectorXd& q) {
  return bp::barrier_value(bp, {q, VectorXd::Zero(q.size())});
}

}  // namespace

void PlannerConfig::validate() const {
  if (!(epsilon > -1.0 && epsilon <= 0.0)) {
    throw Error(ErrorCode::ValidationError, "planner.epsilon must lie in (-1, 0]");
  }
  if (!(delta > 0.0)) throw Error(ErrorCode::ValidationError, "planner.delta must be positive");
  if (max_iterations < 0) throw Error(ErrorCode::ValidationError, "planner.max_iterations must be >= 0");
  if (!(joint_sample_limit > 0.0)) {
    throw Error(ErrorCode::ValidationError, "planner.joint_sample_limit must be positive");
  }
}

RrtResult rrt_baseline(const Vector2d& x_init, const Vector2d& x_goal, double delta,
                       const std::vector<world::Polytope>& obstacles, double reach_radius, Rng& rng,
                       int max_iterations) {
  if (!(delta > 0.0)) throw Error(ErrorCode::ValidationError, "rrt: delta must be positive");
  if (in_any(obstacles, x_init) || in_any(obstacles, x_goal)) {
    throw Error(ErrorCode::InsideObstacle, "rrt: endpoint lies in an obstacle");
  }
  RrtResult out;
  out.vertices.push_back(x_goal);
  out.parent.push_back(-1);
  int last = 0;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  while ((out.vertices[static_cast<std::size_t>(last)] - x_init).norm() >= delta) {
    if (out.iterations >= max_iterations) throw Error(ErrorCode::MaxIterations, "rrt: iteration limit reached");
    ++out.iterations;
    Vector2d x_rand;
    do {
      x_rand = reach_radius * Vector2d(unit(rng), unit(rng));
    } while (x_rand.norm() > reach_radius);

    int near = 0;
    double best = (out.vertices[0] - x_rand).norm();
    for (std::size_t i = 1; i < out.vertices.size(); ++i) {
      const double d = (out.vertices[i] - x_rand).norm();
      if (d < best) {
        best = d;
        near = static_cast<int>(i);
      }
    }
    if (best == 0.0) continue;
    const Vector2d& x_near = out.vertices[static_cast<std::size_t>(near)];
    const Vector2d x_new = x_near + delta * (x_rand - x_near) / best;
    if (in_any(obstacles, x_new) || x_new.norm() > reach_radius) continue;
    out.vertices.push_back(x_new);
    out.parent.push_back(near);
    last = static_cast<int>(out.vertices.size()) - 1;
  }
  out.vertices.push_back(x_init);
  out.parent.push_back(last);
  for (int v = static_cast<int>(out.vertices.size()) - 1; v >= 0; v = out.parent[static_cast<std::size_t>(v)]) {
    out.path.push_back(out.vertices[static_cast<std::size_t>(v)]);
  }
  return out;
}

std::vector<Edge> BPRRTGraph::edges() const {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < parent.size(); ++i) {
    if (parent[i] >= 0) out.push_back({parent[i], static_cast<int>(i)});
  }
  return out;
}

int BPRRTGraph::add_vertex(bp::BarrierPair bp, int parent_id) {
  const int id = static_cast<int>(vertices.size());
  vertices.push_back({id, bp.x_e(), bp.q_e()});
  barrier_pairs.push_back(std::move(bp));
  parent.push_back(parent_id);
  return id;
}

void BPRRTGraph::check_invariants(double tol) const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ValidationError, "graph: " + what); };
  const std::size_t n = vertices.size();
  if (barrier_pairs.size() != n || parent.size() != n) fail("vertex, pair and parent lists differ in length");
  if (n == 0) return;
  if (root < 0 || static_cast<std::size_t>(root) >= n || parent[static_cast<std::size_t>(root)] != -1) {
    fail("root must exist and have no parent");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (vertices[i].id != static_cast<int>(i)) fail("vertex ids must equal their index");
    if (static_cast<int>(i) == root) continue;
    const int p = parent[i];
    if (p < 0 || static_cast<std::size_t>(p) >= n) fail("vertex " + std::to_string(i) + " has no valid parent");
    // Parents always precede children, so walking up terminates at the root.
    if (p >= static_cast<int>(i)) fail("vertex " + std::to_string(i) + " has a later parent");
    const double b = at_rest_barrier(barrier_pairs[static_cast<std::size_t>(p)], vertices[i].q_e);
    if (b > epsilon + tol) {
      fail("edge " + std::to_string(p) + " -> " + std::to_string(i) + " has barrier " + std::to_string(b));
    }
  }
  if (init_vertex && (*init_vertex < 0 || static_cast<std::size_t>(*init_vertex) >= n)) fail("init vertex out of range");
}

Nearest nearest_bp(const BPRRTGraph& graph, const VectorXd& q_rand) {
  if (graph.vertices.empty()) throw Error(ErrorCode::ValidationError, "nearest_bp: empty graph");
  Nearest best{0, at_rest_barrier(graph.barrier_pairs[0], q_rand)};
  for (std::size_t i = 1; i < graph.barrier_pairs.size(); ++i) {
    const double b = at_rest_barrier(graph.barrier_pairs[i], q_rand);
    if (b < best.barrier) best = {static_cast<int>(i), b};
  }
  return best;
}

VectorXd new_equilibrium(const VectorXd& q_near, const VectorXd& q_rand, const Eigen::MatrixXd& position_block,
                         double epsilon) {
  const VectorXd d = q_rand - q_near;
  const double curvature = d.dot(position_block * d);
  if (!(curvature > 0.0) || !std::isfinite(curvature)) {
    throw Error(ErrorCode::DegenerateDirection, "new_equilibrium: direction has no extent in the level set");
  }
  // Pulled back by a relative 1e-12 so rounding never lands outside the level set.
  return q_near + (1.0 - 1e-12) * std::sqrt((1.0 + epsilon) / curvature) * d;
}

VectorXd new_equilibrium(const VectorXd& q_near, const VectorXd& q_rand, const bp::BarrierPair& bp_near,
                         double epsilon) {
  return new_equilibrium(q_near, q_rand, bp_near.position_block_of_inverse(), epsilon);
}

BPRRTGraph bp_rrt(const world::Polytope& a_init, const world::Polytope& a_goal,
                  const std::vector<world::Polytope>& obstacles, const bp::SynthesisConfig& synthesis,
                  const PlannerConfig& planner, const dynamics::RobotModel& model, Rng& rng) {
  planner.validate();
  auto endpoint = [&](const world::Polytope& region) {
    try {
      return bp::synth_bp(region.geometric_center(), region, obstacles, synthesis, model);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Infeasible || e.code() == ErrorCode::MaxIterations) {
        throw Error(ErrorCode::InfeasibleEndpoint, "region '" + region.name() + "': " + e.what());
      }
      throw;
    }
  };
  bp::BarrierPair bp_init = endpoint(a_init);
  bp::BarrierPair bp_goal = endpoint(a_goal);
  const VectorXd q_init = bp_init.q_e();

  BPRRTGraph g;
  g.epsilon = planner.epsilon;
  g.root = g.add_vertex(std::move(bp_goal), -1);
  int newest = g.root;

  const int n = model.dof();
  std::uniform_real_distribution<double> unit(-planner.joint_sample_limit, planner.joint_sample_limit);
  int rejected_obstacle = 0, rejected_synthesis = 0;
  while (at_rest_barrier(g.barrier_pairs[static_cast<std::size_t>(newest)], q_init) > planner.epsilon) {
    if (g.iterations >= planner.max_iterations) {
      throw Error(ErrorCode::MaxIterations, "bp_rrt: " + std::to_string(g.iterations) + " samples without reaching '" +
                                                a_init.name() + "' (" + std::to_string(g.size()) + " vertices)");
    }
    ++g.iterations;
    VectorXd q_rand(n);
    for (int i = 0; i < n; ++i) q_rand[i] = unit(rng);
    if (in_any(obstacles, dynamics::forward_kinematics(model, q_rand))) {
      ++rejected_obstacle;
      continue;
    }
    const Nearest near = nearest_bp(g, q_rand);
    const auto& bp_near = g.barrier_pairs[static_cast<std::size_t>(near.id)];
    const VectorXd q_new = new_equilibrium(bp_near.q_e(), q_rand, bp_near, planner.epsilon);
    try {
      bp::BarrierPair bp_new = bp::synth_bp_at(q_new, std::nullopt, obstacles, synthesis, model);
      newest = g.add_vertex(std::move(bp_new), near.id);
      log::debug("bp_rrt: iteration ", g.iterations, " added vertex ", newest, " from ", near.id);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible && e.code() != ErrorCode::MaxIterations &&
          e.code() != ErrorCode::InsideObstacle) {
        throw;
      }
      ++rejected_synthesis;
    }
  }
  g.init_vertex = g.add_vertex(std::move(bp_init), newest);
  log::info("bp_rrt: '", a_init.name(), "' -> '", a_goal.name(), "' in ", g.iterations, " samples, ", g.size(),
            " vertices, ", rejected_obstacle, " obstacle and ", rejected_synthesis, " synthesis rejections");
  return g;
}

std::vector<bp::BarrierPair> extract_chain(const BPRRTGraph& graph) {
  if (!graph.init_vertex) throw Error(ErrorCode::InitNotAttached, "graph has no init vertex");
  std::vector<bp::BarrierPair> chain;
  for (int v = *graph.init_vertex; v >= 0; v = graph.parent[static_cast<std::size_t>(v)]) {
    chain.push_back(graph.barrier_pairs[static_cast<std::size_t>(v)]);
    if (chain.size() > graph.size()) throw Error(ErrorCode::ValidationError, "graph parent links form a cycle");
  }
  return chain;
}

}  // namespace funnelforge::bprrt
