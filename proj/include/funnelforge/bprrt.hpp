// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "funnelforge/bp_synth.hpp"
#include "funnelforge/dynamics.hpp"
#include "funnelforge/world.hpp"

namespace funnelforge::bprrt {

struct PlannerConfig {
  double epsilon = -0.2;      // barrier threshold for hand-off, in (-1, 0]
  double delta = 0.1;         // workspace step of the point RRT, m
  int max_iterations = 500;   // samples drawn per tree, rejected ones included
  std::uint64_t rng_seed = 1;
  double joint_sample_limit = 3.14159265358979323846;  // q_rand ~ U[-L, L]^n

  void validate() const;
};

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Point RRT in the workspace.

struct RrtResult {
  std::vector<Eigen::Vector2d> vertices;  // vertices[0] = x_goal
  std::vector<int> parent;                // -1 for the root
  std::vector<Eigen::Vector2d> path;      // x_init first, x_goal last
  int iterations = 0;
};

/// Grows from x_goal by steps of delta toward uniform samples of the reach
/// disk until a new vertex is within delta of x_init, then attaches x_init.
/// Throws MaxIterations, InsideObstacle for blocked endpoints.
RrtResult rrt_baseline(const Eigen::Vector2d& x_init, const Eigen::Vector2d& x_goal, double delta,
                       const std::vector<world::Polytope>& obstacles, double reach_radius, Rng& rng,
                       int max_iterations = 10000);

// ---------------------------------------------------------------------------
// Barrier-pair tree.

struct Vertex {
  int id = 0;
  Eigen::Vector2d x_e = Eigen::Vector2d::Zero();
  Eigen::VectorXd q_e;
};

struct Edge {
  int near = 0;  // parent
  int next = 0;  // child
};

struct BPRRTGraph {
  std::vector<Vertex> vertices;
  std::vector<bp::BarrierPair> barrier_pairs;  // one per vertex, same index
  std::vector<int> parent;                     // -1 for the root
  int root = 0;
  std::optional<int> init_vertex;
  double epsilon = -0.2;
  int iterations = 0;

  std::size_t size() const { return vertices.size(); }
  std::vector<Edge> edges() const;
  /// Throws ValidationError naming the first broken tree or edge property.
  void check_invariants(double tol = 1e-9) const;
  int add_vertex(bp::BarrierPair bp, int parent_id);
};

struct Nearest {
  int id = 0;
  double barrier = 0.0;  // barrier value of that vertex at (q_rand, 0)
};

/// Vertex whose barrier is smallest at (q_rand, 0); lowest id on ties.
Nearest nearest_bp(const BPRRTGraph& graph, const Eigen::VectorXd& q_rand);

/// Point t d on the ray from q_near through q_rand with d' P d t^2 = 1 + eps,
/// P the position block of Q^-1. Throws DegenerateDirection.
Eigen::VectorXd new_equilibrium(const Eigen::VectorXd& q_near, const Eigen::VectorXd& q_rand,
                                const Eigen::MatrixXd& position_block, double epsilon);
Eigen::VectorXd new_equilibrium(const Eigen::VectorXd& q_near, const Eigen::VectorXd& q_rand,
                                const bp::BarrierPair& bp_near, double epsilon);

/// Grows a tree of barrier pairs from the goal region until the newest pair's
/// epsilon level set captures the initial equilibrium. Throws
/// InfeasibleEndpoint or MaxIterations.
BPRRTGraph bp_rrt(const world::Polytope& a_init, const world::Polytope& a_goal,
                  const std::vector<world::Polytope>& obstacles, const bp::SynthesisConfig& synthesis,
                  const PlannerConfig& planner, const dynamics::RobotModel& model, Rng& rng);

/// Execution order: init first, goal last. Throws InitNotAttached.
std::vector<bp::BarrierPair> extract_chain(const BPRRTGraph& graph);

}  // namespace funnelforge::bprrt
