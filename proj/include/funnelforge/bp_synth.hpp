// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "funnelforge/dynamics.hpp"
#include "funnelforge/ldi.hpp"
#include "funnelforge/sdp.hpp"
#include "funnelforge/world.hpp"

namespace funnelforge::bp {

struct SynthesisConfig {
  double alpha = 1.0;          // decay rate, 1/s
  Eigen::VectorXd xbar;        // workspace deviation bounds, m
  Eigen::VectorXd qdotbar;     // joint velocity bounds, rad/s
  Eigen::VectorXd ubar;        // torque bounds, N*m
  int edge_samples = 5;        // points per region edge, vertices included
  /// Keeps the ellipsoid inside the position box the LDI was fitted on.
  bool joint_box_constraint = true;
  /// Multipliers on the nominal position box x_min / sigma_min(J); each is
  /// tried and the largest feasible log det kept.
  std::vector<double> box_scales = {0.5, 0.35, 0.25};
  double max_box_half_width = 3.14159265358979323846;
  dynamics::IkBranch ik_branch = dynamics::IkBranch::ElbowDown;
  ldi::LdiOptions ldi;
  sdp::SolverOptions solver;

  /// Two-link defaults: alpha 1, xbar 0.2 m, qdotbar 2 rad/s, ubar from the robot.
  static SynthesisConfig defaults_for(const dynamics::RobotModel& model);
  void validate(int n) const;
};

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;

  bool operator==(const Provenance&) const = default;
};

/// Quadratic barrier B(z) = z' Q^-1 z - 1 with gain u = K z, z = [q - q_e; qdot].
class BarrierPair {
 public:
  BarrierPair() = default;
  BarrierPair(Eigen::MatrixXd Q, Eigen::MatrixXd K, Eigen::VectorXd q_e, Eigen::Vector2d x_e,
              double alpha, ldi::NormBoundLDI ldi);

  const Eigen::MatrixXd& Q() const { return Q_; }
  const Eigen::MatrixXd& K() const { return K_; }
  /// Q^-1, cached.
  const Eigen::MatrixXd& P() const { return P_; }
  const Eigen::VectorXd& q_e() const { return q_e_; }
  const Eigen::Vector2d& x_e() const { return x_e_; }
  double alpha() const { return alpha_; }
  const ldi::NormBoundLDI& ldi() const { return ldi_; }
  int dof() const { return static_cast<int>(q_e_.size()); }

  /// Upper-left block of Q^-1: B at zero velocity is dq' P_qq dq - 1.
  Eigen::MatrixXd position_block_of_inverse() const;

  double log_det = 0.0;
  double certified_residual = 0.0;  // min eigenvalue over all LMI blocks
  Provenance provenance;

 private:
  Eigen::MatrixXd Q_, K_, P_;
  Eigen::VectorXd q_e_;
  Eigen::Vector2d x_e_ = Eigen::Vector2d::Zero();
  double alpha_ = 1.0;
  ldi::NormBoundLDI ldi_;
};

/// Joint deviation of `state` from the equilibrium, stacked [q~; qdot].
Eigen::VectorXd deviation(const BarrierPair& bp, const dynamics::JointState& state);

double barrier_value(const BarrierPair& bp, const dynamics::JointState& state);

Eigen::VectorXd controller_output(const BarrierPair& bp, const dynamics::JointState& state);

/// One slab |a x~| < abar per obstacle: a is the unit outward normal of the
/// chosen facet, abar the distance from x_e to its supporting line.
struct ExclusionEdge {
  Eigen::RowVector2d a;
  double abar = 0.0;
  std::string obstacle;
  std::size_t facet = 0;
};

/// Per obstacle, among the facets whose supporting line separates x_e from the
/// obstacle, the one farthest from x_e (lowest index on ties). Throws
/// InsideObstacle when x_e lies in an obstacle (boundary included).
std::vector<ExclusionEdge> select_exclusion_edges(const Eigen::Vector2d& x_e,
                                                  const std::vector<world::Polytope>& obstacles);

/// Wraps a joint-angle difference into (-pi, pi].
Eigen::VectorXd wrap_angles(Eigen::VectorXd d);

// LMI families. Each returns named blocks to be added to the problem; families
// that need multipliers declare them in `problem`.

/// [[1, *], [R(x_i) - q_e, S1 Q S1']] >= 0 per joint-space point.
std::vector<sdp::Constraint> lmi_inclusion(const sdp::AffineMatrix& Q, const Eigen::VectorXd& q_e,
                                           const std::vector<Eigen::VectorXd>& joint_points);

/// Region version: samples the edges and maps each point through the IK
/// branch. Throws Unreachable.
std::vector<sdp::Constraint> lmi_inclusion(const sdp::AffineMatrix& Q, const Eigen::VectorXd& q_e,
                                           const world::Polytope& region,
                                           const dynamics::RobotModel& model, int per_edge,
                                           dynamics::IkBranch branch);

std::vector<sdp::Constraint> lmi_exclusion(sdp::MaxDetProblem& problem, const sdp::AffineMatrix& Q,
                                           const std::vector<ExclusionEdge>& edges,
                                           const ldi::NormBoundLDI& ldi);

std::vector<sdp::Constraint> lmi_pos_limit(sdp::MaxDetProblem& problem, const sdp::AffineMatrix& Q,
                                           const Eigen::VectorXd& xbar, const ldi::NormBoundLDI& ldi);

std::vector<sdp::Constraint> lmi_vel_limit(const sdp::AffineMatrix& Q, const Eigen::VectorXd& qdotbar);

std::vector<sdp::Constraint> lmi_input_limit(const sdp::AffineMatrix& Q, const sdp::AffineMatrix& Y,
                                             const Eigen::VectorXd& ubar);

/// |q~_i| <= r_i over the ellipsoid, r from the LDI box.
std::vector<sdp::Constraint> lmi_joint_box(const sdp::AffineMatrix& Q, const Eigen::VectorXd& half_widths);

/// Decay-rate Lyapunov block for the norm-bound LDI, required <= 0.
sdp::Constraint lmi_stability(sdp::MaxDetProblem& problem, const sdp::AffineMatrix& Q,
                              const sdp::AffineMatrix& Y, double alpha, const ldi::NormBoundLDI& ldi);

/// The assembled program plus what is needed to read a solution back.
struct SynthesisProblem {
  sdp::MaxDetProblem problem;
  Eigen::VectorXd q_e;
  Eigen::Vector2d x_e;
  ldi::NormBoundLDI ldi;
  std::vector<ExclusionEdge> edges;
};

SynthesisProblem build_synthesis_problem(const Eigen::VectorXd& q_e,
                                         const std::optional<world::Polytope>& desired_region,
                                         const std::vector<world::Polytope>& obstacles,
                                         const SynthesisConfig& config,
                                         const dynamics::RobotModel& model, double box_scale = 1.0);

/// Synthesis at a joint equilibrium. Throws Infeasible, MaxIterations,
/// InsideObstacle or Unreachable.
BarrierPair synth_bp_at(const Eigen::VectorXd& q_e, const std::optional<world::Polytope>& desired_region,
                        const std::vector<world::Polytope>& obstacles, const SynthesisConfig& config,
                        const dynamics::RobotModel& model);

/// Synthesis at a workspace equilibrium mapped through the configured IK branch.
BarrierPair synth_bp(const Eigen::Vector2d& x_e, const std::optional<world::Polytope>& desired_region,
                     const std::vector<world::Polytope>& obstacles, const SynthesisConfig& config,
                     const dynamics::RobotModel& model);

}  // namespace funnelforge::bp
