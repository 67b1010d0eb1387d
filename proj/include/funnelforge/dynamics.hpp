// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace funnelforge::dynamics {

/// Planar serial arm with point masses at the distal end of each link.
/// Horizontal plane, no gravity. Only n = 2 has closed-form dynamics.
struct RobotModel {
  Eigen::VectorXd link_lengths;   // m
  Eigen::VectorXd point_masses;   // kg
  Eigen::VectorXd torque_limits;  // N*m
  Eigen::Vector2d base_position = Eigen::Vector2d::Zero();

  int dof() const { return static_cast<int>(link_lengths.size()); }
  double reach() const { return link_lengths.sum(); }

  /// Throws ValidationError when the invariants do not hold.
  void validate() const;

  /// Two equal 0.75 m links, 2.5 kg at each tip, 25 N*m per joint.
  static RobotModel two_link_example();
};

struct JointState {
  Eigen::VectorXd q;
  Eigen::VectorXd qdot;

  static JointState at_rest(const Eigen::VectorXd& q) {
    return {q, Eigen::VectorXd::Zero(q.size())};
  }
  /// Stacked [q; qdot].
  Eigen::VectorXd stacked() const;
  static JointState from_stacked(const Eigen::VectorXd& z);
};

struct StateDerivative {
  Eigen::VectorXd qdot;
  Eigen::VectorXd qddot;
};

enum class IkBranch { ElbowDown, ElbowUp };

IkBranch ik_branch_from_string(std::string_view name);
std::string_view to_string(IkBranch branch);

struct IkSolution {
  Eigen::VectorXd q;
  bool near_singular = false;  // elbow angle within 1e-6 of 0 or pi
};

/// Linearization about (q_e, 0):  d/dt[q~; qdot~] = [0 I; 0 A] z + [0; B] u,
/// x~ = [J_e 0] z.
struct LinearizedModel {
  Eigen::VectorXd q_e;
  Eigen::Vector2d x_e;
  Eigen::MatrixXd A_block;  // M^-1(q_e) C(q_e, 0)
  Eigen::MatrixXd B_block;  // M^-1(q_e)
  Eigen::MatrixXd J_e;
};

Eigen::MatrixXd mass_matrix(const RobotModel& model, const Eigen::VectorXd& q);

/// Christoffel-consistent convention: dM/dt - 2C is skew-symmetric.
Eigen::MatrixXd coriolis_matrix(const RobotModel& model, const JointState& state);

Eigen::Vector2d forward_kinematics(const RobotModel& model, const Eigen::VectorXd& q);

Eigen::MatrixXd jacobian(const RobotModel& model, const Eigen::VectorXd& q);

/// Throws Unreachable outside the annulus [|l1 - l2|, l1 + l2] around the base.
IkSolution inverse_kinematics(const RobotModel& model, const Eigen::Vector2d& x,
                              IkBranch branch = IkBranch::ElbowDown);

LinearizedModel linearize(const RobotModel& model, const Eigen::VectorXd& q_e);

/// Returns (qdot, M^-1 (u - C qdot)).
StateDerivative dynamics_rhs(const RobotModel& model, const JointState& state,
                             const Eigen::VectorXd& u);

double kinetic_energy(const RobotModel& model, const JointState& state);

}  // namespace funnelforge::dynamics
