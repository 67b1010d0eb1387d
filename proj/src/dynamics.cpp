// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "funnelforge/error.hpp"

namespace funnelforge::dynamics {

namespace {

void require_two_link(const RobotModel& model) {
  if (model.dof() != 2) {
    throw Error(ErrorCode::Unsupported,
                "closed-form dynamics are only available for n = 2 (got n = " +
                    std::to_string(model.dof()) + ")");
  }
}

}  // namespace

void RobotModel::validate() const {
  const auto n = link_lengths.size();
  if (n < 1) throw Error(ErrorCode::ValidationError, "robot.link_lengths: need at least one link");
  if (point_masses.size() != n || torque_limits.size() != n) {
    throw Error(ErrorCode::ValidationError,
                "robot: link_lengths, point_masses and torque_limits must have equal length");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(link_lengths[i] > 0.0) || !std::isfinite(link_lengths[i])) {
      throw Error(ErrorCode::ValidationError,
                  "robot.link_lengths[" + std::to_string(i) + "]: must be positive");
    }
    if (!(point_masses[i] > 0.0) || !std::isfinite(point_masses[i])) {
      throw Error(ErrorCode::ValidationError,
                  "robot.point_masses[" + std::to_string(i) + "]: must be positive");
    }
    if (!(torque_limits[i] > 0.0) || !std::isfinite(torque_limits[i])) {
      throw Error(ErrorCode::ValidationError,
                  "robot.torque_limits[" + std::to_string(i) + "]: must be positive");
    }
  }
}

RobotModel RobotModel::two_link_example() {
  RobotModel m;
  m.link_lengths = Eigen::Vector2d(0.75, 0.75);
  m.point_masses = Eigen::Vector2d(2.5, 2.5);
  m.torque_limits = Eigen::Vector2d(25.0, 25.0);
  return m;
}

Eigen::VectorXd JointState::stacked() const {
  Eigen::VectorXd z(q.size() + qdot.size());
  z << q, qdot;
  return z;
}

JointState JointState::from_stacked(const Eigen::VectorXd& z) {
  const auto n = z.size() / 2;
  return {z.head(n), z.tail(n)};
}

IkBranch ik_branch_from_string(std::string_view name) {
  if (name == "elbow-down") return IkBranch::ElbowDown;
  if (name == "elbow-up") return IkBranch::ElbowUp;
  throw Error(ErrorCode::ValidationError, "unknown IK branch '" + std::string(name) + "'");
}

std::string_view to_string(IkBranch branch) {
  return branch == IkBranch::ElbowDown ? "elbow-down" : "elbow-up";
}

Eigen::MatrixXd mass_matrix(const RobotModel& model, const Eigen::VectorXd& q) {
  require_two_link(model);
  const double l1 = model.link_lengths[0], l2 = model.link_lengths[1];
  const double m1 = model.point_masses[0], m2 = model.point_masses[1];
  const double c2 = std::cos(q[1]);
  Eigen::MatrixXd M(2, 2);
  M(0, 0) = m1 * l1 * l1 + m2 * (l1 * l1 + l2 * l2 + 2.0 * l1 * l2 * c2);
  M(0, 1) = m2 * (l2 * l2 + l1 * l2 * c2);
  M(1, 0) = M(0, 1);
  M(1, 1) = m2 * l2 * l2;
  return M;
}

Eigen::MatrixXd coriolis_matrix(const RobotModel& model, const JointState& state) {
  require_two_link(model);
  const double l1 = model.link_lengths[0], l2 = model.link_lengths[1];
  const double m2 = model.point_masses[1];
  const double h = -m2 * l1 * l2 * std::sin(state.q[1]);
  const double qd1 = state.qdot[0], qd2 = state.qdot[1];
  Eigen::MatrixXd C(2, 2);
  C << h * qd2, h * (qd1 + qd2),
      -h * qd1, 0.0;
  return C;
}

Eigen::Vector2d forward_kinematics(const RobotModel& model, const Eigen::VectorXd& q) {
  require_two_link(model);
  const double l1 = model.link_lengths[0], l2 = model.link_lengths[1];
  const double q12 = q[0] + q[1];
  return model.base_position +
         Eigen::Vector2d(l1 * std::cos(q[0]) + l2 * std::cos(q12),
                         l1 * std::sin(q[0]) + l2 * std::sin(q12));
}

Eigen::MatrixXd jacobian(const RobotModel& model, const Eigen::VectorXd& q) {
  require_two_link(model);
  const double l1 = model.link_lengths[0], l2 = model.link_lengths[1];
  const double s1 = std::sin(q[0]), c1 = std::cos(q[0]);
  const double s12 = std::sin(q[0] + q[1]), c12 = std::cos(q[0] + q[1]);
  Eigen::MatrixXd J(2, 2);
  J << -l1 * s1 - l2 * s12, -l2 * s12,
      l1 * c1 + l2 * c12, l2 * c12;
  return J;
}

IkSolution inverse_kinematics(const RobotModel& model, const Eigen::Vector2d& x,
                              IkBranch branch) {
  require_two_link(model);
  constexpr double kReachTol = 1e-9;
  const double l1 = model.link_lengths[0], l2 = model.link_lengths[1];
  const Eigen::Vector2d p = x - model.base_position;
  const double r = p.norm();
  const double r_min = std::abs(l1 - l2), r_max = l1 + l2;
  if (!std::isfinite(r) || r > r_max + kReachTol || r < r_min - kReachTol) {
    throw Error(ErrorCode::Unreachable,
                "point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) +
                    ") lies outside the reachable annulus");
  }
  double c2 = (r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  c2 = std::clamp(c2, -1.0, 1.0);
  double s2 = std::sqrt(std::max(0.0, 1.0 - c2 * c2));
  if (branch == IkBranch::ElbowDown) s2 = -s2;
  const double q2 = std::atan2(s2, c2);
  const double q1 = std::atan2(p.y(), p.x()) - std::atan2(l2 * s2, l1 + l2 * c2);

  IkSolution sol;
  sol.q = Eigen::Vector2d(std::remainder(q1, 2.0 * std::numbers::pi), q2);
  sol.near_singular = std::abs(q2) < 1e-6 || std::numbers::pi - std::abs(q2) < 1e-6;
  return sol;
}

LinearizedModel linearize(const RobotModel& model, const Eigen::VectorXd& q_e) {
  const Eigen::MatrixXd M = mass_matrix(model, q_e);
  const Eigen::MatrixXd Minv = M.llt().solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
  LinearizedModel lin;
  lin.q_e = q_e;
  lin.x_e = forward_kinematics(model, q_e);
  lin.A_block = Minv * coriolis_matrix(model, JointState::at_rest(q_e));
  lin.B_block = Minv;
  lin.J_e = jacobian(model, q_e);
  return lin;
}

StateDerivative dynamics_rhs(const RobotModel& model, const JointState& state,
                             const Eigen::VectorXd& u) {
  const Eigen::MatrixXd M = mass_matrix(model, state.q);
  const Eigen::MatrixXd C = coriolis_matrix(model, state);
  return {state.qdot, M.llt().solve(u - C * state.qdot)};
}

double kinetic_energy(const RobotModel& model, const JointState& state) {
  return 0.5 * state.qdot.dot(mass_matrix(model, state.q) * state.qdot);
}

}  // namespace funnelforge::dynamics
