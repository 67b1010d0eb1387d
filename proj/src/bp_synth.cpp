// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/bp_synth.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "funnelforge/error.hpp"

namespace funnelforge::bp {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using sdp::AffineMatrix;
using sdp::Constraint;
using sdp::Sense;

namespace {

// Selectors on z = [q~; qdot]: S1 z = q~, S2 z = qdot.
MatrixXd selector(int n, int which) {
  MatrixXd S = MatrixXd::Zero(n, 2 * n);
  S.block(0, which * n, n, n).setIdentity();
  return S;
}

MatrixXd unit_row(int n, int i) {
  MatrixXd r = MatrixXd::Zero(1, n);
  r(0, i) = 1.0;
  return r;
}

AffineMatrix constant(MatrixXd m) { return AffineMatrix(std::move(m)); }

AffineMatrix zeros(Eigen::Index r, Eigen::Index c) { return AffineMatrix::zero(r, c); }

// |c x~| <= bound over the ellipsoid for every x~ = (J1 + J2 D J3) q~.
AffineMatrix s_procedure_block(const AffineMatrix& Q, const MatrixXd& c, double bound,
                               const AffineMatrix& gamma, const ldi::NormBoundTriple& J) {
  const int n2 = static_cast<int>(Q.rows());
  const int n = n2 / 2;
  const auto p = J.N2.cols();
  const MatrixXd S1 = selector(n, 0);
  return AffineMatrix::symmetric_from_lower({
      {bound * bound * Q},
      {zeros(p, n2), AffineMatrix::scale(gamma, MatrixXd::Identity(p, p))},
      {(c * J.N1 * S1) * Q, AffineMatrix::scale(gamma, c * J.N2), constant(MatrixXd::Identity(1, 1))},
      {(J.N3 * S1) * Q, zeros(J.N3.rows(), p), zeros(J.N3.rows(), 1),
       AffineMatrix::scale(gamma, MatrixXd::Identity(J.N3.rows(), J.N3.rows()))},
  });
}

}  // namespace

SynthesisConfig SynthesisConfig::defaults_for(const dynamics::RobotModel& model) {
  SynthesisConfig c;
  const auto n = model.dof();
  c.xbar = VectorXd::Constant(2, 0.2);
  c.qdotbar = VectorXd::Constant(n, 2.0);
  c.ubar = model.torque_limits;
  return c;
}

void SynthesisConfig::validate(int n) const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ValidationError, "synthesis config: " + what); };
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be positive");
  if (xbar.size() != 2) fail("xbar must have 2 entries");
  if (qdotbar.size() != n) fail("qdotbar must have one entry per joint");
  if (ubar.size() != n) fail("ubar must have one entry per joint");
  for (const VectorXd* v : {&xbar, &qdotbar, &ubar}) {
    if (!(v->array() > 0.0).all() || !v->allFinite()) fail("bounds must be positive and finite");
  }
  if (edge_samples < 2) fail("edge_samples must be at least 2");
  if (!(max_box_half_width > 0.0)) fail("max_box_half_width must be positive");
  if (box_scales.empty()) fail("box_scales must not be empty");
  for (double s : box_scales) {
    if (!(s > 0.0) || !std::isfinite(s)) fail("box_scales must be positive");
  }
}

BarrierPair::BarrierPair(MatrixXd Q, MatrixXd K, VectorXd q_e, Eigen::Vector2d x_e, double alpha,
                         ldi::NormBoundLDI ldi)
    : Q_(std::move(Q)), K_(std::move(K)), q_e_(std::move(q_e)), x_e_(x_e), alpha_(alpha), ldi_(std::move(ldi)) {
  const auto n = q_e_.size();
  if (Q_.rows() != 2 * n || Q_.cols() != 2 * n || K_.rows() != n || K_.cols() != 2 * n) {
    throw Error(ErrorCode::DimensionMismatch, "barrier pair: Q must be 2n x 2n and K n x 2n");
  }
  Eigen::LLT<MatrixXd> llt(Q_);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::ValidationError, "barrier pair: Q is not positive definite");
  P_ = llt.solve(MatrixXd::Identity(2 * n, 2 * n));
  P_ = 0.5 * (P_ + P_.transpose());
  log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

MatrixXd BarrierPair::position_block_of_inverse() const {
  const auto n = q_e_.size();
  return P_.topLeftCorner(n, n);
}

VectorXd wrap_angles(VectorXd d) {
  for (auto& v : d) v = std::remainder(v, 2.0 * M_PI);
  for (auto& v : d) {
    if (v <= -M_PI) v += 2.0 * M_PI;
  }
  return d;
}

VectorXd deviation(const BarrierPair& bp, const dynamics::JointState& state) {
  const auto n = bp.dof();
  if (state.q.size() != n || state.qdot.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "state dimension does not match barrier pair");
  }
  VectorXd z(2 * n);
  z << state.q - bp.q_e(), state.qdot;
  return z;
}

double barrier_value(const BarrierPair& bp, const dynamics::JointState& state) {
  const VectorXd z = deviation(bp, state);
  return z.dot(bp.P() * z) - 1.0;
}

VectorXd controller_output(const BarrierPair& bp, const dynamics::JointState& state) {
  return bp.K() * deviation(bp, state);
}

std::vector<ExclusionEdge> select_exclusion_edges(const Eigen::Vector2d& x_e,
                                                  const std::vector<world::Polytope>& obstacles) {
  std::vector<ExclusionEdge> out;
  out.reserve(obstacles.size());
  for (const auto& obs : obstacles) {
    const auto& facets = obs.half_spaces();
    const auto dist = world::facet_distance(obs, x_e);
    std::optional<std::size_t> best;
    double best_distance = -1.0;
    for (std::size_t i = 0; i < facets.size(); ++i) {
      const auto& fd = dist[i];
      if (fd.satisfied) continue;
      if (fd.distance > best_distance) {
        best_distance = fd.distance;
        best = i;
      }
    }
    if (!best || best_distance <= 0.0) {
      throw Error(ErrorCode::InsideObstacle, "equilibrium lies in obstacle '" + obs.name() + "'");
    }
    ExclusionEdge e;
    e.a = facets[*best].normal.transpose();
    e.abar = best_distance;
    e.obstacle = obs.name();
    e.facet = *best;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Constraint> lmi_inclusion(const AffineMatrix& Q, const VectorXd& q_e,
                                      const std::vector<VectorXd>& joint_points) {
  const int n = static_cast<int>(q_e.size());
  const MatrixXd S1 = selector(n, 0);
  const AffineMatrix QS = S1 * Q * MatrixXd(S1.transpose());
  std::vector<Constraint> out;
  for (std::size_t i = 0; i < joint_points.size(); ++i) {
    const VectorXd d = wrap_angles(joint_points[i] - q_e);
    out.push_back({"inclusion." + std::to_string(i),
                   AffineMatrix::symmetric_from_lower({{constant(MatrixXd::Identity(1, 1))}, {constant(d), QS}}),
                   Sense::PositiveSemidefinite});
  }
  return out;
}

std::vector<Constraint> lmi_inclusion(const AffineMatrix& Q, const VectorXd& q_e, const world::Polytope& region,
                                      const dynamics::RobotModel& model, int per_edge,
                                      dynamics::IkBranch branch) {
  std::vector<VectorXd> pts;
  for (const auto& x : world::sample_edges(region, per_edge)) {
    pts.push_back(dynamics::inverse_kinematics(model, x, branch).q);
  }
  return lmi_inclusion(Q, q_e, pts);
}

std::vector<Constraint> lmi_exclusion(sdp::MaxDetProblem& problem, const AffineMatrix& Q,
                                      const std::vector<ExclusionEdge>& edges, const ldi::NormBoundLDI& ldi) {
  std::vector<Constraint> out;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string tag = std::to_string(k);
    const AffineMatrix gamma = problem.add_scalar("gamma." + tag);
    out.push_back({"exclusion." + tag + "." + edges[k].obstacle,
                   s_procedure_block(Q, edges[k].a, edges[k].abar, gamma, ldi.J), Sense::PositiveSemidefinite});
  }
  return out;
}

std::vector<Constraint> lmi_pos_limit(sdp::MaxDetProblem& problem, const AffineMatrix& Q, const VectorXd& xbar,
                                      const ldi::NormBoundLDI& ldi) {
  std::vector<Constraint> out;
  for (int i = 0; i < xbar.size(); ++i) {
    const std::string tag = std::to_string(i);
    const AffineMatrix mu = problem.add_scalar("mu_pos." + tag);
    out.push_back({"position_limit." + tag, s_procedure_block(Q, unit_row(2, i), xbar[i], mu, ldi.J),
                   Sense::PositiveSemidefinite});
  }
  return out;
}

std::vector<Constraint> lmi_vel_limit(const AffineMatrix& Q, const VectorXd& qdotbar) {
  const int n = static_cast<int>(qdotbar.size());
  const MatrixXd S2 = selector(n, 1);
  std::vector<Constraint> out;
  for (int i = 0; i < n; ++i) {
    const double b = qdotbar[i];
    out.push_back({"velocity_limit." + std::to_string(i),
                   AffineMatrix::symmetric_from_lower({{Q}, {(unit_row(n, i) * S2) * Q, constant(MatrixXd::Constant(1, 1, b * b))}}),
                   Sense::PositiveSemidefinite});
  }
  return out;
}

std::vector<Constraint> lmi_input_limit(const AffineMatrix& Q, const AffineMatrix& Y, const VectorXd& ubar) {
  const int n = static_cast<int>(ubar.size());
  std::vector<Constraint> out;
  for (int i = 0; i < n; ++i) {
    const double b = ubar[i];
    out.push_back({"input_limit." + std::to_string(i),
                   AffineMatrix::symmetric_from_lower({{Q}, {unit_row(n, i) * Y, constant(MatrixXd::Constant(1, 1, b * b))}}),
                   Sense::PositiveSemidefinite});
  }
  return out;
}

std::vector<Constraint> lmi_joint_box(const AffineMatrix& Q, const VectorXd& half_widths) {
  const int n = static_cast<int>(half_widths.size());
  const MatrixXd S1 = selector(n, 0);
  std::vector<Constraint> out;
  for (int i = 0; i < n; ++i) {
    const double r = half_widths[i];
    out.push_back({"joint_box." + std::to_string(i),
                   AffineMatrix::symmetric_from_lower({{Q}, {(unit_row(n, i) * S1) * Q, constant(MatrixXd::Constant(1, 1, r * r))}}),
                   Sense::PositiveSemidefinite});
  }
  return out;
}

Constraint lmi_stability(sdp::MaxDetProblem& problem, const AffineMatrix& Q, const AffineMatrix& Y, double alpha,
                         const ldi::NormBoundLDI& ldi) {
  const int n = static_cast<int>(ldi.q_e.size());
  const MatrixXd S1 = selector(n, 0);
  const MatrixXd S2 = selector(n, 1);
  const AffineMatrix mu_x = problem.add_scalar("mu_x");
  const AffineMatrix mu_u = problem.add_scalar("mu_u");
  const auto& A = ldi.A;
  const auto& B = ldi.B;

  const MatrixXd drift = S1.transpose() * S2 + S2.transpose() * A.N1 * S2;
  const AffineMatrix half = drift * Q + MatrixXd(S2.transpose() * B.N1) * Y;
  AffineMatrix H = half + half.transpose();
  H += AffineMatrix::scale(mu_x, S2.transpose() * A.N2 * A.N2.transpose() * S2);
  H += AffineMatrix::scale(mu_u, S2.transpose() * B.N2 * B.N2.transpose() * S2);

  const auto pa = A.N3.rows();
  const auto pb = B.N3.rows();
  AffineMatrix block = AffineMatrix::symmetric_from_lower({
      {H + (2.0 * alpha) * Q},
      {MatrixXd(A.N3 * S2) * Q, -AffineMatrix::scale(mu_x, MatrixXd::Identity(pa, pa))},
      {B.N3 * Y, zeros(pb, pa), -AffineMatrix::scale(mu_u, MatrixXd::Identity(pb, pb))},
  });
  return {"stability", std::move(block), Sense::NegativeSemidefinite};
}

SynthesisProblem build_synthesis_problem(const VectorXd& q_e, const std::optional<world::Polytope>& desired_region,
                                         const std::vector<world::Polytope>& obstacles,
                                         const SynthesisConfig& config, const dynamics::RobotModel& model,
                                         double box_scale) {
  model.validate();
  const int n = model.dof();
  if (q_e.size() != n) throw Error(ErrorCode::DimensionMismatch, "equilibrium dimension does not match robot");
  config.validate(n);

  SynthesisProblem sp;
  sp.q_e = q_e;
  sp.x_e = dynamics::forward_kinematics(model, q_e);
  sp.edges = select_exclusion_edges(sp.x_e, obstacles);

  ldi::StateBox box = ldi::box_from_bounds(model, q_e, config.xbar, config.qdotbar);
  for (auto& r : box.position) r = std::min(box_scale * r, config.max_box_half_width);
  sp.ldi = ldi::build_ldi(model, q_e, box, config.ldi);

  auto& p = sp.problem;
  const AffineMatrix Q = p.add_symmetric("Q", 2 * n);
  const AffineMatrix Y = p.add_matrix("Y", n, 2 * n);
  p.maximize_log_det("Q");

  std::vector<Constraint> blocks;
  auto append = [&blocks](std::vector<Constraint> more) {
    for (auto& c : more) blocks.push_back(std::move(c));
  };
  if (desired_region) {
    append(lmi_inclusion(Q, q_e, *desired_region, model, config.edge_samples, config.ik_branch));
  }
  append(lmi_exclusion(p, Q, sp.edges, sp.ldi));
  append(lmi_pos_limit(p, Q, config.xbar, sp.ldi));
  append(lmi_vel_limit(Q, config.qdotbar));
  append(lmi_input_limit(Q, Y, config.ubar));
  if (config.joint_box_constraint) append(lmi_joint_box(Q, box.position));
  blocks.push_back(lmi_stability(p, Q, Y, config.alpha, sp.ldi));
  for (auto& c : blocks) p.add_constraint(std::move(c.name), std::move(c.block), c.sense);
  return sp;
}

BarrierPair synth_bp_at(const VectorXd& q_e, const std::optional<world::Polytope>& desired_region,
                        const std::vector<world::Polytope>& obstacles, const SynthesisConfig& config,
                        const dynamics::RobotModel& model) {
  std::optional<BarrierPair> best;
  bool hit_limit = false;
  for (double scale : config.box_scales) {
    SynthesisProblem sp = build_synthesis_problem(q_e, desired_region, obstacles, config, model, scale);
    const auto sol = sdp::solve(sp.problem, config.solver);
    if (sol.status != sdp::Status::Optimal) {
      hit_limit = hit_limit || sol.status == sdp::Status::MaxIterations;
      continue;
    }
    const auto report = sdp::check_solution(sp.problem, sol.values);
    if (!report.detvar_positive_definite || report.max_residual < -config.solver.tol) continue;
    const MatrixXd& Q = sol.values.at("Q");
    const MatrixXd& Y = sol.values.at("Y");
    const MatrixXd K = Q.llt().solve(Y.transpose()).transpose();
    BarrierPair bp(Q, K, sp.q_e, sp.x_e, config.alpha, std::move(sp.ldi));
    bp.certified_residual = report.max_residual;
    if (!best || bp.log_det > best->log_det) best = std::move(bp);
  }
  if (best) return *best;
  if (hit_limit) throw Error(ErrorCode::MaxIterations, "barrier pair synthesis hit the iteration limit");
  throw Error(ErrorCode::Infeasible, "barrier pair synthesis is infeasible");
}

BarrierPair synth_bp(const Eigen::Vector2d& x_e, const std::optional<world::Polytope>& desired_region,
                     const std::vector<world::Polytope>& obstacles, const SynthesisConfig& config,
                     const dynamics::RobotModel& model) {
  const auto ik = dynamics::inverse_kinematics(model, x_e, config.ik_branch);
  return synth_bp_at(ik.q, desired_region, obstacles, config, model);
}

}  // namespace funnelforge::bp
