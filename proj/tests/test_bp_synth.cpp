// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bp_checks.hpp"
#include "funnelforge/bp_synth.hpp"
#include "funnelforge/sdp.hpp"
#include "test_util.hpp"

using namespace funnelforge;
using namespace funnelforge::bp;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using testutil::example_bundle;
using testutil::vec;

namespace {

BarrierPair identity_pair(MatrixXd K = MatrixXd::Zero(2, 4)) {
  return BarrierPair(MatrixXd::Identity(4, 4), std::move(K), vec({0.3, 1.0}), {0, 0}, 1.0, {});
}

MatrixXd random_spd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> N(0, 1);
  MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = N(rng);
  return A * A.transpose() + 0.1 * MatrixXd::Identity(n, n);
}

// The goal region of the first mission leg and its obstacles.
struct GoalScenario {
  world::Polytope region;
  std::vector<world::Polytope> obstacles;
  SynthesisConfig config;
  BarrierPair bp;
};

const GoalScenario& goal() {
  static const GoalScenario g = [] {
    const auto& b = example_bundle();
    GoalScenario s{b.workspace.region("a1").polytope, b.workspace.obstacles_for_leg("a0", "a1"), b.synthesis, {}};
    s.bp = synth_bp(s.region.geometric_center(), s.region, s.obstacles, s.config, b.robot);
    return s;
  }();
  return g;
}

}  // namespace

TEST(BarrierValue, Examples) {
  const BarrierPair bp = identity_pair();
  EXPECT_EQ(barrier_value(bp, dynamics::JointState::at_rest(bp.q_e())), -1.0);
  EXPECT_NEAR(barrier_value(bp, {bp.q_e() + vec({0.5, 0}), vec({0, 0})}), -0.75, 1e-15);
  EXPECT_NEAR(barrier_value(bp, {bp.q_e() + vec({0.6, 0}), vec({0, 0.8})}), 0.0, 1e-15);
  EXPECT_FF_ERROR(barrier_value(bp, dynamics::JointState::at_rest(vec({0, 0, 0}))), ErrorCode::DimensionMismatch);
}

TEST(BarrierValue, ZeroOnGeneralEllipsoidBoundary) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const MatrixXd Q = random_spd(rng, 4);
    const BarrierPair bp(Q, MatrixXd::Zero(2, 4), vec({0.1, -0.4}), {0, 0}, 1.0, {});
    std::normal_distribution<double> N(0, 1);
    VectorXd w(4);
    for (auto& v : w) v = N(rng);
    const VectorXd z = Q.llt().matrixL() * w.normalized();
    EXPECT_NEAR(barrier_value(bp, {bp.q_e() + z.head(2), z.tail(2)}), 0.0, 1e-12);
  }
}

TEST(ControllerOutput, Examples) {
  MatrixXd K = MatrixXd::Zero(2, 4);
  K.leftCols(2).setIdentity();
  const BarrierPair bp = identity_pair(K);
  EXPECT_EQ(controller_output(bp, dynamics::JointState::at_rest(bp.q_e())), vec({0, 0}));
  const VectorXd u = controller_output(bp, {bp.q_e() + vec({0.1, -0.2}), vec({0, 0})});
  EXPECT_NEAR(u[0], 0.1, 1e-15);
  EXPECT_NEAR(u[1], -0.2, 1e-15);
}

TEST(BarrierPair, RejectsIndefiniteShape) {
  MatrixXd Q = MatrixXd::Identity(4, 4);
  Q(3, 3) = -1;
  EXPECT_FF_ERROR(BarrierPair(Q, MatrixXd::Zero(2, 4), vec({0, 0}), {0, 0}, 1.0, {}), ErrorCode::ValidationError);
}

TEST(SelectExclusionEdges, UnitSquareFromTheRight) {
  const auto sq = world::Polytope::square("ob", {0, 0}, 0.5);
  const auto e = select_exclusion_edges({2, 0}, {sq});
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].facet, 1u);
  EXPECT_NEAR(e[0].abar, 1.5, 1e-15);
  EXPECT_NEAR(e[0].a(0), 1.0, 1e-15);
  EXPECT_NEAR(e[0].a(1), 0.0, 1e-15);
  EXPECT_EQ(e[0].obstacle, "ob");
}

TEST(SelectExclusionEdges, TieTakesLowestFacet) {
  const auto sq = world::Polytope::square("ob", {0, 0}, 0.5);
  const auto e = select_exclusion_edges({2, 2}, {sq});
  EXPECT_EQ(e[0].facet, 1u);
  EXPECT_NEAR(e[0].abar, 1.5, 1e-15);
}

TEST(SelectExclusionEdges, OnePerObstacleAndInsideFails) {
  const auto a = world::Polytope::square("a", {0, 0}, 0.5);
  const auto b = world::Polytope::square("b", {3, 3}, 0.5);
  EXPECT_EQ(select_exclusion_edges({1.5, 1.0}, {a, b}).size(), 2u);
  EXPECT_FF_ERROR(select_exclusion_edges({0.1, 0.1}, {a, b}), ErrorCode::InsideObstacle);
}

TEST(LmiVelLimit, TightAtBound) {
  sdp::MaxDetProblem p;
  const auto Q = p.add_symmetric("Q", 4);
  p.maximize_log_det("Q");
  const double s = 1.7;
  for (auto& c : lmi_vel_limit(Q, vec({s, s}))) p.add_constraint(c.name, c.block, c.sense);
  const auto r = sdp::check_solution(p, {{"Q", VectorXd(vec({1, 1, s * s, s * s})).asDiagonal()}});
  ASSERT_EQ(r.min_eigenvalues.size(), 2u);
  for (double e : r.min_eigenvalues) EXPECT_NEAR(e, 0.0, 1e-12);
}

TEST(LmiVelLimit, ZeroBoundIsInfeasible) {
  sdp::MaxDetProblem p;
  const auto Q = p.add_symmetric("Q", 4);
  p.maximize_log_det("Q");
  p.add_constraint("cap", sdp::AffineMatrix::identity(4) - Q);
  for (auto& c : lmi_vel_limit(Q, vec({0, 1}))) p.add_constraint(c.name, c.block, c.sense);
  EXPECT_NE(sdp::solve(p).status, sdp::Status::Optimal);
}

TEST(LmiInputLimit, ZeroGainAndZeroBound) {
  sdp::MaxDetProblem p;
  const auto Q = p.add_symmetric("Q", 4);
  const auto Y = p.add_matrix("Y", 2, 4);
  p.maximize_log_det("Q");
  for (auto& c : lmi_input_limit(Q, Y, vec({0, 25}))) p.add_constraint(c.name, c.block, c.sense);
  std::mt19937_64 rng(2);
  const MatrixXd Qv = random_spd(rng, 4);
  MatrixXd Yv = MatrixXd::Zero(2, 4);
  auto r = sdp::check_solution(p, {{"Q", Qv}, {"Y", Yv}});
  for (double e : r.min_eigenvalues) EXPECT_GE(e, -1e-12);
  Yv(0, 2) = 1e-3;
  r = sdp::check_solution(p, {{"Q", Qv}, {"Y", Yv}});
  EXPECT_LT(r.min_eigenvalues[0], 0.0);
  EXPECT_GE(r.min_eigenvalues[1], 0.0);
}

TEST(LmiInclusion, DegenerateRegionIsAlwaysFeasible) {
  sdp::MaxDetProblem p;
  const auto Q = p.add_symmetric("Q", 4);
  p.maximize_log_det("Q");
  const VectorXd q_e = vec({0.4, 1.1});
  for (auto& c : lmi_inclusion(Q, q_e, {q_e})) p.add_constraint(c.name, c.block, c.sense);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) EXPECT_GE(sdp::check_solution(p, {{"Q", random_spd(rng, 4)}}).max_residual, -1e-12);
}

TEST(LmiInclusion, UnreachableVertex) {
  sdp::MaxDetProblem p;
  const auto Q = p.add_symmetric("Q", 4);
  const auto region = world::Polytope::square("far", {1.5, 0}, 0.1);
  EXPECT_FF_ERROR(lmi_inclusion(Q, vec({0, 0.5}), region, example_bundle().robot, 5, dynamics::IkBranch::ElbowDown),
                  ErrorCode::Unreachable);
}

TEST(LmiStability, DestabilizingGainIsReported) {
  const auto& b = example_bundle();
  const VectorXd q_e = dynamics::inverse_kinematics(b.robot, {0.9, 0.3}).q;
  const auto ldi = ldi::build_ldi(b.robot, q_e, {vec({0.05, 0.05}), vec({0.5, 0.5})});
  sdp::MaxDetProblem p;
  const auto Q = p.add_symmetric("Q", 4);
  const auto Y = p.add_matrix("Y", 2, 4);
  p.maximize_log_det("Q");
  const auto c = lmi_stability(p, Q, Y, 1.0, ldi);
  p.add_constraint(c.name, c.block, c.sense);
  MatrixXd K = MatrixXd::Zero(2, 4);
  K.leftCols(2).setIdentity();  // positive position feedback
  const MatrixXd Qv = MatrixXd::Identity(4, 4);
  const auto r = sdp::check_solution(
      p, {{"Q", Qv}, {"Y", K * Qv}, {"mu_x", MatrixXd::Ones(1, 1)}, {"mu_u", MatrixXd::Ones(1, 1)}});
  EXPECT_LT(r.max_residual, 0.0);
}

TEST(LmiExclusion, NegativeMultiplierIsReported) {
  const auto& b = example_bundle();
  const VectorXd q_e = dynamics::inverse_kinematics(b.robot, {0.9, 0.3}).q;
  const auto ldi = ldi::build_ldi(b.robot, q_e, {vec({0.05, 0.05}), vec({0.5, 0.5})});
  sdp::MaxDetProblem p;
  const auto Q = p.add_symmetric("Q", 4);
  p.maximize_log_det("Q");
  const auto edges = select_exclusion_edges({0.9, 0.3}, {world::Polytope::square("ob", {1.2, 0.3}, 0.05)});
  for (auto& c : lmi_exclusion(p, Q, edges, ldi)) p.add_constraint(c.name, c.block, c.sense);
  const MatrixXd Qv = 1e-4 * MatrixXd::Identity(4, 4);
  EXPECT_GE(sdp::check_solution(p, {{"Q", Qv}, {"gamma.0", MatrixXd::Constant(1, 1, 1.0)}}).max_residual, 0.0);
  EXPECT_LT(sdp::check_solution(p, {{"Q", Qv}, {"gamma.0", MatrixXd::Constant(1, 1, -1.0)}}).max_residual, 0.0);
}

TEST(SynthBp, GoalRegionIsCertified) {
  const auto& g = goal();
  const auto& bp = g.bp;
  EXPECT_EQ(barrier_value(bp, dynamics::JointState::at_rest(bp.q_e())), -1.0);
  EXPECT_EQ(controller_output(bp, dynamics::JointState::at_rest(bp.q_e())).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GE(bp.certified_residual, -1e-7);
  EXPECT_LT((bp.x_e() - g.region.geometric_center()).norm(), 1e-12);
}

TEST(SynthBp, IndependentResidualCheck) {
  const auto& g = goal();
  const auto& b = example_bundle();
  bool matched = false;
  for (double scale : g.config.box_scales) {
    auto sp = build_synthesis_problem(g.bp.q_e(), g.region, g.obstacles, g.config, b.robot, scale);
    const auto sol = sdp::solve(sp.problem, g.config.solver);
    if (sol.status != sdp::Status::Optimal) continue;
    const auto r = sdp::check_solution(sp.problem, sol.values);
    EXPECT_GE(r.max_residual, -1e-7);
    if ((sol.values.at("Q") - g.bp.Q()).cwiseAbs().maxCoeff() == 0.0) matched = true;
  }
  EXPECT_TRUE(matched);
}

TEST(SynthBp, InvarianceOnSampledStatesAndUncertainty) {
  EXPECT_LE(bpcheck::max_invariance_residual(goal().bp, 1000, 50, 11), 1e-6);
}

TEST(SynthBp, SupportFunctionBounds) {
  const auto& g = goal();
  const auto edges = select_exclusion_edges(g.bp.x_e(), g.obstacles);
  const auto r = bpcheck::support_bounds(g.bp, g.config, edges, 50, 12);
  EXPECT_LE(r.velocity, 1e-6);
  EXPECT_LE(r.torque, 1e-6);
  EXPECT_LE(r.position, 1e-6);
  EXPECT_LE(r.exclusion, 1e-6);
  // The torque bound at the example limit, in Schur form.
  const MatrixXd Y = g.bp.K() * g.bp.Q();
  const MatrixXd S = Y * g.bp.Q().inverse() * Y.transpose();
  for (int i = 0; i < 2; ++i) EXPECT_LE(S(i, i), 625.0 + 1e-6);
}

TEST(SynthBp, SampledTorquesWithinLimits) {
  const auto& bp = goal().bp;
  std::mt19937_64 rng(13);
  for (int k = 0; k < 1000; ++k) {
    const VectorXd z = bpcheck::random_state_in_funnel(rng, bp.Q());
    const dynamics::JointState s{bp.q_e() + z.head(2), z.tail(2)};
    ASSERT_LE(barrier_value(bp, s), 1e-12);
    const VectorXd u = controller_output(bp, s);
    EXPECT_LE(u.cwiseAbs().maxCoeff(), 25.0 + 1e-9);
  }
}

TEST(SynthBp, DesiredRegionCoverage) {
  const auto& g = goal();
  const double level = bpcheck::max_inclusion_level(g.bp, g.region, example_bundle().robot,
                                                    10 * (g.config.edge_samples - 1) + 1, g.config.ik_branch);
  EXPECT_LE(level, 1.0 + 1e-6);
}

TEST(SynthBp, NominalClosedLoopDecaysAtRateAlpha) {
  const auto& b = example_bundle();
  const VectorXd q_e = dynamics::inverse_kinematics(b.robot, {0.9, 0.3}).q;
  const auto ldi = ldi::build_ldi(b.robot, q_e, {vec({0, 0}), vec({0, 0})});
  EXPECT_LT(ldi.A.beta, 1e-12);
  EXPECT_LT(ldi.B.beta, 1e-12);
  sdp::MaxDetProblem p;
  const auto Q = p.add_symmetric("Q", 4);
  const auto Y = p.add_matrix("Y", 2, 4);
  p.maximize_log_det("Q");
  std::vector<sdp::Constraint> blocks = lmi_vel_limit(Q, b.synthesis.qdotbar);
  for (auto& c : lmi_input_limit(Q, Y, b.synthesis.ubar)) blocks.push_back(c);
  for (auto& c : lmi_joint_box(Q, vec({0.3, 0.3}))) blocks.push_back(c);
  blocks.push_back(lmi_stability(p, Q, Y, b.synthesis.alpha, ldi));
  for (auto& c : blocks) p.add_constraint(c.name, c.block, c.sense);
  const auto sol = sdp::solve(p);
  ASSERT_EQ(sol.status, sdp::Status::Optimal);
  const MatrixXd& Qv = sol.values.at("Q");
  const MatrixXd K = Qv.llt().solve(sol.values.at("Y").transpose()).transpose();
  const BarrierPair bp(Qv, K, q_e, {0.9, 0.3}, b.synthesis.alpha, ldi);
  const MatrixXd F = bpcheck::closed_loop(bp, MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2));
  Eigen::EigenSolver<MatrixXd> eig(F);
  EXPECT_LE(eig.eigenvalues().real().maxCoeff(), -b.synthesis.alpha + 1e-6);
  EXPECT_GT(sol.values.at("mu_x")(0, 0), 0.0);
  EXPECT_GT(sol.values.at("mu_u")(0, 0), 0.0);
}

TEST(SynthBp, NearbyObstacleShrinksTheFunnel) {
  const auto& b = example_bundle();
  const BarrierPair free = synth_bp({0.9, 0.3}, std::nullopt, {}, b.synthesis, b.robot);
  const BarrierPair blocked =
      synth_bp({0.9, 0.3}, std::nullopt, {world::Polytope::square("ob", {1.0, 0.3}, 0.03)}, b.synthesis, b.robot);
  EXPECT_GT(free.log_det, blocked.log_det);
}

TEST(SynthBp, DistantEdgeIsInactive) {
  const auto& b = example_bundle();
  const VectorXd q_e = dynamics::inverse_kinematics(b.robot, {0.9, 0.3}).q;
  auto base = build_synthesis_problem(q_e, std::nullopt, {}, b.synthesis, b.robot, 0.5);
  auto with_edge = build_synthesis_problem(q_e, std::nullopt, {}, b.synthesis, b.robot, 0.5);
  ExclusionEdge far;
  far.a = Eigen::RowVector2d(1, 0);
  far.abar = 1e4;
  far.obstacle = "far";
  const auto Q = with_edge.problem.variable("Q");
  for (auto& c : lmi_exclusion(with_edge.problem, Q, {far}, with_edge.ldi))
    with_edge.problem.add_constraint(c.name, c.block, c.sense);
  const auto s0 = sdp::solve(base.problem, b.synthesis.solver);
  const auto s1 = sdp::solve(with_edge.problem, b.synthesis.solver);
  ASSERT_EQ(s0.status, sdp::Status::Optimal);
  ASSERT_EQ(s1.status, sdp::Status::Optimal);
  const MatrixXd& Q0 = s0.values.at("Q");
  EXPECT_LT((s1.values.at("Q") - Q0).cwiseAbs().maxCoeff(), 1e-5 * Q0.cwiseAbs().maxCoeff());
}

TEST(SynthBp, EquilibriumInsideObstacle) {
  const auto& b = example_bundle();
  EXPECT_FF_ERROR(synth_bp({0.9, 0.62}, std::nullopt, {b.workspace.region("a3").polytope}, b.synthesis, b.robot),
                  ErrorCode::InsideObstacle);
}

TEST(SynthBp, UnreachableEquilibrium) {
  const auto& b = example_bundle();
  EXPECT_FF_ERROR(synth_bp({2.0, 0.0}, std::nullopt, {}, b.synthesis, b.robot), ErrorCode::Unreachable);
}
