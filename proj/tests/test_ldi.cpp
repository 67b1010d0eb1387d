// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "funnelforge/dynamics.hpp"
#include "funnelforge/ldi.hpp"
#include "test_util.hpp"

using namespace funnelforge;
using namespace funnelforge::ldi;
using testutil::mat;
using testutil::max_abs_diff;
using testutil::vec;

namespace {

const dynamics::RobotModel& arm() {
  static const auto m = dynamics::RobotModel::two_link_example();
  return m;
}

const Eigen::VectorXd& example_q() {
  static const Eigen::VectorXd q = vec({std::numbers::pi / 4, std::numbers::pi / 2});
  return q;
}

StateBox box(double r, double v) { return {Eigen::VectorXd::Constant(2, r), Eigen::VectorXd::Constant(2, v)}; }

}  // namespace

TEST(FitNormBound, SingleSample) {
  const Eigen::MatrixXd S = mat({{1, 2}, {3, 4}});
  const auto t = fit_norm_bound({S});
  EXPECT_EQ(t.N1, S);
  EXPECT_EQ(t.beta, 0.0);
  EXPECT_TRUE(t.contains(S));
}

TEST(FitNormBound, TwoSamples) {
  const Eigen::MatrixXd A = mat({{1, 0}, {2, -1}});
  const Eigen::MatrixXd B = mat({{0, 3}, {1, 1}});
  const auto t = fit_norm_bound({A, B});
  EXPECT_LT(max_abs_diff(t.N1, (A + B) / 2), 1e-15);
  EXPECT_NEAR(t.beta, spectral_norm((A - B) / 2), 1e-14);
  EXPECT_TRUE(t.contains(A));
  EXPECT_TRUE(t.contains(B));
  EXPECT_LT(max_abs_diff(t.realize(Eigen::MatrixXd::Zero(2, 2)), t.N1), 1e-15);
}

TEST(FitNormBound, ScaledIdentities) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  const auto t = fit_norm_bound({I, 3 * I});
  EXPECT_LT(max_abs_diff(t.N1, 2 * I), 1e-15);
  EXPECT_NEAR(t.beta, 1.0, 1e-15);
  EXPECT_TRUE(t.contains(2.5 * I));
  EXPECT_FALSE(t.contains(3.5 * I));
  EXPECT_LT(max_abs_diff(t.N2, I), 1e-15);
  EXPECT_LT(max_abs_diff(t.N3, I), 1e-15);
}

TEST(FitNormBound, Errors) {
  EXPECT_FF_ERROR(fit_norm_bound({}), ErrorCode::EmptySamples);
  EXPECT_FF_ERROR(fit_norm_bound({mat({{1}}), mat({{1, 2}})}), ErrorCode::DimensionMismatch);
}

TEST(FitRelativeNormBound, MembersAndRealizations) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0, 0.1);
  std::vector<Eigen::MatrixXd> samples;
  for (int i = 0; i < 20; ++i) samples.push_back(mat({{2 + N(rng), N(rng)}, {N(rng), 1 + N(rng)}}));
  const auto t = fit_relative_norm_bound(samples);
  for (const auto& s : samples) EXPECT_TRUE(t.contains(s));
  // Every sample is N1 + N2 D N3 for some D of norm at most 1.
  for (const auto& s : samples) {
    const Eigen::MatrixXd D = t.N2.fullPivLu().solve(s - t.N1);
    EXPECT_LE(spectral_norm(D), 1.0 + 1e-9);
    EXPECT_LT(max_abs_diff(t.realize(D), s), 1e-12);
  }
}

TEST(BuildLdi, DegenerateBoxReducesToLinearization) {
  const auto ldi = build_ldi(arm(), example_q(), box(0, 0));
  const auto lin = dynamics::linearize(arm(), example_q());
  EXPECT_EQ(ldi.A.beta, 0.0);
  EXPECT_LT(ldi.B.beta, 1e-12);
  EXPECT_LT(ldi.J.beta, 1e-12);
  EXPECT_LT(max_abs_diff(ldi.A.N1, -lin.A_block), 1e-15);
  EXPECT_LT(max_abs_diff(ldi.B.N1, lin.B_block), 1e-12);
  EXPECT_LT(max_abs_diff(ldi.J.N1, lin.J_e), 1e-15);
  const auto report = validate_ldi(ldi, arm(), 10, 1, box(0, 0));
  EXPECT_EQ(report.max_violation, 0.0);
  EXPECT_TRUE(report.passed);
}

TEST(BuildLdi, ZeroVelocityWidthGivesZeroCouplingRadius) {
  const auto ldi = build_ldi(arm(), example_q(), box(0.25, 0));
  EXPECT_EQ(ldi.A.beta, 0.0);
  EXPECT_GT(ldi.B.beta, 0.0);
  EXPECT_GT(ldi.J.beta, 0.0);
}

TEST(BuildLdi, GridSamplesAreMembersWithoutInflation) {
  LdiOptions opt;
  opt.safety_factor = 1.0;
  const StateBox b = box(0.25, 2.0);
  const auto ldi = build_ldi(arm(), example_q(), b, opt);
  for (int i = 0; i < opt.position_grid; ++i) {
    for (int j = 0; j < opt.position_grid; ++j) {
      const double s1 = -1 + 2.0 * i / (opt.position_grid - 1);
      const double s2 = -1 + 2.0 * j / (opt.position_grid - 1);
      const Eigen::VectorXd q = example_q() + 0.25 * vec({s1, s2});
      EXPECT_TRUE(ldi.B.contains(dynamics::mass_matrix(arm(), q).inverse()));
      EXPECT_TRUE(ldi.J.contains(dynamics::jacobian(arm(), q)));
      for (double v1 : {-2.0, 0.0, 2.0}) {
        for (double v2 : {-2.0, 0.0, 2.0}) {
          EXPECT_TRUE(ldi.A.contains(velocity_coupling(arm(), {q, vec({v1, v2})})));
        }
      }
    }
  }
}

TEST(BuildLdi, FreshSamplesInsideBoxAreMembers) {
  const auto ldi = build_ldi(arm(), example_q(), box(0.25, 2.0));
  const auto report = validate_ldi(ldi, arm(), 200, 77);
  EXPECT_TRUE(report.passed) << report.max_violation;
}

TEST(BuildLdi, RadiiGrowWithTheBox) {
  double prev_a = 0, prev_b = 0, prev_j = 0;
  for (double r : {0.05, 0.1, 0.2, 0.4}) {
    const auto ldi = build_ldi(arm(), example_q(), box(r, 8 * r));
    EXPECT_GE(ldi.A.beta, prev_a);
    EXPECT_GE(ldi.B.beta, prev_b);
    EXPECT_GE(ldi.J.beta, prev_j);
    prev_a = ldi.A.beta;
    prev_b = ldi.B.beta;
    prev_j = ldi.J.beta;
  }
}

TEST(ValidateLdi, SafetyFactorCoversTenThousandSamples) {
  LdiOptions opt;
  opt.safety_factor = 1.1;
  const auto ldi = build_ldi(arm(), example_q(), box(0.25, 2.0), opt);
  const auto report = validate_ldi(ldi, arm(), 10000, 5);
  EXPECT_EQ(report.samples, 10000);
  EXPECT_TRUE(report.passed) << report.max_violation;
}

TEST(ValidateLdi, DoubledBoxIsUnderCovered) {
  const auto ldi = build_ldi(arm(), example_q(), box(0.25, 2.0));
  const auto report = validate_ldi(ldi, arm(), 2000, 5, box(0.5, 4.0));
  EXPECT_GT(report.max_violation, 0.0);
  EXPECT_FALSE(report.passed);
}

TEST(BoxFromBounds, UsesSmallestSingularValue) {
  const auto b = box_from_bounds(arm(), example_q(), vec({0.2, 0.3}), vec({2, 2}));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dynamics::jacobian(arm(), example_q()));
  EXPECT_NEAR(b.position[0], 0.2 / svd.singularValues().minCoeff(), 1e-12);
  EXPECT_EQ(b.position[0], b.position[1]);
  EXPECT_EQ(b.velocity, vec({2, 2}));
}
