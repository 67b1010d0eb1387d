// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "funnelforge/dynamics.hpp"

namespace funnelforge::ldi {

/// The matrix set {N1 + N2 D N3 : ||D|| <= 1}. Fits produced here have
/// N2 = beta * L and N3 = I with an invertible left shape L, so membership is
/// ||L^-1 (S - N1)|| <= beta. Ball fits use L = I.
struct NormBoundTriple {
  Eigen::MatrixXd N1;
  Eigen::MatrixXd N2;
  Eigen::MatrixXd N3;
  double beta = 0.0;
  Eigen::MatrixXd shape;  // L

  static NormBoundTriple ball(Eigen::MatrixXd center, double radius);
  static NormBoundTriple shaped(Eigen::MatrixXd center, Eigen::MatrixXd shape, double radius);

  /// ||L^-1 (S - N1)|| - beta; <= 0 for members.
  double violation(const Eigen::MatrixXd& S) const;
  bool contains(const Eigen::MatrixXd& S, double tol = 1e-9) const { return violation(S) <= tol; }

  /// N1 + N2 D N3 for a given uncertainty realization.
  Eigen::MatrixXd realize(const Eigen::MatrixXd& delta) const { return N1 + N2 * delta * N3; }
};

/// Per-joint half-widths of the state box around (q_e, 0).
struct StateBox {
  Eigen::VectorXd position;  // rad
  Eigen::VectorXd velocity;  // rad/s
};

struct LdiOptions {
  int position_grid = 5;
  int velocity_grid = 3;
  double safety_factor = 1.1;
  /// Fit M^-1 as N1 (I + E) with ||E|| <= beta instead of a plain ball.
  bool relative_input_fit = true;
};

/// Norm-bound inclusion of the arm dynamics on a state box:
///   qddot in A qdot + B u,  x~ in J q~ (row-wise, mean-value form).
/// A covers -M^-1(q) C(q, qdot), B covers M^-1(q), J covers J(q).
/// A and J are ball fits; B is multiplicative when LdiOptions::relative_input_fit.
struct NormBoundLDI {
  NormBoundTriple A;
  NormBoundTriple B;
  NormBoundTriple J;
  Eigen::VectorXd q_e;
  StateBox box;
  double safety_factor = 1.0;
};

double spectral_norm(const Eigen::MatrixXd& M);

/// Mean center, radius = largest spectral distance to the mean. Throws EmptySamples.
NormBoundTriple fit_norm_bound(const std::vector<Eigen::MatrixXd>& samples);

/// Multiplicative fit: N1 = mean, L = N1, beta = max ||N1^-1 (S - N1)||.
/// Throws EmptySamples, DimensionMismatch, or NearSingular when the mean is
/// not invertible.
NormBoundTriple fit_relative_norm_bound(const std::vector<Eigen::MatrixXd>& samples);

/// -M^-1(q) C(q, qdot): the coefficient of qdot in qddot.
Eigen::MatrixXd velocity_coupling(const dynamics::RobotModel& model, const dynamics::JointState& s);

/// Fits the three triples on a tensor grid over the box, then inflates every
/// radius by options.safety_factor. Zero half-widths collapse that axis.
NormBoundLDI build_ldi(const dynamics::RobotModel& model, const Eigen::VectorXd& q_e,
                       const StateBox& box, const LdiOptions& options = {});

/// Box used for synthesis at q_e: position half-width x_min / sigma_min(J(q_e)),
/// velocity half-width qdotbar.
StateBox box_from_bounds(const dynamics::RobotModel& model, const Eigen::VectorXd& q_e,
                         const Eigen::VectorXd& xbar, const Eigen::VectorXd& qdotbar);

struct ValidationReport {
  int samples = 0;
  double max_violation = 0.0;  // max over samples and triples of ||S - N1|| - beta, floored at 0
  double max_violation_A = 0.0;
  double max_violation_B = 0.0;
  double max_violation_J = 0.0;
  bool passed = false;         // max_violation <= 1e-9
};

/// Draws n_random uniform states in `box` (defaults to the LDI's own box).
ValidationReport validate_ldi(const NormBoundLDI& ldi, const dynamics::RobotModel& model,
                              int n_random, std::uint64_t seed = 1,
                              const std::optional<StateBox>& box = std::nullopt);

}  // namespace funnelforge::ldi
