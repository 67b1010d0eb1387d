// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/ldi.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "funnelforge/error.hpp"

namespace funnelforge::ldi {

using dynamics::JointState;
using dynamics::RobotModel;

namespace {

// Symmetric offsets in [-1, 1]; a single point when count == 1.
std::vector<double> unit_grid(int count) {
  if (count <= 1) return {0.0};
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    g[static_cast<std::size_t>(k)] = 2.0 * k / (count - 1) - 1.0;
  }
  return g;
}

// All tensor-product points of `axis` offsets scaled by half-widths.
std::vector<Eigen::VectorXd> tensor_grid(const Eigen::VectorXd& half_widths, int count) {
  const auto n = half_widths.size();
  const auto axis = unit_grid(count);
  std::vector<Eigen::VectorXd> points;
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  while (true) {
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) p[i] = half_widths[i] * axis[idx[static_cast<std::size_t>(i)]];
    points.push_back(p);
    Eigen::Index i = 0;
    for (; i < n; ++i) {
      auto& k = idx[static_cast<std::size_t>(i)];
      if (++k < axis.size()) break;
      k = 0;
    }
    if (i == n) break;
  }
  return points;
}

Eigen::MatrixXd inverse_mass(const RobotModel& model, const Eigen::VectorXd& q) {
  const Eigen::MatrixXd M = dynamics::mass_matrix(model, q);
  return M.llt().solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
}

}  // namespace

NormBoundTriple NormBoundTriple::ball(Eigen::MatrixXd center, double radius) {
  NormBoundTriple t;
  const auto n = center.rows();
  const auto m = center.cols();
  t.N1 = std::move(center);
  t.N2 = radius * Eigen::MatrixXd::Identity(n, n);
  t.N3 = Eigen::MatrixXd::Identity(n, m);
  t.beta = radius;
  t.shape = Eigen::MatrixXd::Identity(n, n);
  return t;
}

NormBoundTriple NormBoundTriple::shaped(Eigen::MatrixXd center, Eigen::MatrixXd shape, double radius) {
  NormBoundTriple t;
  const auto m = center.cols();
  t.N1 = std::move(center);
  t.N2 = radius * shape;
  t.N3 = Eigen::MatrixXd::Identity(shape.cols(), m);
  t.beta = radius;
  t.shape = std::move(shape);
  return t;
}

double NormBoundTriple::violation(const Eigen::MatrixXd& S) const {
  if (shape.size() == 0 || shape.isIdentity(0.0)) return spectral_norm(S - N1) - beta;
  return spectral_norm(shape.fullPivLu().solve(S - N1)) - beta;
}

double spectral_norm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

NormBoundTriple fit_norm_bound(const std::vector<Eigen::MatrixXd>& samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptySamples, "fit_norm_bound needs at least one sample");
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(samples.front().rows(), samples.front().cols());
  for (const auto& s : samples) {
    if (s.rows() != mean.rows() || s.cols() != mean.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "fit_norm_bound: samples differ in shape");
    }
    mean += s;
  }
  mean /= static_cast<double>(samples.size());
  double beta = 0.0;
  for (const auto& s : samples) beta = std::max(beta, spectral_norm(s - mean));
  return NormBoundTriple::ball(std::move(mean), beta);
}

NormBoundTriple fit_relative_norm_bound(const std::vector<Eigen::MatrixXd>& samples) {
  const NormBoundTriple ball = fit_norm_bound(samples);
  if (ball.N1.rows() != ball.N1.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "fit_relative_norm_bound needs square samples");
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(ball.N1);
  if (!lu.isInvertible()) throw Error(ErrorCode::NearSingular, "fit_relative_norm_bound: singular mean");
  double beta = 0.0;
  for (const auto& s : samples) beta = std::max(beta, spectral_norm(lu.solve(s - ball.N1)));
  return NormBoundTriple::shaped(ball.N1, ball.N1, beta);
}

Eigen::MatrixXd velocity_coupling(const RobotModel& model, const JointState& s) {
  return -inverse_mass(model, s.q) * dynamics::coriolis_matrix(model, s);
}

NormBoundLDI build_ldi(const RobotModel& model, const Eigen::VectorXd& q_e, const StateBox& box,
                       const LdiOptions& options) {
  if (options.position_grid < 1 || options.velocity_grid < 1) {
    throw Error(ErrorCode::ValidationError, "build_ldi: grid densities must be positive");
  }
  if ((box.position.array() < 0.0).any() || (box.velocity.array() < 0.0).any()) {
    throw Error(ErrorCode::ValidationError, "build_ldi: box half-widths must be non-negative");
  }
  const auto positions = tensor_grid(box.position, options.position_grid);
  const auto velocities = tensor_grid(box.velocity, options.velocity_grid);

  std::vector<Eigen::MatrixXd> a_samples, b_samples, j_samples;
  a_samples.reserve(positions.size() * velocities.size());
  for (const auto& dq : positions) {
    const Eigen::VectorXd q = q_e + dq;
    b_samples.push_back(inverse_mass(model, q));
    j_samples.push_back(dynamics::jacobian(model, q));
    for (const auto& v : velocities) a_samples.push_back(velocity_coupling(model, {q, v}));
  }

  NormBoundLDI out;
  out.A = fit_norm_bound(a_samples);
  out.B = options.relative_input_fit ? fit_relative_norm_bound(b_samples) : fit_norm_bound(b_samples);
  out.J = fit_norm_bound(j_samples);
  for (auto* t : {&out.A, &out.B, &out.J}) {
    *t = NormBoundTriple::shaped(t->N1, t->shape, t->beta * options.safety_factor);
  }
  out.q_e = q_e;
  out.box = box;
  out.safety_factor = options.safety_factor;
  return out;
}

StateBox box_from_bounds(const RobotModel& model, const Eigen::VectorXd& q_e,
                         const Eigen::VectorXd& xbar, const Eigen::VectorXd& qdotbar) {
  const Eigen::MatrixXd J = dynamics::jacobian(model, q_e);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const double sigma_min = svd.singularValues().minCoeff();
  const double half = sigma_min > 0.0 ? xbar.minCoeff() / sigma_min
                                      : std::numeric_limits<double>::infinity();
  return {Eigen::VectorXd::Constant(q_e.size(), half), qdotbar};
}

ValidationReport validate_ldi(const NormBoundLDI& ldi, const RobotModel& model, int n_random,
                              std::uint64_t seed, const std::optional<StateBox>& box) {
  const StateBox& b = box ? *box : ldi.box;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto n = ldi.q_e.size();
  ValidationReport r;
  r.samples = std::max(n_random, 0);
  for (int k = 0; k < n_random; ++k) {
    Eigen::VectorXd dq(n), v(n);
    for (Eigen::Index i = 0; i < n; ++i) dq[i] = b.position[i] * unit(rng);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = b.velocity[i] * unit(rng);
    const JointState s{ldi.q_e + dq, v};
    r.max_violation_A = std::max(r.max_violation_A, ldi.A.violation(velocity_coupling(model, s)));
    r.max_violation_B = std::max(r.max_violation_B, ldi.B.violation(inverse_mass(model, s.q)));
    r.max_violation_J = std::max(r.max_violation_J, ldi.J.violation(dynamics::jacobian(model, s.q)));
  }
  r.max_violation = std::max({r.max_violation_A, r.max_violation_B, r.max_violation_J});
  r.passed = r.max_violation <= 1e-9;
  return r;
}

}  // namespace funnelforge::ldi
