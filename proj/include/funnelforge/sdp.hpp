// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace funnelforge::sdp {

/// A matrix whose entries are affine functions of the flattened decision
/// vector x:  F(x) = F0 + sum_k x_k F_k.  Coefficients are kept per scalar
/// variable, ordered by index.
class AffineMatrix {
 public:
  AffineMatrix() = default;
  explicit AffineMatrix(Eigen::MatrixXd constant) : constant_(std::move(constant)) {}

  static AffineMatrix zero(Eigen::Index rows, Eigen::Index cols);
  static AffineMatrix identity(Eigen::Index n);
  /// x_index * coeff.
  static AffineMatrix term(int index, Eigen::MatrixXd coeff);

  Eigen::Index rows() const { return constant_.rows(); }
  Eigen::Index cols() const { return constant_.cols(); }
  const Eigen::MatrixXd& constant() const { return constant_; }
  const std::map<int, Eigen::MatrixXd>& terms() const { return terms_; }

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;
  AffineMatrix transpose() const;
  /// True when F0 and every F_k are symmetric to within tol.
  bool is_symmetric(double tol = 1e-12) const;

  AffineMatrix& operator+=(const AffineMatrix& other);
  AffineMatrix& operator-=(const AffineMatrix& other);
  AffineMatrix& operator*=(double s);

  friend AffineMatrix operator+(AffineMatrix a, const AffineMatrix& b) { return a += b; }
  friend AffineMatrix operator-(AffineMatrix a, const AffineMatrix& b) { return a -= b; }
  friend AffineMatrix operator-(AffineMatrix a) { return a *= -1.0; }
  friend AffineMatrix operator*(double s, AffineMatrix a) { return a *= s; }
  friend AffineMatrix operator*(const Eigen::MatrixXd& left, const AffineMatrix& a);
  friend AffineMatrix operator*(const AffineMatrix& a, const Eigen::MatrixXd& right);
  /// Scalar-valued (1x1) affine expression times a constant matrix.
  static AffineMatrix scale(const AffineMatrix& scalar, const Eigen::MatrixXd& m);

  /// Dense block assembly; every row of blocks must agree in heights and
  /// every column in widths.
  static AffineMatrix blocks(const std::vector<std::vector<AffineMatrix>>& rows);

  /// Symmetric assembly from the lower triangle: lower[i][j] for j <= i. The
  /// upper blocks are the transposes.
  static AffineMatrix symmetric_from_lower(const std::vector<std::vector<AffineMatrix>>& lower);

 private:
  Eigen::MatrixXd constant_;
  std::map<int, Eigen::MatrixXd> terms_;
};

enum class Sense { PositiveSemidefinite, NegativeSemidefinite };

enum class VariableKind { Scalar, Symmetric, Matrix };

struct VariableInfo {
  std::string name;
  VariableKind kind = VariableKind::Scalar;
  int rows = 1;
  int cols = 1;
  int offset = 0;  // first index in the flattened decision vector
  int size = 1;    // number of scalar unknowns
  std::optional<double> lower;
  std::optional<double> upper;
};

struct Constraint {
  std::string name;
  AffineMatrix block;
  Sense sense = Sense::PositiveSemidefinite;
};

using ValueMap = std::map<std::string, Eigen::MatrixXd>;

/// maximize log det(detvar) subject to affine matrix inequalities.
class MaxDetProblem {
 public:
  /// Bounds become 1x1 constraints named "<name>.lower" / "<name>.upper".
  AffineMatrix add_scalar(const std::string& name, std::optional<double> lower = std::nullopt,
                          std::optional<double> upper = std::nullopt);
  AffineMatrix add_symmetric(const std::string& name, int n);
  AffineMatrix add_matrix(const std::string& name, int rows, int cols);

  void maximize_log_det(const std::string& name);
  void add_constraint(std::string name, AffineMatrix block, Sense sense = Sense::PositiveSemidefinite);

  /// The affine expression of a declared variable.
  AffineMatrix variable(const std::string& name) const;
  const VariableInfo& info(const std::string& name) const;

  int num_scalars() const { return num_scalars_; }
  const std::vector<VariableInfo>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::string& detvar() const { return detvar_; }

  /// Throws ValidationError when a block is not symmetric or detvar is not a
  /// declared symmetric variable.
  void validate() const;

  Eigen::VectorXd flatten(const ValueMap& values) const;
  ValueMap unflatten(const Eigen::VectorXd& x) const;

 private:
  int push_variable(VariableInfo info);

  std::vector<VariableInfo> variables_;
  std::vector<Constraint> constraints_;
  std::string detvar_;
  int num_scalars_ = 0;
};

struct SolverOptions {
  double tol = 1e-7;
  int max_iter = 200;             // Newton steps per phase
  double barrier_factor = 10.0;
  double feasibility_margin = 1e-9;
  double domain_radius = 1e6;     // ||x|| <= R keeps phase 1 bounded
};

enum class Status { Optimal, Infeasible, MaxIterations };

const char* to_string(Status s);

struct MaxDetSolution {
  Status status = Status::Infeasible;
  ValueMap values;
  Eigen::VectorXd x;
  double objective = 0.0;              // log det of detvar
  double max_residual = 0.0;           // most negative sign-adjusted eigenvalue
  std::vector<double> residuals;       // per constraint, same order as problem
  int phase1_iterations = 0;
  int phase2_iterations = 0;
};

MaxDetSolution solve(const MaxDetProblem& problem, const SolverOptions& options = {});

struct ResidualReport {
  std::vector<std::string> names;
  std::vector<double> min_eigenvalues;  // sign-adjusted: >= 0 means satisfied
  double max_residual = 0.0;            // min over constraints (0 when none)
  double objective = 0.0;               // log det of detvar, -inf when not PD
  bool detvar_positive_definite = false;
};

/// Pure verification of a candidate; does not share code with the solver.
/// Throws DimensionMismatch when a value's shape differs from its declaration
/// or a variable is missing.
ResidualReport check_solution(const MaxDetProblem& problem, const ValueMap& candidate);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
Eigen::VectorXd jacobi_eigenvalues(Eigen::MatrixXd A, double tol = 1e-14, int max_sweeps = 100);

}  // namespace funnelforge::sdp
