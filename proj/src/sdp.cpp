// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "funnelforge/error.hpp"

namespace funnelforge::sdp {

// ---------------------------------------------------------------------------
// AffineMatrix

namespace {

void add_term(std::map<int, Eigen::MatrixXd>& terms, int index, const Eigen::MatrixXd& coeff) {
  if (coeff.isZero(0.0)) return;
  auto it = terms.find(index);
  if (it == terms.end()) {
    terms.emplace(index, coeff);
    return;
  }
  it->second += coeff;
  if (it->second.isZero(0.0)) terms.erase(it);
}

void require_same_shape(const AffineMatrix& a, const AffineMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, std::string("AffineMatrix ") + op + ": shape mismatch");
  }
}

}  // namespace

AffineMatrix AffineMatrix::zero(Eigen::Index rows, Eigen::Index cols) {
  return AffineMatrix(Eigen::MatrixXd::Zero(rows, cols));
}

AffineMatrix AffineMatrix::identity(Eigen::Index n) {
  return AffineMatrix(Eigen::MatrixXd::Identity(n, n));
}

AffineMatrix AffineMatrix::term(int index, Eigen::MatrixXd coeff) {
  AffineMatrix m(Eigen::MatrixXd::Zero(coeff.rows(), coeff.cols()));
  add_term(m.terms_, index, coeff);
  return m;
}

Eigen::MatrixXd AffineMatrix::evaluate(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd out = constant_;
  for (const auto& [k, c] : terms_) {
    if (k >= x.size()) throw Error(ErrorCode::DimensionMismatch, "AffineMatrix::evaluate: x too short");
    out += x[k] * c;
  }
  return out;
}

AffineMatrix AffineMatrix::transpose() const {
  AffineMatrix out(constant_.transpose());
  for (const auto& [k, c] : terms_) out.terms_.emplace(k, c.transpose());
  return out;
}

bool AffineMatrix::is_symmetric(double tol) const {
  if (rows() != cols()) return false;
  if (constant_.size() && (constant_ - constant_.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  for (const auto& [k, c] : terms_) {
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

AffineMatrix& AffineMatrix::operator+=(const AffineMatrix& other) {
  require_same_shape(*this, other, "+");
  constant_ += other.constant_;
  for (const auto& [k, c] : other.terms_) add_term(terms_, k, c);
  return *this;
}

AffineMatrix& AffineMatrix::operator-=(const AffineMatrix& other) {
  require_same_shape(*this, other, "-");
  constant_ -= other.constant_;
  for (const auto& [k, c] : other.terms_) add_term(terms_, k, -c);
  return *this;
}

AffineMatrix& AffineMatrix::operator*=(double s) {
  constant_ *= s;
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [k, c] : terms_) c *= s;
  return *this;
}

AffineMatrix operator*(const Eigen::MatrixXd& left, const AffineMatrix& a) {
  if (left.cols() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "matrix * AffineMatrix");
  AffineMatrix out(left * a.constant_);
  for (const auto& [k, c] : a.terms_) add_term(out.terms_, k, left * c);
  return out;
}

AffineMatrix operator*(const AffineMatrix& a, const Eigen::MatrixXd& right) {
  if (a.cols() != right.rows()) throw Error(ErrorCode::DimensionMismatch, "AffineMatrix * matrix");
  AffineMatrix out(a.constant_ * right);
  for (const auto& [k, c] : a.terms_) add_term(out.terms_, k, c * right);
  return out;
}

AffineMatrix AffineMatrix::scale(const AffineMatrix& scalar, const Eigen::MatrixXd& m) {
  if (scalar.rows() != 1 || scalar.cols() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "AffineMatrix::scale expects a 1x1 expression");
  }
  AffineMatrix out(scalar.constant_(0, 0) * m);
  for (const auto& [k, c] : scalar.terms_) add_term(out.terms_, k, c(0, 0) * m);
  return out;
}

AffineMatrix AffineMatrix::blocks(const std::vector<std::vector<AffineMatrix>>& rows) {
  if (rows.empty() || rows.front().empty()) return AffineMatrix(Eigen::MatrixXd(0, 0));
  const std::size_t nc = rows.front().size();
  std::vector<Eigen::Index> heights, widths(nc);
  for (std::size_t j = 0; j < nc; ++j) widths[j] = rows.front()[j].cols();
  Eigen::Index total_rows = 0, total_cols = 0;
  for (const auto& r : rows) {
    if (r.size() != nc) throw Error(ErrorCode::DimensionMismatch, "AffineMatrix::blocks: ragged rows");
    heights.push_back(r.front().rows());
    for (std::size_t j = 0; j < nc; ++j) {
      if (r[j].rows() != heights.back() || r[j].cols() != widths[j]) {
        throw Error(ErrorCode::DimensionMismatch, "AffineMatrix::blocks: inconsistent block sizes");
      }
    }
    total_rows += heights.back();
  }
  for (auto w : widths) total_cols += w;

  AffineMatrix out(Eigen::MatrixXd::Zero(total_rows, total_cols));
  Eigen::Index r0 = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Eigen::Index c0 = 0;
    for (std::size_t j = 0; j < nc; ++j) {
      const AffineMatrix& b = rows[i][j];
      out.constant_.block(r0, c0, b.rows(), b.cols()) = b.constant_;
      for (const auto& [k, c] : b.terms_) {
        auto it = out.terms_.find(k);
        if (it == out.terms_.end()) {
          it = out.terms_.emplace(k, Eigen::MatrixXd::Zero(total_rows, total_cols)).first;
        }
        it->second.block(r0, c0, b.rows(), b.cols()) = c;
      }
      c0 += widths[j];
    }
    r0 += heights[i];
  }
  return out;
}

AffineMatrix AffineMatrix::symmetric_from_lower(const std::vector<std::vector<AffineMatrix>>& lower) {
  const std::size_t n = lower.size();
  std::vector<std::vector<AffineMatrix>> full(n, std::vector<AffineMatrix>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (lower[i].size() != i + 1) {
      throw Error(ErrorCode::DimensionMismatch, "symmetric_from_lower: row i needs i + 1 blocks");
    }
    for (std::size_t j = 0; j <= i; ++j) {
      full[i][j] = lower[i][j];
      if (j != i) full[j][i] = lower[i][j].transpose();
    }
  }
  return blocks(full);
}

// ---------------------------------------------------------------------------
// MaxDetProblem

int MaxDetProblem::push_variable(VariableInfo info) {
  for (const auto& v : variables_) {
    if (v.name == info.name) {
      throw Error(ErrorCode::ValidationError, "duplicate variable name '" + info.name + "'");
    }
  }
  info.offset = num_scalars_;
  num_scalars_ += info.size;
  variables_.push_back(std::move(info));
  return variables_.back().offset;
}

AffineMatrix MaxDetProblem::add_scalar(const std::string& name, std::optional<double> lower,
                                       std::optional<double> upper) {
  VariableInfo info{name, VariableKind::Scalar, 1, 1, 0, 1, lower, upper};
  push_variable(std::move(info));
  AffineMatrix v = variable(name);
  if (lower) add_constraint(name + ".lower", v - AffineMatrix(Eigen::MatrixXd::Constant(1, 1, *lower)));
  if (upper) add_constraint(name + ".upper", AffineMatrix(Eigen::MatrixXd::Constant(1, 1, *upper)) - v);
  return v;
}

AffineMatrix MaxDetProblem::add_symmetric(const std::string& name, int n) {
  push_variable({name, VariableKind::Symmetric, n, n, 0, n * (n + 1) / 2, {}, {}});
  return variable(name);
}

AffineMatrix MaxDetProblem::add_matrix(const std::string& name, int rows, int cols) {
  push_variable({name, VariableKind::Matrix, rows, cols, 0, rows * cols, {}, {}});
  return variable(name);
}

void MaxDetProblem::maximize_log_det(const std::string& name) {
  if (info(name).kind != VariableKind::Symmetric) {
    throw Error(ErrorCode::ValidationError, "detvar '" + name + "' must be a symmetric variable");
  }
  detvar_ = name;
}

void MaxDetProblem::add_constraint(std::string name, AffineMatrix block, Sense sense) {
  if (block.rows() != block.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "constraint '" + name + "' is not square");
  }
  constraints_.push_back({std::move(name), std::move(block), sense});
}

const VariableInfo& MaxDetProblem::info(const std::string& name) const {
  for (const auto& v : variables_) {
    if (v.name == name) return v;
  }
  throw Error(ErrorCode::ValidationError, "unknown variable '" + name + "'");
}

AffineMatrix MaxDetProblem::variable(const std::string& name) const {
  const VariableInfo& v = info(name);
  AffineMatrix out = AffineMatrix::zero(v.rows, v.cols);
  int k = v.offset;
  switch (v.kind) {
    case VariableKind::Scalar:
      out += AffineMatrix::term(k, Eigen::MatrixXd::Ones(1, 1));
      break;
    case VariableKind::Symmetric:
      for (int i = 0; i < v.rows; ++i) {
        for (int j = i; j < v.cols; ++j) {
          Eigen::MatrixXd e = Eigen::MatrixXd::Zero(v.rows, v.cols);
          e(i, j) = 1.0;
          e(j, i) = 1.0;
          out += AffineMatrix::term(k++, e);
        }
      }
      break;
    case VariableKind::Matrix:
      for (int i = 0; i < v.rows; ++i) {
        for (int j = 0; j < v.cols; ++j) {
          Eigen::MatrixXd e = Eigen::MatrixXd::Zero(v.rows, v.cols);
          e(i, j) = 1.0;
          out += AffineMatrix::term(k++, e);
        }
      }
      break;
  }
  return out;
}

void MaxDetProblem::validate() const {
  if (detvar_.empty()) throw Error(ErrorCode::ValidationError, "no log-det objective declared");
  if (info(detvar_).kind != VariableKind::Symmetric) {
    throw Error(ErrorCode::ValidationError, "detvar must be symmetric");
  }
  for (const auto& c : constraints_) {
    if (!c.block.is_symmetric(1e-12)) {
      throw Error(ErrorCode::ValidationError, "constraint '" + c.name + "' is not symmetric");
    }
    for (const auto& [k, coeff] : c.block.terms()) {
      if (k < 0 || k >= num_scalars_) {
        throw Error(ErrorCode::ValidationError, "constraint '" + c.name + "' references unknown variable");
      }
    }
  }
}

Eigen::VectorXd MaxDetProblem::flatten(const ValueMap& values) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(num_scalars_);
  for (const auto& v : variables_) {
    auto it = values.find(v.name);
    if (it == values.end()) {
      throw Error(ErrorCode::DimensionMismatch, "missing value for variable '" + v.name + "'");
    }
    const Eigen::MatrixXd& m = it->second;
    if (m.rows() != v.rows || m.cols() != v.cols) {
      throw Error(ErrorCode::DimensionMismatch, "value for '" + v.name + "' has wrong shape");
    }
    int k = v.offset;
    if (v.kind == VariableKind::Symmetric) {
      for (int i = 0; i < v.rows; ++i) {
        for (int j = i; j < v.cols; ++j) x[k++] = 0.5 * (m(i, j) + m(j, i));
      }
    } else {
      for (int i = 0; i < v.rows; ++i) {
        for (int j = 0; j < v.cols; ++j) x[k++] = m(i, j);
      }
    }
  }
  return x;
}

ValueMap MaxDetProblem::unflatten(const Eigen::VectorXd& x) const {
  ValueMap out;
  for (const auto& v : variables_) {
    Eigen::MatrixXd m(v.rows, v.cols);
    int k = v.offset;
    if (v.kind == VariableKind::Symmetric) {
      for (int i = 0; i < v.rows; ++i) {
        for (int j = i; j < v.cols; ++j) {
          m(i, j) = x[k];
          m(j, i) = x[k++];
        }
      }
    } else {
      for (int i = 0; i < v.rows; ++i) {
        for (int j = 0; j < v.cols; ++j) m(i, j) = x[k++];
      }
    }
    out.emplace(v.name, std::move(m));
  }
  return out;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::MaxIterations: return "MaxIterations";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Solver: log-barrier path following with damped Newton steps.

namespace {

// G(y) = F0 + sum_k y_k F_k, required positive definite, barrier weight w.
struct BarrierBlock {
  Eigen::MatrixXd F0;
  std::vector<std::pair<int, Eigen::MatrixXd>> terms;
  double weight = 1.0;

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& y) const {
    Eigen::MatrixXd G = F0;
    for (const auto& [k, c] : terms) G += y[k] * c;
    return G;
  }
};

// sign * D F D with Jacobi scaling D = diag(1 / sqrt(max diagonal magnitude)).
BarrierBlock prepare_block(const AffineMatrix& block, double sign) {
  const Eigen::Index n = block.rows();
  Eigen::VectorXd d = block.constant().diagonal().cwiseAbs();
  for (const auto& [k, c] : block.terms()) d = d.cwiseMax(c.diagonal().cwiseAbs());
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = d[i] > 1e-300 ? 1.0 / std::sqrt(d[i]) : 1.0;
  const auto D = s.asDiagonal();
  BarrierBlock out;
  out.F0 = sign * (D * block.constant() * D);
  for (const auto& [k, c] : block.terms()) out.terms.emplace_back(k, sign * (D * c * D));
  return out;
}

// Phi(y) = c.y + sum_b w_b (-log det G_b(y)) - log(R^2 - ||y[0:nx]||^2)
struct BarrierFunction {
  std::vector<BarrierBlock> blocks;
  Eigen::VectorXd linear;
  Eigen::Index ball_dims = 0;
  double radius_sq = 1e12;

  double value(const Eigen::VectorXd& y) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double slack = radius_sq - y.head(ball_dims).squaredNorm();
    if (!(slack > 0.0)) return inf;
    double f = linear.dot(y) - std::log(slack);
    for (const auto& b : blocks) {
      Eigen::LLT<Eigen::MatrixXd> llt(b.evaluate(y));
      if (llt.info() != Eigen::Success) return inf;
      const Eigen::MatrixXd& L = llt.matrixLLT();
      double logdet = 0.0;
      for (Eigen::Index i = 0; i < L.rows(); ++i) {
        if (!(L(i, i) > 0.0)) return inf;
        logdet += 2.0 * std::log(L(i, i));
      }
      f -= b.weight * logdet;
    }
    return std::isfinite(f) ? f : inf;
  }

  // Gradient and Hessian at a point in the domain.
  void derivatives(const Eigen::VectorXd& y, Eigen::VectorXd& g, Eigen::MatrixXd& H) const {
    const Eigen::Index n = y.size();
    g = linear;
    H = Eigen::MatrixXd::Zero(n, n);
    const Eigen::VectorXd x = y.head(ball_dims);
    const double slack = radius_sq - x.squaredNorm();
    g.head(ball_dims) += 2.0 * x / slack;
    H.topLeftCorner(ball_dims, ball_dims) +=
        2.0 / slack * Eigen::MatrixXd::Identity(ball_dims, ball_dims) + 4.0 / (slack * slack) * x * x.transpose();

    std::vector<Eigen::MatrixXd> W;
    for (const auto& b : blocks) {
      Eigen::LLT<Eigen::MatrixXd> llt(b.evaluate(y));
      const auto L = llt.matrixL();
      W.clear();
      W.reserve(b.terms.size());
      for (const auto& [k, c] : b.terms) {
        const Eigen::MatrixXd X = L.solve(c);
        W.push_back(L.solve(X.transpose()).transpose());
      }
      for (std::size_t p = 0; p < b.terms.size(); ++p) {
        const int kp = b.terms[p].first;
        g[kp] -= b.weight * W[p].trace();
        for (std::size_t q = 0; q <= p; ++q) {
          const int kq = b.terms[q].first;
          const double h = b.weight * W[p].cwiseProduct(W[q]).sum();
          H(kp, kq) += h;
          if (kp != kq) H(kq, kp) += h;
        }
      }
    }
  }
};

enum class CenterResult { Converged, Stalled, Budget };

// Damped Newton minimization of phi from y (kept strictly inside the domain).
CenterResult center(const BarrierFunction& phi, Eigen::VectorXd& y, int& iterations, int max_iter,
                    const std::function<bool(const Eigen::VectorXd&)>& early_exit = {}) {
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  double f = phi.value(y);
  while (true) {
    phi.derivatives(y, g, H);
    // Variables absent from every block have a zero row; pin them.
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
      if (H(i, i) <= 0.0) H(i, i) = 1.0;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd step = ldlt.solve(-g);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      const double reg = 1e-10 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
      step = (H + reg * Eigen::MatrixXd::Identity(H.rows(), H.cols())).ldlt().solve(-g);
    }
    const double decrement_sq = -g.dot(step);
    // The second term is the rounding floor of f; below it Armijo is noise.
    if (!(decrement_sq > std::max(2e-10, 1e-11 * std::abs(f)))) return CenterResult::Converged;
    if (iterations >= max_iter) return CenterResult::Budget;

    double alpha = 1.0;
    double f_new = phi.value(y + step);
    while (!(f_new <= f - 0.25 * alpha * decrement_sq) && alpha > 1e-14) {
      alpha *= 0.5;
      f_new = phi.value(y + alpha * step);
    }
    if (alpha <= 1e-14) {
      // Below the rounding floor of f the line search is blind; a small
      // decrement means the point is already well centered.
      return decrement_sq < 1e-5 ? CenterResult::Converged : CenterResult::Stalled;
    }
    y += alpha * step;
    f = f_new;
    ++iterations;
    if (early_exit && early_exit(y)) return CenterResult::Converged;
  }
}

double min_eigenvalue(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

MaxDetSolution solve(const MaxDetProblem& problem, const SolverOptions& options) {
  problem.validate();
  const int nx = problem.num_scalars();
  const AffineMatrix det_expr = problem.variable(problem.detvar());

  std::vector<BarrierBlock> base;
  base.reserve(problem.constraints().size() + 1);
  Eigen::Index total_dim = 0;
  for (const auto& c : problem.constraints()) {
    base.push_back(prepare_block(c.block, c.sense == Sense::PositiveSemidefinite ? 1.0 : -1.0));
    total_dim += c.block.rows();
  }
  const BarrierBlock det_block = prepare_block(det_expr, 1.0);

  MaxDetSolution sol;
  const double mu = options.barrier_factor;
  const double radius_sq = options.domain_radius * options.domain_radius;

  // Phase 1: minimize s subject to G_j(x) + s I > 0, D(x) + s I > 0, s >= -1.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nx);
  {
    BarrierFunction phi;
    phi.ball_dims = nx;
    phi.radius_sq = radius_sq;
    phi.linear = Eigen::VectorXd::Zero(nx + 1);
    double worst = 0.0;
    auto add_shifted = [&](const BarrierBlock& b) {
      BarrierBlock s = b;
      s.terms.emplace_back(nx, Eigen::MatrixXd::Identity(b.F0.rows(), b.F0.cols()));
      worst = std::max(worst, -min_eigenvalue(b.F0));
      phi.blocks.push_back(std::move(s));
    };
    for (const auto& b : base) add_shifted(b);
    add_shifted(det_block);
    BarrierBlock floor;
    floor.F0 = Eigen::MatrixXd::Ones(1, 1);
    floor.terms.emplace_back(nx, Eigen::MatrixXd::Ones(1, 1));
    phi.blocks.push_back(floor);

    Eigen::Index m1 = 1;  // ball
    for (const auto& b : phi.blocks) m1 += b.F0.rows();

    Eigen::VectorXd y(nx + 1);
    y.head(nx) = x;
    y[nx] = worst + 1.0;

    const double margin = options.feasibility_margin;
    auto strictly_feasible = [&](const Eigen::VectorXd& yy) { return yy[nx] < -std::max(margin, 1e-3); };
    double t = 1.0;
    bool feasible = false;
    while (true) {
      phi.linear[nx] = t;
      const CenterResult r = center(phi, y, sol.phase1_iterations, options.max_iter, strictly_feasible);
      if (y[nx] < -margin) {
        feasible = true;
        break;
      }
      if (r == CenterResult::Budget) {
        sol.status = Status::MaxIterations;
        sol.x = y.head(nx);
        sol.values = problem.unflatten(sol.x);
        return sol;
      }
      // On the central path s(t) - m/t is a lower bound on the optimal s.
      if (y[nx] - static_cast<double>(m1) / t > 0.0 || t > 1e13) break;
      t *= mu;
    }
    if (!feasible) {
      sol.status = Status::Infeasible;
      sol.x = y.head(nx);
      sol.values = problem.unflatten(sol.x);
      return sol;
    }
    x = y.head(nx);
  }

  // Phase 2: minimize -t log det D - sum log det G_j on the central path.
  {
    BarrierFunction phi;
    phi.ball_dims = nx;
    phi.radius_sq = radius_sq;
    phi.linear = Eigen::VectorXd::Zero(nx);
    phi.blocks = base;
    phi.blocks.push_back(det_block);
    const double m = static_cast<double>(total_dim + 1);
    double t = 1.0;
    sol.status = Status::MaxIterations;
    while (true) {
      phi.blocks.back().weight = t;
      const CenterResult r = center(phi, x, sol.phase2_iterations, options.max_iter);
      if (r == CenterResult::Budget) break;
      if (m / t <= options.tol) {
        sol.status = Status::Optimal;
        break;
      }
      t *= mu;
    }
  }

  sol.x = x;
  sol.values = problem.unflatten(x);
  sol.residuals.reserve(problem.constraints().size());
  sol.max_residual = problem.constraints().empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (const auto& c : problem.constraints()) {
    const Eigen::MatrixXd F = c.block.evaluate(x);
    const double r = c.sense == Sense::PositiveSemidefinite ? min_eigenvalue(F) : min_eigenvalue(-F);
    sol.residuals.push_back(r);
    sol.max_residual = std::min(sol.max_residual, r);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(det_expr.evaluate(x));
  sol.objective = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return sol;
}

// ---------------------------------------------------------------------------
// Independent verification

Eigen::VectorXd jacobi_eigenvalues(Eigen::MatrixXd A, double tol, int max_sweeps) {
  const Eigen::Index n = A.rows();
  if (n != A.cols()) throw Error(ErrorCode::DimensionMismatch, "jacobi_eigenvalues: not square");
  A = 0.5 * (A + A.transpose()).eval();
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    }
    if (std::sqrt(off) <= tol * scale) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (A(p, q) == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Eigen::VectorXd ev = A.diagonal();
  std::sort(ev.data(), ev.data() + ev.size());
  return ev;
}

ResidualReport check_solution(const MaxDetProblem& problem, const ValueMap& candidate) {
  const Eigen::VectorXd x = problem.flatten(candidate);
  ResidualReport report;
  report.max_residual = problem.constraints().empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (const auto& c : problem.constraints()) {
    Eigen::MatrixXd F = c.block.evaluate(x);
    if (c.sense == Sense::NegativeSemidefinite) F = -F;
    const Eigen::VectorXd ev = jacobi_eigenvalues(F);
    const double r = ev.size() ? ev[0] : std::numeric_limits<double>::infinity();
    report.names.push_back(c.name);
    report.min_eigenvalues.push_back(r);
    report.max_residual = std::min(report.max_residual, r);
  }
  if (!problem.detvar().empty()) {
    const Eigen::VectorXd ev = jacobi_eigenvalues(candidate.at(problem.detvar()));
    report.detvar_positive_definite = ev.size() > 0 && ev[0] > 0.0;
    report.objective = report.detvar_positive_definite ? ev.array().log().sum()
                                                       : -std::numeric_limits<double>::infinity();
  }
  return report;
}

}  // namespace funnelforge::sdp
