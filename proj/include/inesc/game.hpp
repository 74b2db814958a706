#pragma once

// Game definition: per-agent costs h_i over the stacked plant state, their
// partial gradients, and the pseudo-gradient maps in state and input space.

#include "inesc/types.hpp"

#include <functional>
#include <variant>
#include <vector>

namespace inesc {

// h(x) = 1/2 x'Qx + q'x + r over the full stacked state.
struct QuadraticCost {
  Matrix Q;
  Vector q;
  double r = 0.0;

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  // Constant Hessian, i.e. the symmetric part of Q times two halves.
  Matrix hessian() const { return 0.5 * (Q + Q.transpose()); }
};

// Arbitrary differentiable cost. When `gradient` is empty the full gradient
// falls back to central finite differences.
struct CallbackCost {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

class Cost {
 public:
  Cost(QuadraticCost c) : impl_(std::move(c)) {}  // NOLINT
  Cost(CallbackCost c) : impl_(std::move(c)) {}   // NOLINT

  double value(const Vector& x) const;
  // Gradient with respect to the full stacked state.
  Vector gradient(const Vector& x) const;

  bool is_quadratic() const {
    return std::holds_alternative<QuadraticCost>(impl_);
  }
  const QuadraticCost* quadratic() const {
    return std::get_if<QuadraticCost>(&impl_);
  }
  const CallbackCost* callback() const {
    return std::get_if<CallbackCost>(&impl_);
  }

 private:
  std::variant<QuadraticCost, CallbackCost> impl_;
};

// Central differences with step 1e-6 * (1 + |x_k|).
Vector finite_difference_gradient(const std::function<double(const Vector&)>& f,
                                  const Vector& x);

// Immutable after construction.
class GameModel {
 public:
  // input_matrices[i] is B_i (n_i x m_i); costs[i] is h_i over x in R^n.
  GameModel(std::vector<Matrix> input_matrices, std::vector<Cost> costs);

  std::size_t num_agents() const { return input_matrices_.size(); }
  Eigen::Index state_dim() const { return n_; }
  Eigen::Index input_dim() const { return m_; }
  Eigen::Index state_dim(AgentIndex i) const { return B(i).rows(); }
  Eigen::Index input_dim(AgentIndex i) const { return B(i).cols(); }
  Eigen::Index state_offset(AgentIndex i) const { return state_offsets_.at(i); }
  Eigen::Index input_offset(AgentIndex i) const { return input_offsets_.at(i); }

  const Matrix& B(AgentIndex i) const { return input_matrices_.at(i); }
  // Block-diagonal diag(B_1, ..., B_N).
  const Matrix& block_B() const { return block_B_; }
  const Cost& cost(AgentIndex i) const { return costs_.at(i); }
  bool is_quadratic() const;

 private:
  std::vector<Matrix> input_matrices_;
  std::vector<Cost> costs_;
  std::vector<Eigen::Index> state_offsets_;
  std::vector<Eigen::Index> input_offsets_;
  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;
  Matrix block_B_;
};

double eval_cost(const GameModel& game, AgentIndex i, const Vector& x);

// Partial gradient of h_i with respect to the agent's own state x_i.
Vector grad_xi(const GameModel& game, AgentIndex i, const Vector& x);

// F_x(x) = [grad_{x_1} h_1; ...; grad_{x_N} h_N].
Vector pseudo_gradient_x(const GameModel& game, const Vector& x);

// F(u) = B' F_x(B u).
Vector pseudo_gradient_u(const GameModel& game, const Vector& u);

// Constant Jacobian of F_x for quadratic games (n x n). Throws
// UnsupportedError otherwise.
Matrix state_jacobian(const GameModel& game);

// Constant Jacobian of F, B' J_x B (m x m). Quadratic games only.
Matrix input_jacobian(const GameModel& game);

// The three-agent scalar quadratic game used throughout the tests and the
// bundled configs:
//   y1 = 1.5(x1-1)^2 + 1.5 x1 x2 + x1 x3
//   y2 = -2 x2 x1 + 1.5(x2-2)^2 + x2 x3
//   y3 = -2.5 x3 x1 - x3 x2 + 1.5(x3-3)^2
GameModel three_agent_example();

}  // namespace inesc
