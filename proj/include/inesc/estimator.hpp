#pragma once

// Per-agent time-varying parameter estimation of theta_i = (theta0_i,
// theta1_i) in the output-derivative model y_i' = [1, u_i'] theta_i, driven
// only by measurements of y_i and u_i.
//
// Layout convention used project-wide: theta_hat[0] is theta0, the remaining
// m_i entries are theta1.

#include "inesc/game.hpp"
#include "inesc/types.hpp"

namespace inesc {

// Axis-aligned admissible set for theta_hat.
struct ThetaBox {
  Vector lower;
  Vector upper;

  static ThetaBox uniform(Eigen::Index dim, double bound = 1e4);
  bool contains(const Vector& theta) const;
  Vector clamp(const Vector& theta) const;
};

struct EstimatorParams {
  double K = 50.0;       // output-error gain
  double k_T = 50.0;     // forgetting rate of Sigma
  double sigma = 1e-6;   // regularisation
  double alpha1 = 0.1;   // Sigma(0) = alpha1 * I
  ThetaBox box;

  // Throws ConfigError unless all gains are positive and the box has
  // dimension m_i + 1 with lower <= upper.
  void validate(Eigen::Index input_dim) const;
};

struct EstimatorState {
  double y_hat = 0.0;
  Vector c;          // m_i + 1
  double eta_hat = 0.0;
  Matrix Sigma;      // (m_i + 1) x (m_i + 1)
  Vector theta_hat;  // m_i + 1

  // Zero initial conditions with Sigma(0) = alpha1 * I.
  static EstimatorState initial(Eigen::Index input_dim, const EstimatorParams& p);

  Eigen::Index input_dim() const { return c.size() - 1; }
  double theta0() const { return theta_hat[0]; }
  Vector theta1() const { return theta_hat.tail(theta_hat.size() - 1); }

  // Flat layout: y_hat, c, eta_hat, Sigma (column-major), theta_hat.
  static Eigen::Index packed_size(Eigen::Index input_dim);
  void pack(Eigen::Ref<Vector> out) const;
  static EstimatorState unpack(const Eigen::Ref<const Vector>& in,
                               Eigen::Index input_dim);
};

// Time derivative of every EstimatorState component, same layout.
using EstimatorDerivative = EstimatorState;

// Ground-truth parameters along the closed loop:
//   theta0_i = -sum_j grad_{x_j} h_i' x_j + sum_{j != i} grad_{x_j} h_i' B_j u_j
//   theta1_i = B_i' grad_{x_i} h_i
// so that y_i' = theta0_i + theta1_i' u_i exactly.
Vector true_theta(const GameModel& game, const Vector& x, const Vector& u,
                  AgentIndex i);

// Zeroes component k of v iff theta_k sits on its lower bound with v_k < 0,
// or on its upper bound with v_k > 0. Throws InvariantViolation when theta is
// outside the box.
Vector project_tangent_cone(const Vector& theta_hat, const Vector& v,
                            const ThetaBox& box);

// Right-hand side of the estimator. The parameter update is evaluated first
// and fed into the output-estimate equation. `agent` and `t` only label
// errors: a Sigma with condition number above 1e12 raises BlowUpError.
EstimatorDerivative estimator_derivative(const EstimatorState& s,
                                         const EstimatorParams& p, double y_i,
                                         const Vector& u_i, AgentIndex agent = 0,
                                         double t = 0.0);

// Post-step hook: clamp theta_hat into the box and re-symmetrise Sigma.
void enforce_invariants(EstimatorState& s, const EstimatorParams& p);

}  // namespace inesc
