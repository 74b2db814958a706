#pragma once

// Control laws: full-information integral control, the measurement-only
// integral Nash seeking law (I-NESC), and the perturbation-based baseline with
// washout and low-pass filtering.

#include "inesc/estimator.hpp"
#include "inesc/game.hpp"
#include "inesc/types.hpp"

#include <vector>

namespace inesc {

// d(t) = amplitude .* sin(frequency * t + phase), one entry per input channel.
struct DitherSpec {
  Vector amplitude;
  Vector frequency;  // rad/s
  Vector phase;      // rad

  static DitherSpec none(Eigen::Index channels);
  void validate(Eigen::Index channels) const;
  double max_amplitude() const;
  double max_frequency() const;  // over channels with nonzero amplitude
};

Vector dither(const DitherSpec& spec, double t);

struct FullInfoController {
  Vector tau;  // one time constant per agent
  Vector u;    // stacked input (the integral state)
};

// u' = -tau^{-1} B' F_x(x).
Vector fullinfo_derivative(const FullInfoController& ctrl, const GameModel& game,
                           const Vector& x);

struct InescAgentParams {
  double tau = 1.0;
  EstimatorParams estimator;
  DitherSpec dither;
};

struct InescController {
  std::vector<InescAgentParams> agents;
  Vector u_hat;
  std::vector<EstimatorState> estimators;

  // Zero integral state and zero estimator states (Sigma = alpha1 I).
  static InescController initial(const GameModel& game,
                                 std::vector<InescAgentParams> agents);

  // Applied input u = u_hat + d(t).
  Vector input(const GameModel& game, double t) const;
};

struct InescDerivative {
  Vector u_hat;
  std::vector<EstimatorDerivative> estimators;
};

// u_hat_i' = -(1/tau_i) theta1_hat_i, plus every agent's estimator
// derivative fed with (y_i, u_i(t)).
InescDerivative inesc_derivative(const InescController& ctrl,
                                 const GameModel& game, const Vector& y,
                                 double t);

struct BaselineAgentParams {
  double omega_h = 1.0;  // washout cutoff, rad/s
  double omega_l = 1.0;  // low-pass cutoff, rad/s
  double omega = 1.0;    // probe frequency, rad/s
  double k = 1.0;        // adaptation gain
  double A = 1.0;        // probe amplitude
};

// Scalar input channels only.
struct BaselineController {
  std::vector<BaselineAgentParams> agents;
  Vector eta;    // washout filter states
  Vector xi;     // demodulated gradient estimates
  Vector u_hat;  // integrator states

  static BaselineController initial(const GameModel& game,
                                    std::vector<BaselineAgentParams> agents);
  // Throws UnsupportedError for non-scalar channels, ConfigError for
  // non-positive parameters.
  static void validate(const GameModel& game,
                       const std::vector<BaselineAgentParams>& agents);

  // u_i = u_hat_i + A_i sin(omega_i t).
  Vector input(double t) const;
};

struct BaselineDerivative {
  Vector eta;
  Vector xi;
  Vector u_hat;
};

BaselineDerivative baseline_derivative(const BaselineController& ctrl,
                                       const Vector& y, double t);

// Expands one value per agent into one value per input channel.
Vector per_input_channel(const GameModel& game, const Vector& per_agent);

}  // namespace inesc
