#include "inesc/controllers.hpp"

#include <cmath>
#include <string>

namespace inesc {

DitherSpec DitherSpec::none(Eigen::Index channels) {
  return DitherSpec{Vector::Zero(channels), Vector::Ones(channels),
                    Vector::Zero(channels)};
}

void DitherSpec::validate(Eigen::Index channels) const {
  require_dim(amplitude.size(), channels, "dither.amplitude");
  require_dim(frequency.size(), channels, "dither.frequency");
  require_dim(phase.size(), channels, "dither.phase");
  for (Eigen::Index k = 0; k < channels; ++k) {
    if (!(amplitude[k] >= 0)) {
      throw ConfigError("dither.amplitude must be non-negative");
    }
    if (amplitude[k] > 0 && !(frequency[k] > 0)) {
      throw ConfigError("dither.frequency must be positive when amplitude > 0");
    }
  }
}

double DitherSpec::max_amplitude() const {
  return amplitude.size() ? amplitude.maxCoeff() : 0.0;
}

double DitherSpec::max_frequency() const {
  double w = 0.0;
  for (Eigen::Index k = 0; k < amplitude.size(); ++k) {
    if (amplitude[k] > 0) w = std::max(w, frequency[k]);
  }
  return w;
}

Vector dither(const DitherSpec& spec, double t) {
  return spec.amplitude.array() *
         (spec.frequency.array() * t + spec.phase.array()).sin();
}

Vector per_input_channel(const GameModel& game, const Vector& per_agent) {
  require_dim(per_agent.size(), static_cast<Eigen::Index>(game.num_agents()),
              "per-agent vector");
  Vector out(game.input_dim());
  for (AgentIndex i = 0; i < game.num_agents(); ++i) {
    out.segment(game.input_offset(i), game.input_dim(i))
        .setConstant(per_agent[static_cast<Eigen::Index>(i)]);
  }
  return out;
}

Vector fullinfo_derivative(const FullInfoController& ctrl, const GameModel& game,
                           const Vector& x) {
  const Vector tau = per_input_channel(game, ctrl.tau);
  const Vector drive = game.block_B().transpose() * pseudo_gradient_x(game, x);
  return -drive.cwiseQuotient(tau);
}

InescController InescController::initial(const GameModel& game,
                                         std::vector<InescAgentParams> agents) {
  if (agents.size() != game.num_agents()) {
    throw ConfigError("controller agent count does not match the game");
  }
  InescController ctrl;
  for (AgentIndex i = 0; i < game.num_agents(); ++i) {
    const auto& a = agents[i];
    if (!(a.tau > 0)) throw ConfigError("tau must be positive");
    a.estimator.validate(game.input_dim(i));
    a.dither.validate(game.input_dim(i));
    ctrl.estimators.push_back(
        EstimatorState::initial(game.input_dim(i), a.estimator));
  }
  ctrl.agents = std::move(agents);
  ctrl.u_hat = Vector::Zero(game.input_dim());
  return ctrl;
}

Vector InescController::input(const GameModel& game, double t) const {
  Vector u = u_hat;
  for (AgentIndex i = 0; i < game.num_agents(); ++i) {
    u.segment(game.input_offset(i), game.input_dim(i)) +=
        dither(agents[i].dither, t);
  }
  return u;
}

InescDerivative inesc_derivative(const InescController& ctrl,
                                 const GameModel& game, const Vector& y,
                                 double t) {
  require_dim(y.size(), static_cast<Eigen::Index>(game.num_agents()),
              "measurements");
  const Vector u = ctrl.input(game, t);
  InescDerivative d;
  d.u_hat = Vector(game.input_dim());
  d.estimators.reserve(game.num_agents());
  for (AgentIndex i = 0; i < game.num_agents(); ++i) {
    const Vector u_i = u.segment(game.input_offset(i), game.input_dim(i));
    d.estimators.push_back(estimator_derivative(
        ctrl.estimators[i], ctrl.agents[i].estimator,
        y[static_cast<Eigen::Index>(i)], u_i, i, t));
    d.u_hat.segment(game.input_offset(i), game.input_dim(i)) =
        -ctrl.estimators[i].theta1() / ctrl.agents[i].tau;
  }
  return d;
}

void BaselineController::validate(const GameModel& game,
                                  const std::vector<BaselineAgentParams>& agents) {
  if (agents.size() != game.num_agents()) {
    throw ConfigError("controller agent count does not match the game");
  }
  for (AgentIndex i = 0; i < game.num_agents(); ++i) {
    if (game.input_dim(i) != 1) {
      throw UnsupportedError("baseline controller needs scalar inputs (agent " +
                             std::to_string(i + 1) + ")");
    }
    const auto& a = agents[i];
    if (!(a.omega_h > 0)) throw ConfigError("omega_h must be positive");
    if (!(a.omega_l > 0)) throw ConfigError("omega_l must be positive");
    if (!(a.omega > 0)) throw ConfigError("omega must be positive");
    if (!(a.k > 0)) throw ConfigError("k must be positive");
    if (!(a.A > 0)) throw ConfigError("A must be positive");
  }
}

BaselineController BaselineController::initial(
    const GameModel& game, std::vector<BaselineAgentParams> agents) {
  validate(game, agents);
  const auto n = static_cast<Eigen::Index>(agents.size());
  BaselineController ctrl;
  ctrl.agents = std::move(agents);
  ctrl.eta = Vector::Zero(n);
  ctrl.xi = Vector::Zero(n);
  ctrl.u_hat = Vector::Zero(n);
  return ctrl;
}

Vector BaselineController::input(double t) const {
  Vector u = u_hat;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    u[k] += agents[i].A * std::sin(agents[i].omega * t);
  }
  return u;
}

BaselineDerivative baseline_derivative(const BaselineController& ctrl,
                                       const Vector& y, double t) {
  const auto n = static_cast<Eigen::Index>(ctrl.agents.size());
  require_dim(y.size(), n, "measurements");
  BaselineDerivative d{Vector(n), Vector(n), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& a = ctrl.agents[static_cast<std::size_t>(i)];
    const double probe = a.A * std::sin(a.omega * t);
    d.eta[i] = -a.omega_h * ctrl.eta[i] + a.omega_h * y[i];
    d.xi[i] = -a.omega_l * ctrl.xi[i] + a.omega_l * (y[i] - ctrl.eta[i]) * probe;
    d.u_hat[i] = -a.k * a.A * ctrl.xi[i];
  }
  return d;
}

}  // namespace inesc
