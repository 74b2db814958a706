#include "inesc/sim.hpp"

#include "inesc/analysis.hpp"
#include "inesc/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace inesc {

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::FullInfo: return "fullinfo";
    case ControllerKind::Inesc: return "inesc";
    case ControllerKind::Baseline: return "baseline";
  }
  return "unknown";
}

ControllerKind controller_kind_from_string(const std::string& name) {
  if (name == "fullinfo") return ControllerKind::FullInfo;
  if (name == "inesc") return ControllerKind::Inesc;
  if (name == "baseline") return ControllerKind::Baseline;
  throw ConfigError("unknown controller type '" + name +
                    "' (expected fullinfo, inesc or baseline)");
}

// ---------------------------------------------------------------------------
// Configuration checks

double ExperimentConfig::max_step() const {
  // Plant time constant is 1.
  double fastest = 1.0;
  const std::size_t N = game.num_agents();
  switch (controller) {
    case ControllerKind::FullInfo:
      for (Eigen::Index i = 0; i < tau.size(); ++i) {
        fastest = std::min(fastest, tau[i]);
      }
      break;
    case ControllerKind::Inesc:
      for (std::size_t i = 0; i < std::min(N, inesc.size()); ++i) {
        const auto& a = inesc[i];
        fastest = std::min({fastest, a.tau, 1.0 / a.estimator.K});
        const double w = a.dither.max_frequency();
        if (w > 0) fastest = std::min(fastest, 2.0 * std::numbers::pi / w);
      }
      break;
    case ControllerKind::Baseline:
      for (const auto& a : baseline) {
        fastest = std::min({fastest, 1.0 / a.omega_l,
                            2.0 * std::numbers::pi / a.omega});
      }
      break;
  }
  return fastest / 10.0;
}

void ExperimentConfig::validate() const {
  const auto N = static_cast<Eigen::Index>(game.num_agents());
  require_dim(x0.size(), game.state_dim(), "sim.initial.x");
  require_dim(u0.size(), game.input_dim(), "sim.initial.u");
  switch (controller) {
    case ControllerKind::FullInfo:
      require_dim(tau.size(), N, "tau");
      for (Eigen::Index i = 0; i < N; ++i) {
        if (!(tau[i] > 0)) throw ConfigError("tau must be positive");
      }
      break;
    case ControllerKind::Inesc:
      InescController::initial(game, inesc);
      break;
    case ControllerKind::Baseline:
      BaselineController::validate(game, baseline);
      break;
  }
  if (!(sim.step > 0)) throw ConfigError("sim.step must be positive");
  if (!(sim.horizon > 0)) throw ConfigError("sim.horizon must be positive");
  if (sim.stride < 1) throw ConfigError("sim.stride must be at least 1");
  const auto steps = std::llround(sim.horizon / sim.step);
  if (std::abs(steps * sim.step - sim.horizon) > 1e-9 * sim.horizon) {
    throw ConfigError("sim.horizon must be a whole number of steps");
  }
  if (steps % sim.stride != 0) {
    throw ConfigError("sim.stride must divide the number of steps");
  }
  if (!sim.allow_large_step && !(sim.step < max_step())) {
    throw ConfigError("sim.step " + std::to_string(sim.step) +
                      " exceeds the stability guard " +
                      std::to_string(max_step()) +
                      " (set sim.allow_large_step to override)");
  }
  if (!x0.allFinite() || !u0.allFinite()) {
    throw ConfigError("sim.initial contains non-finite values");
  }
}

// ---------------------------------------------------------------------------
// Layout

StateLayout::StateLayout(const GameModel& game, ControllerKind kind)
    : kind_(kind),
      agents_(game.num_agents()),
      n_(game.state_dim()),
      m_(game.input_dim()) {
  const auto N = static_cast<Eigen::Index>(agents_);
  u_hat_offset_ = n_;
  switch (kind) {
    case ControllerKind::FullInfo:
      size_ = n_ + m_;
      break;
    case ControllerKind::Inesc: {
      Eigen::Index k = n_ + m_;
      for (AgentIndex i = 0; i < agents_; ++i) {
        est_offsets_.push_back(k);
        est_sizes_.push_back(EstimatorState::packed_size(game.input_dim(i)));
        k += est_sizes_.back();
      }
      eta_offset_ = k;
      size_ = k + N;
      break;
    }
    case ControllerKind::Baseline:
      eta_offset_ = n_;
      xi_offset_ = n_ + N;
      u_hat_offset_ = n_ + 2 * N;
      size_ = n_ + 3 * N;
      break;
  }
}

std::string StateLayout::component_name(Eigen::Index k) const {
  const auto N = static_cast<Eigen::Index>(agents_);
  auto idx = [](Eigen::Index j) { return std::to_string(j + 1); };
  if (k < n_) return "x_" + idx(k);
  switch (kind_) {
    case ControllerKind::FullInfo:
      return "u_" + idx(k - n_);
    case ControllerKind::Inesc:
      if (k < n_ + m_) return "u_hat_" + idx(k - n_);
      for (std::size_t i = 0; i < est_offsets_.size(); ++i) {
        if (k < est_offsets_[i] + est_sizes_[i]) {
          return "estimator_" + std::to_string(i + 1) + "[" +
                 std::to_string(k - est_offsets_[i]) + "]";
        }
      }
      return "eta_" + idx(k - eta_offset_);
    case ControllerKind::Baseline:
      if (k < n_ + N) return "eta_" + idx(k - n_);
      if (k < n_ + 2 * N) return "xi_" + idx(k - n_ - N);
      return "u_hat_" + idx(k - n_ - 2 * N);
  }
  return "component_" + std::to_string(k);
}

// ---------------------------------------------------------------------------
// Integrator

ClosedLoopState step_rk4(const ClosedLoopState& state, const DerivativeFn& f,
                         double h, const PostStepFn& post) {
  if (!(h > 0)) throw ConfigError("step size must be positive");
  const double t = state.t;
  const Vector& y = state.data;
  const Vector k1 = f(t, y);
  const Vector k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
  const Vector k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
  const Vector k4 = f(t + h, y + h * k3);
  ClosedLoopState next{t + h, y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)};
  if (post) post(next.data);
  for (Eigen::Index k = 0; k < next.data.size(); ++k) {
    if (!std::isfinite(next.data[k])) {
      throw NonFiniteState("non-finite state component " + std::to_string(k) +
                               " at t=" + std::to_string(next.t),
                           next.t, k);
    }
  }
  return next;
}

// ---------------------------------------------------------------------------
// Closed loop

ClosedLoop::ClosedLoop(std::shared_ptr<const ExperimentConfig> config)
    : config_(std::move(config)), layout_(config_->game, config_->controller) {
  config_->validate();
}

Vector ClosedLoop::initial_state() const {
  const auto& cfg = *config_;
  Vector s = Vector::Zero(layout_.size());
  s.head(cfg.game.state_dim()) = cfg.x0;
  s.segment(layout_.u_hat_offset(), cfg.game.input_dim()) = cfg.u0;
  if (cfg.controller == ControllerKind::Inesc) {
    for (AgentIndex i = 0; i < cfg.game.num_agents(); ++i) {
      EstimatorState::initial(cfg.game.input_dim(i), cfg.inesc[i].estimator)
          .pack(s.segment(layout_.estimator_offset(i), layout_.estimator_size(i)));
    }
  }
  return s;
}

Vector ClosedLoop::plant_state(const Vector& s) const {
  return s.head(config_->game.state_dim());
}

Vector ClosedLoop::integral_input(const Vector& s) const {
  return s.segment(layout_.u_hat_offset(), config_->game.input_dim());
}

EstimatorState ClosedLoop::estimator(const Vector& s, AgentIndex i) const {
  if (config_->controller != ControllerKind::Inesc) {
    throw DiagnosticError("estimator states exist only for I-NESC runs");
  }
  return EstimatorState::unpack(
      s.segment(layout_.estimator_offset(i), layout_.estimator_size(i)),
      config_->game.input_dim(i));
}

Vector ClosedLoop::diagnostic_eta(const Vector& s) const {
  if (config_->controller != ControllerKind::Inesc) {
    throw DiagnosticError("eta co-integration exists only for I-NESC runs");
  }
  return s.segment(layout_.eta_offset(),
                   static_cast<Eigen::Index>(config_->game.num_agents()));
}

InescController ClosedLoop::inesc_view(const Vector& s) const {
  InescController ctrl;
  ctrl.agents = config_->inesc;
  ctrl.u_hat = integral_input(s);
  for (AgentIndex i = 0; i < config_->game.num_agents(); ++i) {
    ctrl.estimators.push_back(estimator(s, i));
  }
  return ctrl;
}

BaselineController ClosedLoop::baseline_view(const Vector& s) const {
  const auto N = static_cast<Eigen::Index>(config_->game.num_agents());
  BaselineController ctrl;
  ctrl.agents = config_->baseline;
  ctrl.eta = s.segment(layout_.eta_offset(), N);
  ctrl.xi = s.segment(layout_.xi_offset(), N);
  ctrl.u_hat = s.segment(layout_.u_hat_offset(), N);
  return ctrl;
}

Vector ClosedLoop::applied_input(double t, const Vector& s) const {
  switch (config_->controller) {
    case ControllerKind::FullInfo:
      return integral_input(s);
    case ControllerKind::Inesc: {
      Vector u = integral_input(s);
      const auto& game = config_->game;
      for (AgentIndex i = 0; i < game.num_agents(); ++i) {
        u.segment(game.input_offset(i), game.input_dim(i)) +=
            dither(config_->inesc[i].dither, t);
      }
      return u;
    }
    case ControllerKind::Baseline:
      return baseline_view(s).input(t);
  }
  return {};
}

Vector ClosedLoop::outputs(const Vector& s) const {
  const auto& game = config_->game;
  const Vector x = plant_state(s);
  Vector y(static_cast<Eigen::Index>(game.num_agents()));
  for (AgentIndex i = 0; i < game.num_agents(); ++i) {
    y[static_cast<Eigen::Index>(i)] = game.cost(i).value(x);
  }
  return y;
}

Vector ClosedLoop::derivative(double t, const Vector& s) const {
  const auto& cfg = *config_;
  const auto& game = cfg.game;
  const Vector x = plant_state(s);
  const Vector u = applied_input(t, s);
  Vector ds(layout_.size());

  Vector x_dot(game.state_dim());
  for (AgentIndex i = 0; i < game.num_agents(); ++i) {
    x_dot.segment(game.state_offset(i), game.state_dim(i)) = plant_derivative(
        x.segment(game.state_offset(i), game.state_dim(i)), game.B(i),
        u.segment(game.input_offset(i), game.input_dim(i)));
  }
  ds.head(game.state_dim()) = x_dot;

  switch (cfg.controller) {
    case ControllerKind::FullInfo: {
      const FullInfoController ctrl{cfg.tau, u};
      ds.segment(layout_.u_hat_offset(), game.input_dim()) =
          fullinfo_derivative(ctrl, game, x);
      break;
    }
    case ControllerKind::Inesc: {
      const InescController ctrl = inesc_view(s);
      const Vector y = outputs(s);
      const InescDerivative d = inesc_derivative(ctrl, game, y, t);
      ds.segment(layout_.u_hat_offset(), game.input_dim()) = d.u_hat;
      for (AgentIndex i = 0; i < game.num_agents(); ++i) {
        d.estimators[i].pack(ds.segment(layout_.estimator_offset(i),
                                        layout_.estimator_size(i)));
      }
      // theta' by central differences along the flow direction.
      constexpr double delta = 1e-5;
      const Vector x_fwd = x + delta * x_dot;
      const Vector x_bwd = x - delta * x_dot;
      const Vector u_fwd =
          applied_input(t + delta, s) + delta * d.u_hat;
      const Vector u_bwd =
          applied_input(t - delta, s) - delta * d.u_hat;
      for (AgentIndex i = 0; i < game.num_agents(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const Vector theta_dot = (true_theta(game, x_fwd, u_fwd, i) -
                                  true_theta(game, x_bwd, u_bwd, i)) /
                                 (2.0 * delta);
        const double eta = s[layout_.eta_offset() + k];
        ds[layout_.eta_offset() + k] = -cfg.inesc[i].estimator.K * eta -
                                       ctrl.estimators[i].c.dot(theta_dot);
      }
      break;
    }
    case ControllerKind::Baseline: {
      const BaselineController ctrl = baseline_view(s);
      const BaselineDerivative d = baseline_derivative(ctrl, outputs(s), t);
      const auto N = static_cast<Eigen::Index>(game.num_agents());
      ds.segment(layout_.eta_offset(), N) = d.eta;
      ds.segment(layout_.xi_offset(), N) = d.xi;
      ds.segment(layout_.u_hat_offset(), N) = d.u_hat;
      break;
    }
  }
  return ds;
}

void ClosedLoop::post_step(Vector& s) const {
  if (config_->controller != ControllerKind::Inesc) return;
  for (AgentIndex i = 0; i < config_->game.num_agents(); ++i) {
    auto seg = s.segment(layout_.estimator_offset(i), layout_.estimator_size(i));
    EstimatorState est =
        EstimatorState::unpack(seg, config_->game.input_dim(i));
    enforce_invariants(est, config_->inesc[i].estimator);
    est.pack(seg);
  }
}

// ---------------------------------------------------------------------------
// SimResult accessors

Vector SimResult::x(std::size_t k) const {
  return states.at(k).head(config->game.state_dim());
}

Vector SimResult::u_hat(std::size_t k) const {
  return states.at(k).segment(layout->u_hat_offset(), config->game.input_dim());
}

EstimatorState SimResult::estimator(std::size_t k, AgentIndex i) const {
  if (layout->kind() != ControllerKind::Inesc) {
    throw DiagnosticError("estimator states exist only for I-NESC runs");
  }
  return EstimatorState::unpack(
      states.at(k).segment(layout->estimator_offset(i), layout->estimator_size(i)),
      config->game.input_dim(i));
}

Vector SimResult::diagnostic_eta(std::size_t k) const {
  if (layout->kind() != ControllerKind::Inesc) {
    throw DiagnosticError("eta co-integration exists only for I-NESC runs");
  }
  return states.at(k).segment(
      layout->eta_offset(), static_cast<Eigen::Index>(config->game.num_agents()));
}

// ---------------------------------------------------------------------------
// Run

SimResult run(const ExperimentConfig& config) {
  auto cfg = std::make_shared<const ExperimentConfig>(config);
  const ClosedLoop loop(cfg);

  SimResult result;
  result.config = cfg;
  result.layout = std::make_shared<const StateLayout>(loop.layout());
  result.step = cfg->sim.step;
  result.horizon = cfg->sim.horizon;
  result.stride = cfg->sim.stride;

  const double h = cfg->sim.step;
  const long long steps = std::llround(cfg->sim.horizon / h);
  const auto samples = static_cast<std::size_t>(steps / cfg->sim.stride + 1);
  result.t.reserve(samples);
  result.states.reserve(samples);
  result.inputs.reserve(samples);
  result.outputs.reserve(samples);

  auto record = [&](const ClosedLoopState& st) {
    result.t.push_back(st.t);
    result.states.push_back(st.data);
    result.inputs.push_back(loop.applied_input(st.t, st.data));
    result.outputs.push_back(loop.outputs(st.data));
  };

  const DerivativeFn f = [&loop](double t, const Vector& s) {
    return loop.derivative(t, s);
  };
  const PostStepFn post = [&loop](Vector& s) { loop.post_step(s); };

  ClosedLoopState state{0.0, loop.initial_state()};
  record(state);
  for (long long k = 1; k <= steps; ++k) {
    try {
      state = step_rk4(state, f, h, post);
    } catch (const NonFiniteState& e) {
      throw RunAborted(std::string("integration blew up: ") + e.what() + " (" +
                           loop.layout().component_name(e.component()) + ")",
                       e.time(), std::move(result));
    } catch (const BlowUpError& e) {
      throw RunAborted(std::string("integration blew up: ") + e.what(),
                       e.time(), std::move(result));
    }
    // Exact grid times keep reruns and step-halving comparisons aligned.
    state.t = static_cast<double>(k) * h;
    if (k % cfg->sim.stride == 0) record(state);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Metrics

ConvergenceMetrics convergence_metrics(const SimResult& result,
                                       const NashSolution& ne, double window,
                                       double ball_radius) {
  ConvergenceMetrics m;
  if (result.size() == 0) return m;
  const double t_end = result.t.back();
  const Matrix& B = result.config->game.block_B();

  double sum_u = 0.0, sum_x = 0.0, sum_ne = 0.0;
  std::size_t count = 0;
  std::optional<double> entry;
  for (std::size_t k = 0; k < result.size(); ++k) {
    const Vector u_hat = result.u_hat(k);
    const Vector x = result.x(k);
    const double eu = (u_hat - ne.u_star).norm();
    const double ex = (x - steady_state(B, u_hat)).norm();
    m.peak_input_error = std::max(m.peak_input_error, eu);
    m.peak_state_error = std::max(m.peak_state_error, ex);
    if (eu <= ball_radius) {
      if (!entry) entry = result.t[k];
    } else {
      entry.reset();
    }
    if (result.t[k] >= t_end - window - 1e-12) {
      sum_u += eu;
      sum_x += ex;
      sum_ne += (x - ne.x_star).norm();
      ++count;
    }
  }
  m.trailing_input_error = sum_u / static_cast<double>(count);
  m.trailing_state_error = sum_x / static_cast<double>(count);
  m.trailing_ne_state_error = sum_ne / static_cast<double>(count);
  m.entry_time = entry;
  m.final_input_error = (result.u_hat(result.size() - 1) - ne.u_star).norm();
  m.final_ne_state_error = (result.x(result.size() - 1) - ne.x_star).norm();
  return m;
}

}  // namespace inesc
