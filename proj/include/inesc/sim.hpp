#pragma once

// Fixed-step closed-loop simulation: state layout, RK4 stepping, recording and
// convergence metrics.

#include "inesc/controllers.hpp"
#include "inesc/game.hpp"
#include "inesc/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace inesc {

enum class ControllerKind { FullInfo, Inesc, Baseline };

const char* to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(const std::string& name);

struct SimParams {
  double step = 1e-3;     // s
  double horizon = 100.0; // s
  int stride = 10;        // record every stride-th step
  bool allow_large_step = false;
};

struct ExperimentConfig {
  std::string name;
  GameModel game;
  ControllerKind controller = ControllerKind::Inesc;
  Vector tau;  // full-information time constants, one per agent
  std::vector<InescAgentParams> inesc;
  std::vector<BaselineAgentParams> baseline;
  SimParams sim;
  Vector x0;  // initial plant state
  Vector u0;  // initial (integral) input state
  std::string output_dir = "out";
  std::string hash;  // filled by the config loader

  // Dimension, positivity and step-size checks. Throws ConfigError (or
  // UnsupportedError for baseline on vector inputs).
  void validate() const;
  // Largest step accepted by the step-size guard.
  double max_step() const;
};

// Flat-vector layout of the closed-loop state for one controller variant.
//   FullInfo: [x | u]
//   Inesc:    [x | u_hat | estimator_1 | ... | estimator_N | eta_1..eta_N]
//   Baseline: [x | eta | xi | u_hat]
// For I-NESC the trailing eta block is a diagnostic co-integration of the
// unestimated auxiliary eta_i' = -K_i eta_i - c_i' theta_i'; it never feeds
// back into the loop.
class StateLayout {
 public:
  StateLayout(const GameModel& game, ControllerKind kind);

  ControllerKind kind() const { return kind_; }
  Eigen::Index size() const { return size_; }
  Eigen::Index x_offset() const { return 0; }
  Eigen::Index u_hat_offset() const { return u_hat_offset_; }
  Eigen::Index estimator_offset(AgentIndex i) const { return est_offsets_.at(i); }
  Eigen::Index estimator_size(AgentIndex i) const { return est_sizes_.at(i); }
  Eigen::Index eta_offset() const { return eta_offset_; }
  Eigen::Index xi_offset() const { return xi_offset_; }

  // Human-readable name of flat component k, for error reports.
  std::string component_name(Eigen::Index k) const;

 private:
  ControllerKind kind_;
  std::size_t agents_;
  Eigen::Index n_, m_;
  Eigen::Index u_hat_offset_ = 0;
  Eigen::Index eta_offset_ = -1;
  Eigen::Index xi_offset_ = -1;
  std::vector<Eigen::Index> est_offsets_;
  std::vector<Eigen::Index> est_sizes_;
  Eigen::Index size_ = 0;
};

struct ClosedLoopState {
  double t = 0.0;
  Vector data;
};

class NonFiniteState : public BlowUpError {
 public:
  NonFiniteState(const std::string& what, double time, Eigen::Index component)
      : BlowUpError(what, time), component_(component) {}
  Eigen::Index component() const { return component_; }

 private:
  Eigen::Index component_;
};

using DerivativeFn = std::function<Vector(double t, const Vector& y)>;
using PostStepFn = std::function<void(Vector& y)>;

// One classical RK4 step followed by the optional post-step hook. Throws
// NonFiniteState naming the first non-finite component.
ClosedLoopState step_rk4(const ClosedLoopState& state, const DerivativeFn& f,
                         double h, const PostStepFn& post = {});

// The assembled closed loop for a validated configuration.
class ClosedLoop {
 public:
  explicit ClosedLoop(std::shared_ptr<const ExperimentConfig> config);

  const ExperimentConfig& config() const { return *config_; }
  const StateLayout& layout() const { return layout_; }

  Vector initial_state() const;
  Vector derivative(double t, const Vector& s) const;
  void post_step(Vector& s) const;

  Vector plant_state(const Vector& s) const;
  // Integral input state (u for full information, u_hat otherwise).
  Vector integral_input(const Vector& s) const;
  // Input applied to the plants at time t.
  Vector applied_input(double t, const Vector& s) const;
  // Cost measurements y_i = h_i(x).
  Vector outputs(const Vector& s) const;
  // I-NESC only.
  EstimatorState estimator(const Vector& s, AgentIndex i) const;
  Vector diagnostic_eta(const Vector& s) const;

 private:
  InescController inesc_view(const Vector& s) const;
  BaselineController baseline_view(const Vector& s) const;

  std::shared_ptr<const ExperimentConfig> config_;
  StateLayout layout_;
};

struct SimResult {
  std::shared_ptr<const ExperimentConfig> config;
  std::shared_ptr<const StateLayout> layout;
  std::vector<double> t;
  std::vector<Vector> states;
  std::vector<Vector> inputs;   // applied u
  std::vector<Vector> outputs;  // y
  double step = 0.0;
  double horizon = 0.0;
  int stride = 1;

  std::size_t size() const { return t.size(); }
  Vector x(std::size_t k) const;
  Vector u_hat(std::size_t k) const;
  EstimatorState estimator(std::size_t k, AgentIndex i) const;
  Vector diagnostic_eta(std::size_t k) const;
};

// Raised when integration blows up; carries the trace recorded so far.
class RunAborted : public BlowUpError {
 public:
  RunAborted(const std::string& what, double time, SimResult partial)
      : BlowUpError(what, time), partial_(std::move(partial)) {}
  const SimResult& partial() const { return partial_; }

 private:
  SimResult partial_;
};

// Integrates the configured experiment over its horizon. Bit-deterministic.
SimResult run(const ExperimentConfig& config);

struct ConvergenceMetrics {
  double trailing_input_error = 0.0;  // mean ||u_hat - u*|| over the window
  double trailing_state_error = 0.0;  // mean ||x - pi(u_hat)|| over the window
  double trailing_ne_state_error = 0.0;  // mean ||x - x*|| over the window
  std::optional<double> entry_time;   // first time ||u_hat - u*|| <= radius for good
  double peak_input_error = 0.0;
  double peak_state_error = 0.0;
  double final_input_error = 0.0;
  double final_ne_state_error = 0.0;  // ||x(T) - x*||
};

struct NashSolution;

ConvergenceMetrics convergence_metrics(const SimResult& result,
                                       const NashSolution& ne, double window,
                                       double ball_radius = 0.05);

}  // namespace inesc
