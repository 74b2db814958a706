#include "inesc/game.hpp"

#include <cmath>
#include <random>
#include <string>

namespace inesc {

double QuadraticCost::value(const Vector& x) const {
  return 0.5 * x.dot(Q * x) + q.dot(x) + r;
}

Vector QuadraticCost::gradient(const Vector& x) const {
  return hessian() * x + q;
}

double Cost::value(const Vector& x) const {
  return std::visit([&](const auto& c) { return c.value(x); }, impl_);
}

Vector Cost::gradient(const Vector& x) const {
  if (const auto* qc = std::get_if<QuadraticCost>(&impl_)) {
    return qc->gradient(x);
  }
  const auto& cb = std::get<CallbackCost>(impl_);
  if (cb.gradient) return cb.gradient(x);
  return finite_difference_gradient(cb.value, x);
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& f,
                                  const Vector& x) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double step = 1e-6 * (1.0 + std::abs(x[k]));
    probe[k] = x[k] + step;
    const double fp = f(probe);
    probe[k] = x[k] - step;
    const double fm = f(probe);
    probe[k] = x[k];
    g[k] = (fp - fm) / (2.0 * step);
  }
  return g;
}

namespace {

void validate_callback_gradient(const CallbackCost& cb, Eigen::Index n,
                                AgentIndex agent) {
  if (!cb.value) {
    throw ConfigError("cost of agent " + std::to_string(agent + 1) +
                      " has no value function");
  }
  if (!cb.gradient) return;
  std::mt19937_64 rng(0x5eed + agent);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Vector x(n);
    for (Eigen::Index k = 0; k < n; ++k) x[k] = normal(rng);
    const Vector analytic = cb.gradient(x);
    require_dim(analytic.size(), n, "callback gradient");
    const Vector numeric = finite_difference_gradient(cb.value, x);
    const double scale = std::max(1.0, numeric.norm());
    if ((analytic - numeric).norm() > 1e-5 * scale) {
      throw ConfigError("gradient of agent " + std::to_string(agent + 1) +
                        " disagrees with finite differences");
    }
  }
}

}  // namespace

GameModel::GameModel(std::vector<Matrix> input_matrices, std::vector<Cost> costs)
    : input_matrices_(std::move(input_matrices)), costs_(std::move(costs)) {
  if (input_matrices_.empty()) throw ConfigError("game needs at least one agent");
  if (costs_.size() != input_matrices_.size()) {
    throw ConfigError("game has " + std::to_string(input_matrices_.size()) +
                      " input matrices but " + std::to_string(costs_.size()) +
                      " costs");
  }
  for (const auto& Bi : input_matrices_) {
    if (Bi.rows() < 1 || Bi.cols() < 1) {
      throw ConfigError("input matrix B_i must be at least 1x1");
    }
    state_offsets_.push_back(n_);
    input_offsets_.push_back(m_);
    n_ += Bi.rows();
    m_ += Bi.cols();
  }
  block_B_ = Matrix::Zero(n_, m_);
  for (AgentIndex i = 0; i < num_agents(); ++i) {
    block_B_.block(state_offsets_[i], input_offsets_[i], B(i).rows(),
                   B(i).cols()) = B(i);
  }
  for (AgentIndex i = 0; i < num_agents(); ++i) {
    if (const auto* qc = costs_[i].quadratic()) {
      require_dim(qc->Q.rows(), n_, "cost Q rows");
      require_dim(qc->Q.cols(), n_, "cost Q cols");
      require_dim(qc->q.size(), n_, "cost q");
      const Eigen::Index off = state_offsets_[i];
      const Eigen::Index ni = state_dim(i);
      const Matrix own = qc->Q.block(off, off, ni, ni);
      const double scale = std::max(1.0, own.cwiseAbs().maxCoeff());
      if ((own - own.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ConfigError("own block Q_ii of agent " + std::to_string(i + 1) +
                          " is not symmetric");
      }
    } else {
      validate_callback_gradient(*costs_[i].callback(), n_, i);
    }
  }
}

bool GameModel::is_quadratic() const {
  for (const auto& c : costs_) {
    if (!c.is_quadratic()) return false;
  }
  return true;
}

double eval_cost(const GameModel& game, AgentIndex i, const Vector& x) {
  require_dim(x.size(), game.state_dim(), "state");
  if (i >= game.num_agents()) throw ConfigError("agent index out of range");
  return game.cost(i).value(x);
}

Vector grad_xi(const GameModel& game, AgentIndex i, const Vector& x) {
  require_dim(x.size(), game.state_dim(), "state");
  if (i >= game.num_agents()) throw ConfigError("agent index out of range");
  return game.cost(i).gradient(x).segment(game.state_offset(i),
                                          game.state_dim(i));
}

Vector pseudo_gradient_x(const GameModel& game, const Vector& x) {
  Vector out(game.state_dim());
  for (AgentIndex i = 0; i < game.num_agents(); ++i) {
    out.segment(game.state_offset(i), game.state_dim(i)) = grad_xi(game, i, x);
  }
  return out;
}

Vector pseudo_gradient_u(const GameModel& game, const Vector& u) {
  require_dim(u.size(), game.input_dim(), "input");
  return game.block_B().transpose() *
         pseudo_gradient_x(game, game.block_B() * u);
}

Matrix state_jacobian(const GameModel& game) {
  if (!game.is_quadratic()) {
    throw UnsupportedError("constant Jacobian requires a quadratic game");
  }
  Matrix J(game.state_dim(), game.state_dim());
  for (AgentIndex i = 0; i < game.num_agents(); ++i) {
    const Matrix H = game.cost(i).quadratic()->hessian();
    J.middleRows(game.state_offset(i), game.state_dim(i)) =
        H.middleRows(game.state_offset(i), game.state_dim(i));
  }
  return J;
}

Matrix input_jacobian(const GameModel& game) {
  const Matrix& B = game.block_B();
  return B.transpose() * state_jacobian(game) * B;
}

GameModel three_agent_example() {
  auto quad = [](std::initializer_list<double> q_rows,
                 std::initializer_list<double> lin, double r) {
    QuadraticCost c;
    c.Q = Matrix(3, 3);
    auto it = q_rows.begin();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) c.Q(row, col) = *it++;
    }
    c.q = Vector(3);
    auto jt = lin.begin();
    for (int k = 0; k < 3; ++k) c.q[k] = *jt++;
    c.r = r;
    return Cost(std::move(c));
  };
  std::vector<Matrix> B(3, Matrix::Identity(1, 1));
  std::vector<Cost> costs;
  costs.push_back(quad({3, 1.5, 1, 1.5, 0, 0, 1, 0, 0}, {-3, 0, 0}, 1.5));
  costs.push_back(quad({0, -2, 0, -2, 3, 1, 0, 1, 0}, {0, -6, 0}, 6.0));
  costs.push_back(quad({0, 0, -2.5, 0, 0, -1, -2.5, -1, 3}, {0, 0, -9}, 13.5));
  return GameModel(std::move(B), std::move(costs));
}

}  // namespace inesc
