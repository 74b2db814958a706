#include "inesc/estimator.hpp"

#include <cmath>
#include <string>

namespace inesc {

ThetaBox ThetaBox::uniform(Eigen::Index dim, double bound) {
  return ThetaBox{Vector::Constant(dim, -bound), Vector::Constant(dim, bound)};
}

bool ThetaBox::contains(const Vector& theta) const {
  return theta.size() == lower.size() &&
         (theta.array() >= lower.array()).all() &&
         (theta.array() <= upper.array()).all();
}

Vector ThetaBox::clamp(const Vector& theta) const {
  return theta.cwiseMax(lower).cwiseMin(upper);
}

void EstimatorParams::validate(Eigen::Index input_dim) const {
  if (!(K > 0)) throw ConfigError("K must be positive");
  if (!(k_T > 0)) throw ConfigError("k_T must be positive");
  if (!(sigma > 0)) throw ConfigError("sigma must be positive");
  if (!(alpha1 > 0)) throw ConfigError("alpha1 must be positive");
  require_dim(box.lower.size(), input_dim + 1, "theta_box.lower");
  require_dim(box.upper.size(), input_dim + 1, "theta_box.upper");
  if ((box.lower.array() > box.upper.array()).any()) {
    throw ConfigError("theta_box is empty (lower > upper)");
  }
  if (!box.contains(Vector::Zero(input_dim + 1))) {
    throw ConfigError("theta_box must contain the initial estimate 0");
  }
}

EstimatorState EstimatorState::initial(Eigen::Index input_dim,
                                       const EstimatorParams& p) {
  const Eigen::Index d = input_dim + 1;
  EstimatorState s;
  s.c = Vector::Zero(d);
  s.Sigma = p.alpha1 * Matrix::Identity(d, d);
  s.theta_hat = Vector::Zero(d);
  return s;
}

Eigen::Index EstimatorState::packed_size(Eigen::Index input_dim) {
  const Eigen::Index d = input_dim + 1;
  return 2 + 2 * d + d * d;
}

void EstimatorState::pack(Eigen::Ref<Vector> out) const {
  const Eigen::Index d = c.size();
  Eigen::Index k = 0;
  out[k++] = y_hat;
  out.segment(k, d) = c;
  k += d;
  out[k++] = eta_hat;
  out.segment(k, d * d) = Eigen::Map<const Vector>(Sigma.data(), d * d);
  k += d * d;
  out.segment(k, d) = theta_hat;
}

EstimatorState EstimatorState::unpack(const Eigen::Ref<const Vector>& in,
                                      Eigen::Index input_dim) {
  const Eigen::Index d = input_dim + 1;
  EstimatorState s;
  Eigen::Index k = 0;
  s.y_hat = in[k++];
  s.c = in.segment(k, d);
  k += d;
  s.eta_hat = in[k++];
  s.Sigma = Eigen::Map<const Matrix>(in.data() + k, d, d);
  k += d * d;
  s.theta_hat = in.segment(k, d);
  return s;
}

Vector true_theta(const GameModel& game, const Vector& x, const Vector& u,
                  AgentIndex i) {
  require_dim(x.size(), game.state_dim(), "state");
  require_dim(u.size(), game.input_dim(), "input");
  const Vector g = game.cost(i).gradient(x);
  const Eigen::Index off = game.state_offset(i);
  const Eigen::Index ni = game.state_dim(i);
  const Vector g_own = g.segment(off, ni);
  const Vector u_own = u.segment(game.input_offset(i), game.input_dim(i));

  Vector theta(game.input_dim(i) + 1);
  theta[0] = -g.dot(x) + g.dot(game.block_B() * u) -
             g_own.dot(game.B(i) * u_own);
  theta.tail(game.input_dim(i)) = game.B(i).transpose() * g_own;
  return theta;
}

Vector project_tangent_cone(const Vector& theta_hat, const Vector& v,
                            const ThetaBox& box) {
  require_dim(v.size(), theta_hat.size(), "projection direction");
  if (!box.contains(theta_hat)) {
    throw InvariantViolation("theta_hat outside its admissible box");
  }
  Vector out = v;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const bool outward_low = theta_hat[k] <= box.lower[k] && v[k] < 0;
    const bool outward_high = theta_hat[k] >= box.upper[k] && v[k] > 0;
    if (outward_low || outward_high) out[k] = 0.0;
  }
  return out;
}

EstimatorDerivative estimator_derivative(const EstimatorState& s,
                                         const EstimatorParams& p, double y_i,
                                         const Vector& u_i, AgentIndex agent,
                                         double t) {
  const Eigen::Index d = s.c.size();
  require_dim(u_i.size(), d - 1, "estimator input");

  Vector regressor(d);
  regressor[0] = 1.0;
  regressor.tail(d - 1) = u_i;

  const double e = y_i - s.y_hat;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(s.Sigma, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0) || hi / lo > 1e12) {
    throw BlowUpError("Sigma of agent " + std::to_string(agent + 1) +
                          " is numerically singular at t=" + std::to_string(t),
                      t);
  }
  const Eigen::LLT<Matrix> chol(s.Sigma);
  const Vector raw =
      chol.solve(s.c * (e - s.eta_hat) - p.sigma * s.theta_hat);

  // Cone taken at the nearest admissible point.
  EstimatorDerivative ds;
  ds.theta_hat = project_tangent_cone(p.box.clamp(s.theta_hat), raw, p.box);
  ds.y_hat = regressor.dot(s.theta_hat) + p.K * e + s.c.dot(ds.theta_hat);
  ds.c = -p.K * s.c + regressor;
  ds.eta_hat = -p.K * s.eta_hat;
  ds.Sigma = s.c * s.c.transpose() - p.k_T * s.Sigma +
             p.sigma * Matrix::Identity(d, d);
  return ds;
}

void enforce_invariants(EstimatorState& s, const EstimatorParams& p) {
  s.theta_hat = p.box.clamp(s.theta_hat);
  s.Sigma = (0.5 * (s.Sigma + s.Sigma.transpose())).eval();
}

}  // namespace inesc
