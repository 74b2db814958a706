#include "inesc/analysis.hpp"

#include "inesc/estimator.hpp"
#include "inesc/plant.hpp"
#include "inesc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace inesc {

namespace {

double spectral_norm(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues()(0);
}

double min_symmetric_eigenvalue(const Matrix& A) {
  const Matrix S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

Matrix fd_jacobian(const GameModel& game, const Vector& u) {
  const Eigen::Index m = u.size();
  Matrix J(m, m);
  Vector probe = u;
  for (Eigen::Index k = 0; k < m; ++k) {
    const double step = 1e-6 * (1.0 + std::abs(u[k]));
    probe[k] = u[k] + step;
    const Vector fp = pseudo_gradient_u(game, probe);
    probe[k] = u[k] - step;
    const Vector fm = pseudo_gradient_u(game, probe);
    probe[k] = u[k];
    J.col(k) = (fp - fm) / (2.0 * step);
  }
  return J;
}

NashSolution finish(const GameModel& game, Vector u) {
  NashSolution ne;
  ne.x_star = steady_state(game.block_B(), u);
  ne.residual = pseudo_gradient_u(game, u).norm();
  ne.u_star = std::move(u);
  return ne;
}

}  // namespace

NashSolution solve_ne(const GameModel& game) {
  const Eigen::Index m = game.input_dim();
  if (game.is_quadratic()) {
    const auto cert = check_monotonicity(game);
    if (!cert.is_strongly_monotone) {
      throw AssumptionViolation("pseudo-gradient is not strongly monotone (mu=" +
                                std::to_string(cert.mu) + ")");
    }
    // F(u) = J u + F(0) is affine.
    const Matrix J = input_jacobian(game);
    const Vector f0 = pseudo_gradient_u(game, Vector::Zero(m));
    const Eigen::FullPivLU<Matrix> lu(J);
    if (!lu.isInvertible()) {
      throw InvariantViolation(
          "Jacobian of F is singular although mu > 0 was certified");
    }
    Vector u = lu.solve(-f0);
    // One refinement step against round-off.
    u -= lu.solve(pseudo_gradient_u(game, u));
    return finish(game, std::move(u));
  }

  Vector u = Vector::Zero(m);
  double res = pseudo_gradient_u(game, u).norm();
  for (int iter = 0; iter < 200 && res > 1e-10; ++iter) {
    const Vector f = pseudo_gradient_u(game, u);
    const Vector dir = fd_jacobian(game, u).colPivHouseholderQr().solve(-f);
    double step = 1.0;
    Vector trial = u + dir;
    double trial_res = pseudo_gradient_u(game, trial).norm();
    while (trial_res >= res && step > 1e-8) {
      step *= 0.5;
      trial = u + step * dir;
      trial_res = pseudo_gradient_u(game, trial).norm();
    }
    if (!(trial_res < res)) break;
    u = trial;
    res = trial_res;
  }
  if (!(res <= 1e-10)) {
    throw SolverError("Newton iteration did not reach ||F(u)|| <= 1e-10 (got " +
                      std::to_string(res) + ")");
  }
  return finish(game, std::move(u));
}

MonotonicityCertificate check_monotonicity(const GameModel& game) {
  MonotonicityCertificate cert;
  if (game.is_quadratic()) {
    cert.mu = min_symmetric_eigenvalue(input_jacobian(game));
    cert.certified = true;
  } else {
    std::mt19937_64 rng(20200601);
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    const Eigen::Index m = game.input_dim();
    double mu = std::numeric_limits<double>::infinity();
    for (int pair = 0; pair < 1000; ++pair) {
      Vector u(m), v(m);
      for (Eigen::Index k = 0; k < m; ++k) u[k] = dist(rng);
      for (Eigen::Index k = 0; k < m; ++k) v[k] = dist(rng);
      const Vector d = u - v;
      const double dd = d.squaredNorm();
      if (dd == 0.0) continue;
      const double ratio =
          (pseudo_gradient_u(game, u) - pseudo_gradient_u(game, v)).dot(d) / dd;
      mu = std::min(mu, ratio);
    }
    cert.mu = mu;
    cert.certified = false;
  }
  cert.is_strongly_monotone = cert.mu > 0;
  return cert;
}

TauAdvice tau_advice(const GameModel& game, double beta) {
  if (!game.is_quadratic()) {
    throw UnsupportedError(
        "tau recommendation needs global Lipschitz constants (quadratic games "
        "only)");
  }
  if (!(beta > 0)) throw ConfigError("beta must be positive");
  TauAdvice a;
  a.beta = beta;
  const Matrix& B = game.block_B();
  const Matrix Jx = state_jacobian(game);
  a.L = spectral_norm(B.transpose() * Jx);
  a.L_F = spectral_norm(input_jacobian(game));
  a.mu = check_monotonicity(game).mu;
  a.B_norm = spectral_norm(B);
  if (!(a.mu > 0)) {
    throw AssumptionViolation("pseudo-gradient is not strongly monotone (mu=" +
                              std::to_string(a.mu) + ")");
  }
  const double bB = beta * a.B_norm;
  a.tau_star = ((a.L + bB * a.L_F) * (a.L + bB * a.L_F) + 4.0 * a.L * bB) /
               (4.0 * beta * a.mu);
  return a;
}

double recommend_tau(const GameModel& game, double beta) {
  return tau_advice(game, beta).tau_star;
}

Matrix lyapunov_gain_matrix(const TauAdvice& a, double tau_min) {
  const double bB = a.beta * a.B_norm;
  const double off = -(a.L + bB * a.L_F) / (2.0 * tau_min);
  Matrix M(2, 2);
  M << a.beta - a.L * bB / tau_min, off, off, a.mu / tau_min;
  return M;
}

Matrix fullinfo_system_matrix(const GameModel& game, const Vector& tau) {
  const Eigen::Index n = game.state_dim();
  const Eigen::Index m = game.input_dim();
  const Matrix& B = game.block_B();
  const Vector inv_tau = per_input_channel(game, tau).cwiseInverse();
  Matrix A = Matrix::Zero(n + m, n + m);
  A.topLeftCorner(n, n) = -Matrix::Identity(n, n);
  A.topRightCorner(n, m) = B;
  A.bottomLeftCorner(m, n) =
      -(inv_tau.asDiagonal() * (B.transpose() * state_jacobian(game)));
  return A;
}

double spectral_abscissa(const Matrix& A) {
  Eigen::EigenSolver<Matrix> eig(A, false);
  return eig.eigenvalues().real().maxCoeff();
}

PeReport pe_monitor(std::span<const Vector> c_trace, double dt, double window) {
  if (!(dt > 0)) throw ConfigError("PE monitor needs a positive sample spacing");
  if (!(window > 0)) throw ConfigError("PE window must be positive");
  if (c_trace.empty()) throw RangeError("PE monitor got an empty trace");
  const auto w = static_cast<Eigen::Index>(std::llround(window / dt));
  const auto intervals = static_cast<Eigen::Index>(c_trace.size()) - 1;
  if (w < 1 || w > intervals) {
    throw RangeError("PE window of " + std::to_string(window) +
                     " s exceeds the recorded trace");
  }
  const Eigen::Index d = c_trace.front().size();

  PeReport report;
  report.window_steps = w;
  // Running trapezoid sum, updated by adding the leading interval and
  // dropping the trailing one.
  auto interval = [&](Eigen::Index k) -> Matrix {
    const Vector& a = c_trace[static_cast<std::size_t>(k)];
    const Vector& b = c_trace[static_cast<std::size_t>(k + 1)];
    return 0.5 * dt * (a * a.transpose() + b * b.transpose());
  };
  Matrix gram = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < w; ++k) gram += interval(k);
  double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index start = 0;; ++start) {
    const double lam = min_symmetric_eigenvalue(gram);
    report.min_eigenvalue.push_back(lam);
    inf = std::min(inf, lam);
    if (start + w >= intervals) break;
    // Recompute periodically to bound accumulated round-off.
    if ((start + 1) % 4096 == 0) {
      gram.setZero();
      for (Eigen::Index k = start + 1; k < start + 1 + w; ++k) gram += interval(k);
    } else {
      gram += interval(start + w) - interval(start);
    }
  }
  report.alpha2 = inf;
  return report;
}

LyapunovTrace lyapunov_trace(const SimResult& run, const NashSolution& ne,
                             double beta) {
  if (!run.config || !run.layout || run.size() == 0) {
    throw DiagnosticError("Lyapunov trace needs a non-empty recorded run");
  }
  const auto& cfg = *run.config;
  const auto& game = cfg.game;
  Vector tau;
  switch (cfg.controller) {
    case ControllerKind::FullInfo:
      tau = cfg.tau;
      break;
    case ControllerKind::Inesc:
      tau.resize(static_cast<Eigen::Index>(cfg.inesc.size()));
      for (std::size_t i = 0; i < cfg.inesc.size(); ++i) {
        tau[static_cast<Eigen::Index>(i)] = cfg.inesc[i].tau;
      }
      break;
    case ControllerKind::Baseline:
      throw DiagnosticError(
          "Lyapunov functions are defined for the integral controllers only");
  }
  const Vector tau_ch = per_input_channel(game, tau);
  const double tau_min = tau.minCoeff();
  const Matrix& B = game.block_B();

  LyapunovTrace tr;
  tr.beta = beta;
  tr.eta_approximate = cfg.controller == ControllerKind::Inesc;
  for (std::size_t k = 0; k < run.size(); ++k) {
    const Vector x = run.x(k);
    const Vector u_hat = run.u_hat(k);
    const Vector du = u_hat - ne.u_star;
    const double V = 0.5 * beta * (x - steady_state(B, u_hat)).squaredNorm();
    const double T = du.dot(tau_ch.cwiseProduct(du)) / (2.0 * tau_min);
    double W = 0.0;
    if (cfg.controller == ControllerKind::Inesc) {
      const Vector eta = run.diagnostic_eta(k);
      for (AgentIndex i = 0; i < game.num_agents(); ++i) {
        const EstimatorState est = run.estimator(k, i);
        const Vector err =
            est.theta_hat - true_theta(game, x, run.inputs.at(k), i);
        const double eta_err = eta[static_cast<Eigen::Index>(i)] - est.eta_hat;
        W += 0.5 * eta_err * eta_err + 0.5 * err.dot(est.Sigma * err);
      }
    }
    tr.t.push_back(run.t[k]);
    tr.estimation.push_back(W);
    tr.plant.push_back(V);
    tr.ne_error.push_back(T);
    tr.total.push_back(W + V + T);
  }
  return tr;
}

}  // namespace inesc
