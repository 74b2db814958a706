#include "inesc/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace inesc;

namespace {

// h_i = 1/2 x' Q_i x over scalar agents with B = I.
GameModel scalar_game(const std::vector<Matrix>& Qs, double scale = 1.0,
                      double offset = 0.0) {
  const auto n = static_cast<Eigen::Index>(Qs.size());
  std::vector<Matrix> B(Qs.size(), Matrix::Identity(1, 1));
  std::vector<Cost> costs;
  for (const auto& Q : Qs) {
    costs.emplace_back(QuadraticCost{scale * Q, Vector::Zero(n), offset});
  }
  return GameModel(std::move(B), std::move(costs));
}

GameModel rotation_game() {
  Matrix Q1 = Matrix::Zero(2, 2), Q2 = Matrix::Zero(2, 2);
  Q1(0, 1) = Q1(1, 0) = 1.0;
  Q2(0, 1) = Q2(1, 0) = -1.0;
  return scalar_game({Q1, Q2});
}

GameModel diagonal_game(double mu) {
  std::vector<Matrix> Qs;
  for (int i = 0; i < 3; ++i) {
    Matrix Q = Matrix::Zero(3, 3);
    Q(i, i) = mu;
    Qs.push_back(Q);
  }
  return scalar_game(Qs);
}

double det3(const Matrix& A) {
  return A(0, 0) * (A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1)) -
         A(0, 1) * (A(1, 0) * A(2, 2) - A(1, 2) * A(2, 0)) +
         A(0, 2) * (A(1, 0) * A(2, 1) - A(1, 1) * A(2, 0));
}

}  // namespace

TEST_CASE("Nash equilibrium of the example game against Cramer's rule") {
  const auto g = three_agent_example();
  const auto ne = solve_ne(g);
  // 3u1 + 1.5u2 + u3 = 3; -2u1 + 3u2 + u3 = 6; -2.5u1 - u2 + 3u3 = 9
  Matrix A(3, 3);
  A << 3, 1.5, 1, -2, 3, 1, -2.5, -1, 3;
  const Vector b = (Vector(3) << 3, 6, 9).finished();
  const double D = det3(A);
  for (int k = 0; k < 3; ++k) {
    Matrix Ak = A;
    Ak.col(k) = b;
    CHECK(std::abs(ne.u_star[k] - det3(Ak) / D) < 1e-10);
  }
  CHECK(std::abs(ne.u_star[0] + 66.0 / 179.0) < 1e-12);
  CHECK(std::abs(ne.u_star[1] - 138.0 / 179.0) < 1e-12);
  CHECK(std::abs(ne.u_star[2] - 528.0 / 179.0) < 1e-12);
  CHECK(ne.residual <= 1e-10);
  CHECK(pseudo_gradient_u(g, ne.u_star).norm() <= 1e-10);
  CHECK(ne.x_star == g.block_B() * ne.u_star);
}

TEST_CASE("decoupled game equilibrium is the vector of minimizers") {
  const Vector c = (Vector(3) << 1, -2, 0.5).finished();
  std::vector<Matrix> Qs;
  std::vector<Cost> costs;
  for (int i = 0; i < 3; ++i) {
    Matrix Q = Matrix::Zero(3, 3);
    Q(i, i) = 2.0;
    Vector q = Vector::Zero(3);
    q[i] = -2.0 * c[i];
    costs.emplace_back(QuadraticCost{Q, q, c[i] * c[i]});
  }
  const GameModel g(std::vector<Matrix>(3, Matrix::Identity(1, 1)), std::move(costs));
  CHECK((solve_ne(g).u_star - c).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Newton path for callback costs") {
  // h_i = (x_i - c_i)^2 + 0.1 x_i^4 + 0.2 x_i x_j, strongly monotone.
  std::vector<Cost> costs;
  const double c[] = {1.0, -0.5};
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    costs.emplace_back(CallbackCost{
        [=](const Vector& x) {
          return std::pow(x[i] - c[i], 2) + 0.1 * std::pow(x[i], 4) + 0.2 * x[i] * x[j];
        },
        {}});
  }
  const GameModel g(std::vector<Matrix>(2, Matrix::Identity(1, 1)), std::move(costs));
  const auto ne = solve_ne(g);
  CHECK(ne.residual <= 1e-8);
  const auto cert = check_monotonicity(g);
  CHECK_FALSE(cert.certified);
  CHECK(cert.is_strongly_monotone);
  CHECK_THROWS_AS(tau_advice(g), UnsupportedError);
}

TEST_CASE("strong monotonicity") {
  const auto g = three_agent_example();
  const Matrix J = input_jacobian(g);
  Matrix expect(3, 3);
  expect << 3, 1.5, 1, -2, 3, 1, -2.5, -1, 3;
  CHECK((J - expect).cwiseAbs().maxCoeff() < 1e-15);

  Matrix S(3, 3);
  S << 3, -0.25, -0.75, -0.25, 3, 0, -0.75, 0, 3;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  const auto cert = check_monotonicity(g);
  CHECK(cert.certified);
  CHECK(cert.is_strongly_monotone);
  CHECK(std::abs(cert.mu - eig.eigenvalues().minCoeff()) < 1e-12);
  CHECK(cert.mu == doctest::Approx(2.209).epsilon(1e-3));

  CHECK(check_monotonicity(diagonal_game(1.0)).mu == doctest::Approx(1.0));

  const auto rot = check_monotonicity(rotation_game());
  CHECK(std::abs(rot.mu) < 1e-15);
  CHECK_FALSE(rot.is_strongly_monotone);
}

TEST_CASE("monotonicity ignores cost constants") {
  Matrix Q = Matrix::Identity(2, 2);
  Q(0, 1) = Q(1, 0) = 0.4;
  const auto a = check_monotonicity(scalar_game({Q, Q}, 1.0, 0.0));
  const auto b = check_monotonicity(scalar_game({Q, Q}, 1.0, 123.0));
  CHECK(a.mu == b.mu);
}

TEST_CASE("non-monotone games are refused") {
  CHECK_THROWS_AS(solve_ne(rotation_game()), AssumptionViolation);
  CHECK_THROWS_AS(tau_advice(rotation_game()), AssumptionViolation);
}

TEST_CASE("time-constant threshold") {
  SUBCASE("scaled identity Jacobian") {
    for (double mu : {0.5, 1.0, 3.0}) {
      const auto adv = tau_advice(diagonal_game(mu));
      CHECK(adv.L == doctest::Approx(mu));
      CHECK(adv.L_F == doctest::Approx(mu));
      CHECK(adv.tau_star == doctest::Approx(mu + 1.0));
    }
  }
  SUBCASE("example game") {
    const auto g = three_agent_example();
    const auto adv = tau_advice(g, 1.0);
    const Matrix J = input_jacobian(g);
    const double L = J.jacobiSvd().singularValues()[0];
    const double mu = check_monotonicity(g).mu;
    CHECK(adv.L == doctest::Approx(L));
    CHECK(adv.L_F == doctest::Approx(L));
    CHECK(adv.tau_star == doctest::Approx((std::pow(2 * L, 2) + 4 * L) / (4 * mu)));
    CHECK(recommend_tau(g) == adv.tau_star);
  }
  SUBCASE("cost scaling") {
    Matrix Q = Matrix::Identity(2, 2);
    Q(0, 1) = 0.7;
    Q(1, 0) = 0.7;
    const Matrix Q2 = 1.5 * Matrix::Identity(2, 2);
    for (double s : {0.5, 2.0, 10.0}) {
      const auto base = tau_advice(scalar_game({Q, Q2}));
      const auto scaled = tau_advice(scalar_game({Q, Q2}, s));
      CHECK(scaled.L == doctest::Approx(s * base.L));
      CHECK(scaled.mu == doctest::Approx(s * base.mu));
      const double expect =
          (std::pow(s * base.L + s * base.L_F, 2) + 4 * s * base.L) / (4 * s * base.mu);
      CHECK(scaled.tau_star == doctest::Approx(expect));
    }
  }
}

TEST_CASE("closed loop is Hurwitz at and above the threshold") {
  const auto g = three_agent_example();
  const auto adv = tau_advice(g);
  for (double factor : {1.0, 1.5, 4.0}) {
    const Vector tau = Vector::Constant(3, adv.tau_star * factor);
    CHECK(spectral_abscissa(fullinfo_system_matrix(g, tau)) < 0);
  }
  CHECK(spectral_abscissa(fullinfo_system_matrix(g, (Vector(3) << 5, 10, 15).finished())) < 0);
}

TEST_CASE("gain matrix definiteness") {
  // det M > 0 exactly when
  // tau > ((L + beta|B| L_F)^2 + 4 mu L beta|B|) / (4 beta mu).
  auto exact_threshold = [](const TauAdvice& a) {
    const double bB = a.beta * a.B_norm;
    return (std::pow(a.L + bB * a.L_F, 2) + 4 * a.mu * a.L * bB) / (4 * a.beta * a.mu);
  };
  auto min_eig = [](const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
    return eig.eigenvalues().minCoeff();
  };

  SUBCASE("example game") {
    const auto adv = tau_advice(three_agent_example());
    const double tc = exact_threshold(adv);
    CHECK(std::abs(lyapunov_gain_matrix(adv, tc).determinant()) < 1e-12);
    for (double factor : {1.01, 2.0, 10.0}) {
      CHECK(min_eig(lyapunov_gain_matrix(adv, factor * tc)) > 0);
    }
    CHECK(min_eig(lyapunov_gain_matrix(adv, 0.99 * tc)) < 0);
    // mu > 1 here, so the advertised threshold sits below the exact one.
    CHECK(adv.tau_star < tc);
  }
  SUBCASE("the advertised threshold suffices when mu <= 1") {
    for (double mu : {0.25, 0.5, 1.0}) {
      const auto adv = tau_advice(diagonal_game(mu));
      CHECK(adv.tau_star >= exact_threshold(adv) - 1e-12);
      CHECK(min_eig(lyapunov_gain_matrix(adv, 1.001 * adv.tau_star)) > 0);
    }
  }
}

TEST_CASE("persistence-of-excitation monitor") {
  const double dt = 1e-3;

  SUBCASE("rotating regressor over one period") {
    const double w = 2.0 * std::numbers::pi;  // period 1 s
    std::vector<Vector> c;
    for (int k = 0; k <= 3000; ++k) {
      const double t = k * dt;
      c.push_back((Vector(2) << std::cos(w * t), std::sin(w * t)).finished());
    }
    const auto r = pe_monitor(c, dt, 2 * std::numbers::pi / w);
    CHECK(r.window_steps == 1000);
    CHECK(r.alpha2 == doctest::Approx(std::numbers::pi / w).epsilon(1e-6));
    for (double v : r.min_eigenvalue) {
      CHECK(v == doctest::Approx(std::numbers::pi / w).epsilon(1e-6));
    }
  }
  SUBCASE("time shift invariance") {
    const double w = 5.0;
    auto trace = [&](double shift) {
      std::vector<Vector> c;
      for (int k = 0; k <= 4000; ++k) {
        const double t = k * dt + shift;
        c.push_back((Vector(2) << 1.0 + 0.0 * t, std::sin(w * t)).finished());
      }
      return c;
    };
    const double window = 4 * std::numbers::pi / w;
    const auto a = pe_monitor(trace(0.0), dt, window);
    const auto b = pe_monitor(trace(0.123), dt, window);
    CHECK(std::abs(a.alpha2 - b.alpha2) < 1e-6);
  }
  SUBCASE("constant regressor is rank one") {
    std::vector<Vector> c(2001, (Vector(2) << 0.02, 0.01).finished());
    const auto r = pe_monitor(c, dt, 1.0);
    CHECK(std::abs(r.alpha2) < 1e-12);
  }
  SUBCASE("window longer than the trace") {
    std::vector<Vector> c(10, Vector::Ones(2));
    CHECK_THROWS_AS(pe_monitor(c, dt, 1.0), RangeError);
  }
}
