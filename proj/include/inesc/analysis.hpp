#pragma once

// Ground-truth oracles and diagnostics: Nash equilibrium, strong
// monotonicity, the full-information time-constant threshold, persistence of
// excitation, and Lyapunov function traces along recorded runs.

#include "inesc/game.hpp"
#include "inesc/types.hpp"

#include <span>
#include <vector>

namespace inesc {

struct SimResult;

struct NashSolution {
  Vector u_star;
  Vector x_star;  // pi(u_star)
  double residual = 0.0;  // ||F(u_star)||
};

// Quadratic games: exact linear solve of F(u) = 0. Otherwise damped Newton
// with a finite-difference Jacobian (at most 200 iterations).
NashSolution solve_ne(const GameModel& game);

struct MonotonicityCertificate {
  double mu = 0.0;
  bool is_strongly_monotone = false;
  // True when mu is exact (quadratic game); false for a sampled estimate.
  bool certified = false;
};

MonotonicityCertificate check_monotonicity(const GameModel& game);

struct TauAdvice {
  double tau_star = 0.0;
  double L = 0.0;       // ||B' J_x||, Lipschitz constant of B' o F_x
  double L_F = 0.0;     // ||J||, Lipschitz constant of F
  double mu = 0.0;
  double B_norm = 0.0;  // ||B||
  double beta = 1.0;
};

// tau* = ((L + beta ||B|| L_F)^2 + 4 L beta ||B||) / (4 beta mu).
// Quadratic games only; throws AssumptionViolation when mu <= 0.
TauAdvice tau_advice(const GameModel& game, double beta = 1.0);
double recommend_tau(const GameModel& game, double beta = 1.0);

// The 2x2 matrix bounding the full-information Lyapunov derivative in
// (||x - pi(u)||, ||u - u*||). Positive definite iff tau_min > L|B| and
// tau_min > ((L + beta|B| L_F)^2 + 4 mu L beta|B|) / (4 beta mu), which
// tau* only guarantees when mu <= 1.
Matrix lyapunov_gain_matrix(const TauAdvice& advice, double tau_min);

// Closed-loop matrix of the full-information loop on a quadratic game, state
// ordering [x; u]: [[-I, B], [-tau^{-1} B' J_x, 0]].
Matrix fullinfo_system_matrix(const GameModel& game, const Vector& tau);

// Largest real part over the eigenvalues.
double spectral_abscissa(const Matrix& A);

struct PeReport {
  std::vector<double> min_eigenvalue;  // one per window start sample
  double alpha2 = 0.0;                 // infimum over windows
  Eigen::Index window_steps = 0;
};

// Windowed Gram integrals of c c' (trapezoid rule on a uniform grid of
// spacing dt) and their minimum eigenvalues. The window is rounded to a whole
// number of steps; throws RangeError when it exceeds the trace.
PeReport pe_monitor(std::span<const Vector> c_trace, double dt, double window);

struct LyapunovTrace {
  std::vector<double> t;
  std::vector<double> estimation;  // sum 1/2 eta~^2 + 1/2 theta~' Sigma theta~
  std::vector<double> plant;       // V = beta/2 ||x - pi(u)||^2
  std::vector<double> ne_error;    // T = 1/(2 tau_min) u~' tau u~
  std::vector<double> total;       // estimation + plant + ne_error
  double beta = 1.0;
  // Set when eta~ relies on the co-integrated, finite-differenced eta.
  bool eta_approximate = false;
};

// Full-information and I-NESC runs only; throws DiagnosticError otherwise.
LyapunovTrace lyapunov_trace(const SimResult& run, const NashSolution& ne,
                             double beta = 1.0);

}  // namespace inesc
