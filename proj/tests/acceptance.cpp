// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Usage: acceptance [config_dir] [work_dir]

#include "inesc/analysis.hpp"
#include "inesc/cli.hpp"
#include "inesc/config.hpp"
#include "inesc/report.hpp"
#include "inesc/sim.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace inesc;
using json = nlohmann::json;

namespace {

fs::path g_configs = INESC_CONFIG_DIR;
fs::path g_work = fs::temp_directory_path() / "inesc_acceptance";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

fs::path config(const std::string& name) { return g_configs / (name + ".json"); }

// Hand-derived first-order conditions of the example game:
//   3u1 + 1.5u2 + u3 = 3, -2u1 + 3u2 + u3 = 6, -2.5u1 - u2 + 3u3 = 9.
Vector cramer_oracle() {
  const double A[3][3] = {{3, 1.5, 1}, {-2, 3, 1}, {-2.5, -1, 3}};
  const double b[3] = {3, 6, 9};
  auto det = [](const double M[3][3]) {
    return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
           M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
           M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
  };
  const double D = det(A);
  Vector u(3);
  for (int k = 0; k < 3; ++k) {
    double Ak[3][3];
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) Ak[r][c] = c == k ? b[r] : A[r][c];
    }
    u[k] = det(Ak) / D;
  }
  return u;
}

Vector json_vector(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = j[k];
  return v;
}

// Shared runs, computed once.
struct Runs {
  NashSolution ne;
  SimResult inesc;        // bundled config
  double inesc_seconds = 0;
  SimResult inesc_fine;   // bundled config recorded every step
  SimResult inesc_small;  // dither amplitude 0.25
  double inesc_small_seconds = 0;
};

Runs& runs() {
  static Runs r = [] {
    Runs out;
    const auto cfg = parse_config(config("fig1_inesc"));
    out.ne = solve_ne(cfg.game);
    auto t0 = std::chrono::steady_clock::now();
    out.inesc = run(cfg);
    out.inesc_seconds = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    out.inesc_small =
        run(parse_config(config("fig1_inesc"),
                         {"controller.agents.*.dither.amplitude=0.25"}));
    out.inesc_small_seconds = seconds_since(t0);
    out.inesc_fine = run(parse_config(config("fig1_inesc"), {"sim.stride=1"}));
    return out;
  }();
  return r;
}

constexpr double kWindow = 20.0;

Outcome ac1_ne_oracle() {
  std::ostringstream out, err;
  const auto t0 = std::chrono::steady_clock::now();
  const int code = cli::guarded(
      [&] { return cli::cmd_ne_solve(config("fig1_inesc"), {}, out); }, err);
  const double secs = seconds_since(t0);
  if (code != 0) return {false, "ne-solve exited " + std::to_string(code)};
  const json j = json::parse(out.str());
  const Vector u = json_vector(j["u_star"]);
  const double residual = pseudo_gradient_u(three_agent_example(), u).norm();
  const double mismatch = (u - cramer_oracle()).cwiseAbs().maxCoeff();
  // The timing covers file parsing as well as the solve.
  const bool ok = residual <= 1e-10 && mismatch <= 1e-10 && secs < 1e-3;
  return {ok, fmt("|F(u*)|=%.2e, |u*-oracle|=%.2e, runtime=%.3f ms", residual,
                  mismatch, secs * 1e3)};
}

Outcome ac2_monotone() {
  std::ostringstream out, err;
  const int code = cli::guarded(
      [&] { return cli::cmd_check_monotone(config("fig1_inesc"), {}, out); }, err);
  if (code != 0) return {false, "check-monotone exited " + std::to_string(code)};
  const double mu = json::parse(out.str())["mu"];
  Matrix S(3, 3);
  S << 3, -0.25, -0.75, -0.25, 3, 0, -0.75, 0, 3;
  const double ref = Eigen::SelfAdjointEigenSolver<Matrix>(S).eigenvalues().minCoeff();
  const bool ok = mu > 0 && std::abs(mu - ref) <= 0.05;
  return {ok, fmt("mu=%.6f, independent=%.6f", mu, ref)};
}

Outcome ac3_fullinfo() {
  auto cfg = parse_config(config("fig1_fullinfo"), {"sim.stride=1"});
  const double tau_star = recommend_tau(cfg.game, 1.0);
  cfg.tau = Vector::Constant(3, tau_star);
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run(cfg);
  const double secs = seconds_since(t0);
  const auto ne = solve_ne(cfg.game);
  const double final_err = (r.u_hat(r.size() - 1) - ne.u_star).norm();
  const auto tr = lyapunov_trace(r, ne, 1.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k < tr.total.size(); ++k) {
    worst = std::max(worst, tr.total[k] - tr.total[k - 1]);
  }
  const double abscissa = spectral_abscissa(fullinfo_system_matrix(cfg.game, cfg.tau));
  const bool ok = final_err < 1e-6 && worst <= 1e-9 && abscissa < 0 && secs < 1.0;
  return {ok, fmt("tau*=%.4f, |u(100)-u*|=%.2e, max dW/step=%.2e, "
                  "spectral abscissa=%.4f, runtime=%.2f s",
                  tau_star, final_err, worst, abscissa, secs)};
}

// First verified run gave 0.012817; regressions beyond 10% are flagged.
constexpr double kLockedTrailing = 0.012817;

Outcome ac4_inesc() {
  auto& R = runs();
  const auto m = convergence_metrics(R.inesc, R.ne, kWindow);
  const double e = m.trailing_input_error;
  const bool locked = std::abs(e - kLockedTrailing) <= 0.1 * kLockedTrailing;
  const bool ok = std::isfinite(e) && e < 0.2 && locked && R.inesc_seconds < 10.0;
  return {ok, fmt("trailing-20s |u_hat-u*|=%.6f (locked %.6f), runtime=%.2f s", e,
                  kLockedTrailing, R.inesc_seconds)};
}

Outcome ac5_scaling() {
  auto& R = runs();
  const double big = convergence_metrics(R.inesc, R.ne, kWindow).trailing_input_error;
  const double small =
      convergence_metrics(R.inesc_small, R.ne, kWindow).trailing_input_error;
  const double ratio = big / small;
  const double secs = R.inesc_seconds + R.inesc_small_seconds;
  const bool ok = ratio >= 2.0 && ratio <= 8.0 && secs < 20.0;
  return {ok, fmt("eps(0.5)=%.6f, eps(0.25)=%.6f, ratio=%.3f (need [2, 8]), "
                  "runtime=%.2f s",
                  big, small, ratio, secs)};
}

Outcome ac6_estimator() {
  auto& R = runs();
  const auto& r = R.inesc_fine;
  const auto& game = r.config->game;
  const double h = r.step;
  double worst_rms = 0.0;
  for (AgentIndex i = 0; i < 3; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 2; k + 2 < r.size(); ++k) {
      const double ydot = (-r.outputs[k + 2][col] + 8 * r.outputs[k + 1][col] -
                           8 * r.outputs[k - 1][col] + r.outputs[k - 2][col]) /
                          (12 * h);
      const Vector th = true_theta(game, r.x(k), r.inputs[k], i);
      const double model = th[0] + th[1] * r.inputs[k][col];
      sum += (ydot - model) * (ydot - model);
      ++count;
    }
    worst_rms = std::max(worst_rms, std::sqrt(sum / static_cast<double>(count)));
  }

  const double t_end = r.t.back();
  std::vector<double> tracking(3, 0.0);
  std::size_t count = 0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r.t[k] < t_end - kWindow - 1e-12) continue;
    for (AgentIndex i = 0; i < 3; ++i) {
      const Vector th = true_theta(game, r.x(k), r.inputs[k], i);
      tracking[i] += (r.estimator(k, i).theta1() - th.tail(1)).norm();
    }
    ++count;
  }
  double worst_track = 0.0;
  std::string per_agent;
  for (AgentIndex i = 0; i < 3; ++i) {
    tracking[i] /= static_cast<double>(count);
    worst_track = std::max(worst_track, tracking[i]);
    per_agent += fmt("%s%.4f", i ? ", " : "", tracking[i]);
  }
  const bool ok = worst_rms < 1e-3 && worst_track < 0.5;
  return {ok, fmt("chain-rule RMS=%.2e, trailing |theta1_hat-theta1|=(%s)",
                  worst_rms, per_agent.c_str())};
}

std::vector<Vector> c_trace(const SimResult& r, AgentIndex i) {
  std::vector<Vector> c;
  c.reserve(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) c.push_back(r.estimator(k, i).c);
  return c;
}

Outcome ac7_pe() {
  auto& R = runs();
  const double window = 2 * std::numbers::pi / 40.0;
  double alpha = std::numeric_limits<double>::infinity();
  for (AgentIndex i = 0; i < 3; ++i) {
    alpha = std::min(alpha, pe_monitor(c_trace(R.inesc_fine, i), R.inesc_fine.step,
                                       window).alpha2);
  }

  // Constant input: zero costs keep u_hat at its initial value.
  const auto still = run(parse_config(
      config("fig1_inesc"),
      {"controller.agents.*.dither.amplitude=0", "game.agents.*.cost.Q=[0,0,0,0,0,0,0,0,0]",
       "game.agents.*.cost.q=[0,0,0]", "sim.initial.u=[1,2,3]", "sim.horizon=10",
       "sim.stride=1"}));
  double worst_rel = 0.0;
  for (AgentIndex i = 0; i < 3; ++i) {
    const auto trace = c_trace(still, i);
    const auto rep = pe_monitor(trace, still.step, window);
    Matrix gram = Matrix::Zero(2, 2);
    for (Eigen::Index k = 0; k < rep.window_steps; ++k) {
      gram += still.step * trace[static_cast<std::size_t>(k)] *
              trace[static_cast<std::size_t>(k)].transpose();
    }
    const double scale = gram.trace();
    worst_rel = std::max(worst_rel, std::abs(rep.alpha2) / scale);
  }
  const bool ok = alpha > 0 && worst_rel < 1e-9;
  return {ok, fmt("dithered alpha2=%.3e over windows of %.4f s; constant-input "
                  "|alpha2|/tr=%.2e",
                  alpha, window, worst_rel)};
}

Outcome ac8_compare() {
  const fs::path dir = g_work / "compare";
  cli::CommonOptions opts;
  opts.out_dir = dir.string();
  std::ostringstream out, err;
  const int code = cli::guarded(
      [&] {
        return cli::cmd_compare(config("fig1_inesc"), config("fig1_baseline"), opts, out);
      },
      err);
  if (code != 0) return {false, "compare exited " + std::to_string(code) + ": " + err.str()};

  std::ifstream in(dir / "compare.csv");
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  if (rows.empty()) return {false, "compare.csv is empty"};
  // t, inesc_x_1..3, baseline_x_1..3, inesc_u_1..3, baseline_u_1..3, x_star_1..3
  const double t_end = rows.back()[0];
  double worst_inesc = 0.0, worst_base = 0.0;
  for (const auto& row : rows) {
    if (row[0] < t_end - kWindow - 1e-12) continue;
    double ei = 0.0, eb = 0.0;
    for (int k = 0; k < 3; ++k) {
      ei += std::pow(row[1 + k] - row[13 + k], 2);
      eb += std::pow(row[4 + k] - row[13 + k], 2);
    }
    worst_inesc = std::max(worst_inesc, std::sqrt(ei));
    worst_base = std::max(worst_base, std::sqrt(eb));
  }
  const auto a = parse_config(config("fig1_inesc"));
  const auto b = parse_config(config("fig1_baseline"));
  double a_amp = 0, a_freq = 0, b_amp = 0, b_freq_min = 1e300;
  for (const auto& p : a.inesc) {
    a_amp = std::max(a_amp, p.dither.max_amplitude());
    a_freq = std::max(a_freq, p.dither.max_frequency());
  }
  for (const auto& p : b.baseline) {
    b_amp = std::max(b_amp, p.A);
    b_freq_min = std::min(b_freq_min, p.omega);
  }
  const bool ok = worst_inesc <= 0.15 && worst_base <= 0.15 && a_amp < b_amp &&
                  a_freq < b_freq_min;
  return {ok, fmt("max |x-x*| over last 20 s: inesc=%.4f, baseline=%.4f; "
                  "dither %.1f@<=%.0f rad/s vs %.1f@>=%.0f rad/s",
                  worst_inesc, worst_base, a_amp, a_freq, b_amp, b_freq_min)};
}

Outcome ac9_numerics() {
  const auto game = three_agent_example();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-10, 10);
  double fd_worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Vector x(3);
    for (auto& v : x) v = U(rng);
    for (AgentIndex i = 0; i < 3; ++i) {
      const Vector g = game.cost(i).gradient(x);
      Vector fd(3);
      for (int k = 0; k < 3; ++k) {
        Vector p = x, m = x;
        p[k] += 1e-5;
        m[k] -= 1e-5;
        fd[k] = (eval_cost(game, i, p) - eval_cost(game, i, m)) / 2e-5;
      }
      fd_worst = std::max(fd_worst, (g - fd).norm() / std::max(1.0, g.norm()));
    }
  }

  auto coarse = parse_config(config("fig1_fullinfo"), {"sim.stride=1000"});
  auto fine = coarse;
  fine.sim.step /= 2;
  fine.sim.stride *= 2;
  const auto rc = run(coarse);
  const auto rf = run(fine);
  const double halving = (rc.states.back() - rf.states.back()).cwiseAbs().maxCoeff();

  auto csv = [](const SimResult& r) {
    std::ostringstream s;
    write_trajectory_csv(s, r, nullptr);
    return s.str();
  };
  const auto short_cfg = parse_config(config("fig1_inesc"), {"sim.horizon=10"});
  const bool deterministic = csv(run(short_cfg)) == csv(run(short_cfg));

  auto& R = runs();
  double sigma_margin = std::numeric_limits<double>::infinity();
  bool in_box = true;
  for (const SimResult* r : {&R.inesc, &R.inesc_small, &R.inesc_fine}) {
    for (std::size_t k = 0; k < r->size(); ++k) {
      for (AgentIndex i = 0; i < 3; ++i) {
        const auto& p = r->config->inesc[i].estimator;
        const auto est = r->estimator(k, i);
        const double lo =
            Eigen::SelfAdjointEigenSolver<Matrix>(est.Sigma).eigenvalues().minCoeff();
        sigma_margin = std::min(sigma_margin, lo - std::min(p.alpha1, p.sigma / p.k_T));
        in_box = in_box && p.box.contains(est.theta_hat);
      }
    }
  }
  const bool ok = fd_worst < 1e-6 && halving < 1e-8 && deterministic &&
                  sigma_margin >= -1e-8 && in_box;
  return {ok, fmt("FD rel err=%.2e, step-halving change=%.2e, deterministic=%s, "
                  "min eig(Sigma)-bound=%.2e, theta_hat in box=%s",
                  fd_worst, halving, deterministic ? "yes" : "no", sigma_margin,
                  in_box ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_configs = argv[1];
  if (argc > 2) g_work = argv[2];
  fs::create_directories(g_work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 NE oracle", ac1_ne_oracle},
      {"AC2 strong monotonicity", ac2_monotone},
      {"AC3 full-information convergence", ac3_fullinfo},
      {"AC4 limited-information convergence", ac4_inesc},
      {"AC5 dither-amplitude scaling", ac5_scaling},
      {"AC6 estimator correctness", ac6_estimator},
      {"AC7 persistence of excitation", ac7_pe},
      {"AC8 baseline comparison", ac8_compare},
      {"AC9 numerics", ac9_numerics},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/"
            << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
