#pragma once

// Plot-ready output files: trajectory CSV, metrics JSON, comparison CSV and
// sweep tables. Floats are written with 17 significant digits.

#include "inesc/analysis.hpp"
#include "inesc/sim.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace inesc {

std::string format_double(double v);

// Columns: t, x_1..x_n, u_1..u_m, u_hat_1..u_hat_m, y_1..y_N, then for I-NESC
// theta_hat_<agent>_<k> for every estimator component, then W, V, T, L when a
// Lyapunov trace is supplied (W is the estimation term, L the sum).
std::vector<std::string> trajectory_header(const SimResult& result,
                                           bool with_lyapunov);
void write_trajectory_csv(std::ostream& out, const SimResult& result,
                          const LyapunovTrace* lyapunov);

nlohmann::json metrics_json(const SimResult& result, const NashSolution& ne,
                            const ConvergenceMetrics& metrics, double window);

// Joined figure data for two runs on the same game and time grid:
// t, inesc_x_*, baseline_x_*, inesc_u_*, baseline_u_*, x_star_*.
void write_compare_csv(std::ostream& out, const SimResult& inesc,
                       const SimResult& baseline, const NashSolution& ne);

struct SweepRow {
  std::string value;
  ConvergenceMetrics metrics;
  std::string hash;
};

void write_sweep_csv(std::ostream& out, const std::string& parameter,
                     const std::vector<SweepRow>& rows);

nlohmann::json to_json(const NashSolution& ne);
nlohmann::json to_json(const MonotonicityCertificate& cert);
nlohmann::json to_json(const TauAdvice& advice);

}  // namespace inesc
