#include "inesc/report.hpp"

#include <cstdio>
#include <ostream>

namespace inesc {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

void write_row(std::ostream& out, const std::vector<double>& row) {
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (k) out << ',';
    out << format_double(row[k]);
  }
  out << '\n';
}

void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (k) out << ',';
    out << cols[k];
  }
  out << '\n';
}

void append(std::vector<double>& row, const Vector& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) row.push_back(v[k]);
}

void numbered(std::vector<std::string>& cols, const std::string& prefix,
              Eigen::Index count) {
  for (Eigen::Index k = 1; k <= count; ++k) {
    cols.push_back(prefix + std::to_string(k));
  }
}

}  // namespace

std::vector<std::string> trajectory_header(const SimResult& result,
                                           bool with_lyapunov) {
  const auto& game = result.config->game;
  std::vector<std::string> cols{"t"};
  numbered(cols, "x_", game.state_dim());
  numbered(cols, "u_", game.input_dim());
  numbered(cols, "u_hat_", game.input_dim());
  numbered(cols, "y_", static_cast<Eigen::Index>(game.num_agents()));
  if (result.config->controller == ControllerKind::Inesc) {
    for (AgentIndex i = 0; i < game.num_agents(); ++i) {
      for (Eigen::Index k = 0; k <= game.input_dim(i); ++k) {
        cols.push_back("theta_hat_" + std::to_string(i + 1) + "_" +
                       std::to_string(k));
      }
    }
  }
  if (with_lyapunov) {
    for (const char* c : {"W", "V", "T", "L"}) cols.emplace_back(c);
  }
  return cols;
}

void write_trajectory_csv(std::ostream& out, const SimResult& result,
                          const LyapunovTrace* lyapunov) {
  if (lyapunov && lyapunov->t.size() != result.size()) {
    throw DiagnosticError("Lyapunov trace does not match the run");
  }
  const auto& game = result.config->game;
  write_header(out, trajectory_header(result, lyapunov != nullptr));
  std::vector<double> row;
  for (std::size_t k = 0; k < result.size(); ++k) {
    row.clear();
    row.push_back(result.t[k]);
    append(row, result.x(k));
    append(row, result.inputs[k]);
    append(row, result.u_hat(k));
    append(row, result.outputs[k]);
    if (result.config->controller == ControllerKind::Inesc) {
      for (AgentIndex i = 0; i < game.num_agents(); ++i) {
        append(row, result.estimator(k, i).theta_hat);
      }
    }
    if (lyapunov) {
      row.push_back(lyapunov->estimation[k]);
      row.push_back(lyapunov->plant[k]);
      row.push_back(lyapunov->ne_error[k]);
      row.push_back(lyapunov->total[k]);
    }
    write_row(out, row);
  }
}

json metrics_json(const SimResult& result, const NashSolution& ne,
                  const ConvergenceMetrics& m, double window) {
  json j{{"config_hash", result.config->hash},
         {"name", result.config->name},
         {"controller", to_string(result.config->controller)},
         {"step", result.step},
         {"horizon", result.horizon},
         {"stride", result.stride},
         {"samples", result.size()},
         {"window", window},
         {"u_star", vec_json(ne.u_star)},
         {"x_star", vec_json(ne.x_star)},
         {"trailing_input_error", m.trailing_input_error},
         {"trailing_state_error", m.trailing_state_error},
         {"trailing_ne_state_error", m.trailing_ne_state_error},
         {"peak_input_error", m.peak_input_error},
         {"peak_state_error", m.peak_state_error},
         {"final_input_error", m.final_input_error},
         {"final_ne_state_error", m.final_ne_state_error}};
  j["entry_time"] = m.entry_time ? json(*m.entry_time) : json(nullptr);
  if (result.size()) {
    j["final_x"] = vec_json(result.x(result.size() - 1));
    j["final_u_hat"] = vec_json(result.u_hat(result.size() - 1));
  }
  return j;
}

void write_compare_csv(std::ostream& out, const SimResult& inesc,
                       const SimResult& baseline, const NashSolution& ne) {
  if (inesc.t != baseline.t) {
    throw ConfigError(
        "compare needs identical step, stride and horizon for both runs");
  }
  const auto& game = inesc.config->game;
  std::vector<std::string> cols{"t"};
  numbered(cols, "inesc_x_", game.state_dim());
  numbered(cols, "baseline_x_", game.state_dim());
  numbered(cols, "inesc_u_", game.input_dim());
  numbered(cols, "baseline_u_", game.input_dim());
  numbered(cols, "x_star_", game.state_dim());
  write_header(out, cols);
  std::vector<double> row;
  for (std::size_t k = 0; k < inesc.size(); ++k) {
    row.clear();
    row.push_back(inesc.t[k]);
    append(row, inesc.x(k));
    append(row, baseline.x(k));
    append(row, inesc.inputs[k]);
    append(row, baseline.inputs[k]);
    append(row, ne.x_star);
    write_row(out, row);
  }
}

void write_sweep_csv(std::ostream& out, const std::string& parameter,
                     const std::vector<SweepRow>& rows) {
  out << "parameter,value,config_hash,trailing_input_error,trailing_state_error,"
         "trailing_ne_state_error,peak_input_error,final_input_error,entry_time\n";
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    out << parameter << ',' << r.value << ',' << r.hash << ','
        << format_double(m.trailing_input_error) << ','
        << format_double(m.trailing_state_error) << ','
        << format_double(m.trailing_ne_state_error) << ','
        << format_double(m.peak_input_error) << ','
        << format_double(m.final_input_error) << ','
        << (m.entry_time ? format_double(*m.entry_time) : std::string())
        << '\n';
  }
}

json to_json(const NashSolution& ne) {
  return json{{"u_star", vec_json(ne.u_star)},
              {"x_star", vec_json(ne.x_star)},
              {"residual", ne.residual}};
}

json to_json(const MonotonicityCertificate& cert) {
  return json{{"mu", cert.mu},
              {"is_strongly_monotone", cert.is_strongly_monotone},
              {"certified", cert.certified}};
}

json to_json(const TauAdvice& a) {
  return json{{"tau_star", a.tau_star}, {"L", a.L},           {"L_F", a.L_F},
              {"mu", a.mu},             {"B_norm", a.B_norm}, {"beta", a.beta}};
}

}  // namespace inesc
