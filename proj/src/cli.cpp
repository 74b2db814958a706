#include "inesc/cli.hpp"

#include "inesc/analysis.hpp"
#include "inesc/config.hpp"
#include "inesc/report.hpp"

#include <json.hpp>

#include <fstream>
#include <future>

namespace inesc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> all_overrides(const CommonOptions& opts) {
  std::vector<std::string> o = opts.overrides;
  if (opts.step) o.push_back("sim.step=" + format_double(*opts.step));
  if (opts.horizon) o.push_back("sim.horizon=" + format_double(*opts.horizon));
  return o;
}

ExperimentConfig load(const fs::path& path, const CommonOptions& opts,
                      std::vector<std::string> extra = {}) {
  std::vector<std::string> o = all_overrides(opts);
  o.insert(o.end(), extra.begin(), extra.end());
  ExperimentConfig cfg = parse_config(path, o);
  if (opts.out_dir) cfg.output_dir = *opts.out_dir;
  return cfg;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  body(f);
  if (!f) throw Error("write to '" + path.string() + "' failed");
}

std::optional<LyapunovTrace> maybe_lyapunov(const SimResult& r,
                                            const NashSolution& ne) {
  if (r.config->controller == ControllerKind::Baseline) return std::nullopt;
  return lyapunov_trace(r, ne, 1.0);
}

void emit_run(const SimResult& r, const NashSolution& ne, const fs::path& dir,
              const std::string& stem, double window) {
  const auto lyap = maybe_lyapunov(r, ne);
  write_file(dir / (stem + ".csv"), [&](std::ostream& f) {
    write_trajectory_csv(f, r, lyap ? &*lyap : nullptr);
  });
  const ConvergenceMetrics m = convergence_metrics(r, ne, window);
  write_file(dir / (stem + "_metrics.json"), [&](std::ostream& f) {
    f << metrics_json(r, ne, m, window).dump(2) << '\n';
  });
}

}  // namespace

int guarded(const std::function<int()>& body, std::ostream& err) {
  auto report = [&](const char* kind, const std::string& msg, int code) {
    err << json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump()
        << std::endl;
    return code;
  };
  try {
    return body();
  } catch (const ConfigError& e) {
    return report("config", e.what(), kConfigError);
  } catch (const UnsupportedError& e) {
    return report("unsupported", e.what(), kConfigError);
  } catch (const RunAborted& e) {
    return report("blow_up", std::string(e.what()) + " (" +
                                 std::to_string(e.partial().size()) +
                                 " samples recorded)",
                  kBlowUp);
  } catch (const BlowUpError& e) {
    return report("blow_up", e.what(), kBlowUp);
  } catch (const AssumptionViolation& e) {
    return report("assumption_violation", e.what(), kAssumptionViolation);
  } catch (const std::exception& e) {
    return report("failure", e.what(), kFailure);
  }
}

GameModel load_game(const fs::path& path, const std::vector<std::string>& overrides) {
  return parse_game_config(path, overrides);
}

int cmd_run(const fs::path& config, const CommonOptions& opts, std::ostream& out) {
  const ExperimentConfig cfg = load(config, opts);
  const NashSolution ne = solve_ne(cfg.game);
  const SimResult r = run(cfg);
  const fs::path dir = prepare_dir(cfg.output_dir);
  emit_run(r, ne, dir, cfg.name, opts.window);
  const ConvergenceMetrics m = convergence_metrics(r, ne, opts.window);
  out << metrics_json(r, ne, m, opts.window).dump(2) << '\n';
  return kOk;
}

int cmd_compare(const fs::path& inesc_config, const fs::path& baseline_config,
                const CommonOptions& opts, std::ostream& out) {
  const ExperimentConfig a = load(inesc_config, opts);
  const ExperimentConfig b = load(baseline_config, opts);
  if (a.controller != ControllerKind::Inesc ||
      b.controller != ControllerKind::Baseline) {
    throw ConfigError("compare expects an inesc config and a baseline config");
  }
  if (to_json(a)["game"] != to_json(b)["game"]) {
    throw ConfigError("compare needs both configs to describe the same game");
  }
  const NashSolution ne = solve_ne(a.game);
  auto fa = std::async(std::launch::async, [&] { return run(a); });
  auto fb = std::async(std::launch::async, [&] { return run(b); });
  const SimResult ra = fa.get();
  const SimResult rb = fb.get();

  const fs::path dir = prepare_dir(opts.out_dir ? *opts.out_dir : a.output_dir);
  emit_run(ra, ne, dir, a.name, opts.window);
  emit_run(rb, ne, dir, b.name, opts.window);
  write_file(dir / "compare.csv",
             [&](std::ostream& f) { write_compare_csv(f, ra, rb, ne); });
  out << json{{"inesc", metrics_json(ra, ne, convergence_metrics(ra, ne, opts.window),
                                     opts.window)},
              {"baseline", metrics_json(rb, ne,
                                        convergence_metrics(rb, ne, opts.window),
                                        opts.window)},
              {"compare_csv", (dir / "compare.csv").string()}}
             .dump(2)
      << '\n';
  return kOk;
}

int cmd_sweep(const fs::path& config, const std::string& parameter,
              const std::vector<std::string>& values, const CommonOptions& opts,
              std::ostream& out) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<ExperimentConfig> cfgs;
  for (const auto& v : values) cfgs.push_back(load(config, opts, {parameter + "=" + v}));
  const NashSolution ne = solve_ne(cfgs.front().game);

  std::vector<std::future<SimResult>> jobs;
  for (const auto& c : cfgs) {
    jobs.push_back(std::async(std::launch::async, [&c] { return run(c); }));
  }
  std::vector<SweepRow> rows;
  const fs::path dir = prepare_dir(opts.out_dir ? *opts.out_dir : cfgs.front().output_dir);
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const SimResult r = jobs[k].get();
    const ConvergenceMetrics m = convergence_metrics(r, ne, opts.window);
    write_file(dir / ("sweep_" + std::to_string(k) + "_metrics.json"),
               [&](std::ostream& f) {
                 f << metrics_json(r, ne, m, opts.window).dump(2) << '\n';
               });
    rows.push_back({values[k], m, r.config->hash});
  }
  write_file(dir / "sweep.csv",
             [&](std::ostream& f) { write_sweep_csv(f, parameter, rows); });
  write_sweep_csv(out, parameter, rows);
  return kOk;
}

int cmd_ne_solve(const fs::path& config, const CommonOptions& opts, std::ostream& out) {
  const GameModel game = load_game(config, opts.overrides);
  out << to_json(solve_ne(game)).dump(2) << '\n';
  return kOk;
}

int cmd_check_monotone(const fs::path& config, const CommonOptions& opts,
                       std::ostream& out) {
  const GameModel game = load_game(config, opts.overrides);
  const auto cert = check_monotonicity(game);
  out << to_json(cert).dump(2) << '\n';
  return cert.is_strongly_monotone ? kOk : kAssumptionViolation;
}

int cmd_recommend_tau(const fs::path& config, double beta,
                      const CommonOptions& opts, std::ostream& out) {
  const GameModel game = load_game(config, opts.overrides);
  out << to_json(tau_advice(game, beta)).dump(2) << '\n';
  return kOk;
}

}  // namespace inesc::cli
