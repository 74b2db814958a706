#pragma once

// Subcommand implementations behind the `inesc` executable. Each returns the
// process exit status; failures are reported as one JSON object on `err`.

#include "inesc/game.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace inesc::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kBlowUp = 3,
  kAssumptionViolation = 4,
};

struct CommonOptions {
  std::vector<std::string> overrides;  // dot-path assignments
  std::optional<double> step;
  std::optional<double> horizon;
  std::optional<std::string> out_dir;
  std::optional<long long> seed;  // reserved; the dynamics are deterministic
  double window = 20.0;           // trailing window for metrics, s
};

// Runs `body`, translating exceptions into an error record and exit code.
int guarded(const std::function<int()>& body, std::ostream& err);

// Reads only the "game" section of a config file.
GameModel load_game(const std::filesystem::path& path,
                    const std::vector<std::string>& overrides = {});

int cmd_run(const std::filesystem::path& config, const CommonOptions& opts,
            std::ostream& out);
int cmd_compare(const std::filesystem::path& inesc_config,
                const std::filesystem::path& baseline_config,
                const CommonOptions& opts, std::ostream& out);
int cmd_sweep(const std::filesystem::path& config, const std::string& parameter,
              const std::vector<std::string>& values, const CommonOptions& opts,
              std::ostream& out);
int cmd_ne_solve(const std::filesystem::path& config, const CommonOptions& opts,
                 std::ostream& out);
int cmd_check_monotone(const std::filesystem::path& config,
                       const CommonOptions& opts, std::ostream& out);
int cmd_recommend_tau(const std::filesystem::path& config, double beta,
                      const CommonOptions& opts, std::ostream& out);

}  // namespace inesc::cli
