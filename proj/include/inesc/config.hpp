#pragma once

// Experiment configuration files (JSON).
//
// {
//   "name": "fig1_inesc",
//   "game": { "agents": [ { "n": 1, "m": 1, "B": [1],
//                           "cost": { "Q": [..n*n row-major..], "q": [..n..], "r": 0 } } ] },
//   "controller": { "type": "fullinfo" | "inesc" | "baseline",
//                   "agents": [ { ...per-agent parameters... } ] },
//   "sim": { "step": 1e-3, "horizon": 100, "stride": 10,
//            "allow_large_step": false, "initial": { "x": [..], "u": [..] } },
//   "output": { "dir": "out" }
// }
//
// Per-agent controller keys:
//   fullinfo: tau
//   inesc:    tau, K, k_T, sigma, alpha1, theta_box {lower, upper},
//             dither {amplitude, frequency, phase}
//   baseline: omega_h, omega_l, omega, k, A
// theta_box bounds and dither fields accept a scalar (broadcast) or one value
// per component. theta_box index 0 is theta0, indices 1..m_i are theta1.

#include "inesc/sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace inesc {

// Parses, applies dot-path overrides ("a.b.0.c=value", "*" matches every
// array element), fills defaults, validates. Syntax errors report line and
// column; unknown keys and bad values raise ConfigError naming the field.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config(const std::filesystem::path& path,
                              const std::vector<std::string>& overrides = {});

// Reads only the "game" section (other top-level sections are ignored after
// key validation). Used by the analysis subcommands.
GameModel parse_game_config(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides = {});

// Canonical form with every default filled in; parse_config_text of its dump
// reproduces the same configuration and hash.
nlohmann::json to_json(const ExperimentConfig& config);

// FNV-1a 64-bit digest of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

// Applies one "path=value" override to a raw JSON document.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace inesc
