#pragma once
#include <string>

#include <nlohmann/json.hpp>

#include "classifier.hpp"
#include "evolution.hpp"
#include "ground_state.hpp"
#include "grid.hpp"
#include "nonlinearity.hpp"

namespace nlkg {

// Configuration-driven experiment runner.  Each cmd_* takes a parsed JSON
// config, writes its artifacts under the output root (environment variable
// NLKG_OUTPUT_ROOT, default "."), and returns a JSON summary.  The config
// hash is the FNV-1a of the canonical (key-sorted) serialization, so the same
// config always maps to the same artifact directory keys.

std::string config_hash(const nlohmann::json& cfg);
std::string output_root();

// Typed views assembled from the config.
NonlinearityModel model_from_config(const nlohmann::json& cfg);
GridPtr grid_from_config(const nlohmann::json& cfg);
ShootConfig shoot_from_config(const nlohmann::json& cfg);
EvolveConfig evolve_from_config(const nlohmann::json& cfg, const RadialGrid& g);

// Initial state per the "initial" spec: zero | gaussian | closed_form_w |
// ground_state | csv, with amplitude/width/taper parameters.
RadialState initial_from_config(const nlohmann::json& cfg,
                                const NonlinearityModel& model, GridPtr grid);

// Threshold m: explicit "threshold.m" override, else computed by shooting.
double threshold_from_config(const nlohmann::json& cfg,
                             const NonlinearityModel& model, GridPtr grid);

nlohmann::json cmd_groundstate(const nlohmann::json& cfg);
nlohmann::json cmd_classify(const nlohmann::json& cfg);
nlohmann::json cmd_evolve(const nlohmann::json& cfg);
nlohmann::json cmd_sweep(const nlohmann::json& cfg);
nlohmann::json cmd_audit(const nlohmann::json& cfg);

// Dispatch by subcommand name; unknown command is a config error.
nlohmann::json run_command(const std::string& command,
                           const nlohmann::json& cfg);

}  // namespace nlkg
