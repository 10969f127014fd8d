#pragma once

// Experiment configuration and dispatch shared by the command-line tool.
//
// A config is a flat JSON object with a schema_version field; every
// subcommand is a config with a different "kind". Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qtraj/errors.hpp"
#include "qtraj/io.hpp"

namespace qtraj {

inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::string kind;                 // validate|rates|homog|compare|sim|jump|metrics|fig1
    std::string model_path;           // JSON model file
    std::string preset;               // "fig1" or "rabi" when no file is given
    double gamma = 0.0;               // > 0 overrides the model's gamma

    double t_end = 1.0;
    double h = 1e-3;                  // user step (the default rule may shorten it)
    std::int64_t n = 1;               // trajectories / paths
    std::uint64_t seed = 1;           // base seed
    std::int64_t stride = 1;          // save every stride-th step
    std::vector<double> gammas;       // compare
    double t = 1.0;                   // compare
    std::string rho0 = "coherent";    // pointer:i | mixed | coherent | diag:p,.. | pure:p,.. | <file>
    std::string rates = "from-model"; // jump: from-model or a JSON file
    std::string mu;                   // jump: comma list; empty means from rho0
    std::int64_t n_times = 21;        // jump: marginal grid size

    std::vector<std::string> inputs;  // metrics: trajectory CSV files or directories
    std::string states_input;         // metrics: directory of full-state CSVs (for V_tau)
    std::string reference;            // metrics: jump-path CSV for MZ comparison
    double epsilon = 0.2;
    double tau = 0.0;                 // 0: whole horizon
    double radius = 0.2;

    std::int64_t steps = 1000000;     // fig1
    std::int64_t window = 1000;       // fig1 / metrics smoothing
    bool full_model = false;          // fig1: full simulator instead of the reduced one

    bool full_states = false;         // sim: also write full-state CSVs
    bool full_matrices = false;       // homog: include matrices in the JSON
    bool svg = false;                 // companion SVG plots
    double tol = 1e-10;               // assumption tolerance

    std::string out_dir = "out";
    int threads = 0;
};

Json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const Json& j);

/// FNV-1a 64 of the compact serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

struct RunMetadata {
    std::string timestamp;  // UTC, ISO 8601
    std::string config_hash;
    std::vector<std::uint64_t> seeds;
    std::string version;
    std::vector<std::pair<std::string, double>> phases;  // wall-clock seconds
};
Json to_json(const RunMetadata& m);

/// Resolves the model (file, preset, gamma override).
ThreeScaleModel load_model(const ExperimentConfig& c);

/// Parses the rho0 mini-language for dimension d.
DensityMatrix parse_rho0(const std::string& spec, Index d);

/// Runs one experiment, writes its artifacts plus metadata.json under
/// out_dir and returns the process exit code. Errors are logged, not thrown.
ExitCode run(const ExperimentConfig& c);

}  // namespace qtraj
