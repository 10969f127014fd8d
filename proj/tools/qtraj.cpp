// qtraj: command-line front end.
//
//   qtraj [global flags] <validate|rates|homog|compare|sim|jump|metrics|fig1> [flags]
//
// Every invocation is turned into an ExperimentConfig: defaults, then the
// --config file (if any), then explicitly given flags. The resolved config
// is stored in <out>/metadata.json and can be replayed with --config.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "qtraj/experiment.hpp"
#include "qtraj/log.hpp"

namespace {

using qtraj::ExperimentConfig;
using Override = std::pair<CLI::Option*, std::function<void(ExperimentConfig&, const ExperimentConfig&)>>;

template <class T>
CLI::Option* bind_field(CLI::App* app, std::vector<Override>& ov, ExperimentConfig& flags, const std::string& name,
          T ExperimentConfig::*field, const std::string& help) {
    CLI::Option* opt = app->add_option(name, flags.*field, help);
    ov.emplace_back(opt, [field](ExperimentConfig& dst, const ExperimentConfig& src) { dst.*field = src.*field; });
    return opt;
}

CLI::Option* bind_switch(CLI::App* app, std::vector<Override>& ov, ExperimentConfig& flags, const std::string& name,
               bool ExperimentConfig::*field, const std::string& help) {
    CLI::Option* opt = app->add_flag(name, flags.*field, help);
    ov.emplace_back(opt, [field](ExperimentConfig& dst, const ExperimentConfig& src) { dst.*field = src.*field; });
    return opt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diffusive quantum trajectories with three time scales: simulation and strong-noise limits"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_version_flag("--version", std::string(QTRAJ_VERSION));
    app.require_subcommand(0, 1);
    app.fallthrough();  // global flags may follow the subcommand

    ExperimentConfig flags;
    if (const char* env = std::getenv("QTRAJ_OUT")) flags.out_dir = env;
    std::vector<Override> ov;
    std::string config_path;
    std::string log_level = "info";
    bool print_config = false;

    app.add_option("--config", config_path, "JSON experiment config (flags override its fields)")
        ->check(CLI::ExistingFile);
    bind_field(&app, ov, flags, "--out", &ExperimentConfig::out_dir, "Output directory (default $QTRAJ_OUT or ./out)");
    bind_field(&app, ov, flags, "--seed", &ExperimentConfig::seed, "Base seed");
    bind_field(&app, ov, flags, "--threads", &ExperimentConfig::threads, "Worker threads (0: OpenMP default)");
    app.add_option("--log-level", log_level, "debug, info, warn, error or off")
        ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));
    app.add_flag("--print-config", print_config, "Print the resolved config as JSON and exit");

    const auto model_flags = [&](CLI::App* sub) {
        bind_field(sub, ov, flags, "--model", &ExperimentConfig::model_path, "ThreeScaleModel JSON file");
        bind_field(sub, ov, flags, "--preset", &ExperimentConfig::preset, "Built-in model: fig1 or rabi");
        bind_field(sub, ov, flags, "--gamma", &ExperimentConfig::gamma, "Override the model's gamma");
        bind_field(sub, ov, flags, "--tol", &ExperimentConfig::tol, "Assumption tolerance on entry magnitudes");
    };

    CLI::App* validate = app.add_subcommand("validate", "Check the QND, identifiability and decoherence assumptions");
    model_flags(validate);

    CLI::App* rates = app.add_subcommand("rates", "Jump-rate matrix, dephasing eigenvalues and decoherence rates");
    model_flags(rates);

    CLI::App* homog = app.add_subcommand("homog", "Projector, pseudo-inverse and homogenized generator");
    model_flags(homog);
    bind_switch(homog, ov, flags, "--full", &ExperimentConfig::full_matrices, "Include the full matrices");

    CLI::App* compare = app.add_subcommand("compare", "Semigroup error |e^{tL_gamma} - P e^{tL_inf} P| over gammas");
    model_flags(compare);
    bind_field(compare, ov, flags, "--gammas", &ExperimentConfig::gammas, "Gamma grid")->delimiter(',');
    bind_field(compare, ov, flags, "--t", &ExperimentConfig::t, "Time");
    bind_switch(compare, ov, flags, "--svg", &ExperimentConfig::svg, "Also write an SVG plot");

    CLI::App* sim = app.add_subcommand("sim", "Monte-Carlo ensemble of quantum trajectories");
    model_flags(sim);
    bind_field(sim, ov, flags, "--t-end", &ExperimentConfig::t_end, "Horizon");
    bind_field(sim, ov, flags, "--h", &ExperimentConfig::h, "Step size (shortened to 1e-2/gamma^2 if larger)");
    bind_field(sim, ov, flags, "--n", &ExperimentConfig::n, "Number of trajectories");
    bind_field(sim, ov, flags, "--stride", &ExperimentConfig::stride, "Save every stride-th step");
    bind_field(sim, ov, flags, "--rho0", &ExperimentConfig::rho0,
         "Initial state: pointer:i, mixed, coherent, diag:p1,..., pure:p1,... or a JSON file");
    bind_switch(sim, ov, flags, "--full-states", &ExperimentConfig::full_states, "Also write full-state CSVs");
    bind_switch(sim, ov, flags, "--svg", &ExperimentConfig::svg, "Also write SVG plots");

    CLI::App* jump = app.add_subcommand("jump", "Limiting Markov jump chain: paths and marginals");
    model_flags(jump);
    bind_field(jump, ov, flags, "--rates", &ExperimentConfig::rates, "Rate matrix JSON file or from-model");
    bind_field(jump, ov, flags, "--mu", &ExperimentConfig::mu, "Initial law p1,...,pd (default: diagonal of --rho0)");
    bind_field(jump, ov, flags, "--rho0", &ExperimentConfig::rho0, "Initial state used when --mu is absent");
    bind_field(jump, ov, flags, "--t-end", &ExperimentConfig::t_end, "Horizon");
    bind_field(jump, ov, flags, "--n", &ExperimentConfig::n, "Number of paths");
    bind_field(jump, ov, flags, "--n-times", &ExperimentConfig::n_times, "Points of the marginal time grid");
    bind_switch(jump, ov, flags, "--svg", &ExperimentConfig::svg, "Also write SVG plots");

    CLI::App* metrics = app.add_subcommand("metrics", "Diagnostics from trajectory CSVs written by sim");
    model_flags(metrics);
    bind_field(metrics, ov, flags, "--input", &ExperimentConfig::inputs, "Trajectory CSV files or directories")
        ->required(false);
    bind_field(metrics, ov, flags, "--states", &ExperimentConfig::states_input,
         "Directory of full-state CSVs (enables the conditional-variation estimate; needs a model)");
    bind_field(metrics, ov, flags, "--reference", &ExperimentConfig::reference, "Jump-path CSV to compare against");
    bind_field(metrics, ov, flags, "--epsilon", &ExperimentConfig::epsilon, "Pointer-ball radius for T_eps");
    bind_field(metrics, ov, flags, "--tau", &ExperimentConfig::tau, "Horizon of the conditional variation");
    bind_field(metrics, ov, flags, "--window", &ExperimentConfig::window, "Smoothing window (samples)");
    bind_switch(metrics, ov, flags, "--svg", &ExperimentConfig::svg, "Also write SVG plots");

    CLI::App* fig1 = app.add_subcommand("fig1", "Three-level example: raw and smoothed diagonal paths");
    bind_field(fig1, ov, flags, "--gamma", &ExperimentConfig::gamma, "Noise strength (default 1e4)");
    bind_field(fig1, ov, flags, "--steps", &ExperimentConfig::steps, "Number of steps");
    bind_field(fig1, ov, flags, "--smooth", &ExperimentConfig::window, "Moving-average window in steps");
    bind_field(fig1, ov, flags, "--h", &ExperimentConfig::h, "Step size (shortened to 1e-2/gamma^2 if larger)");
    bind_field(fig1, ov, flags, "--stride", &ExperimentConfig::stride, "Write every stride-th step");
    bind_field(fig1, ov, flags, "--rho0", &ExperimentConfig::rho0, "Initial state (its diagonal for the reduced SDE)");
    bind_switch(fig1, ov, flags, "--full", &ExperimentConfig::full_model, "Use the full density-matrix simulator");
    bind_switch(fig1, ov, flags, "--svg", &ExperimentConfig::svg, "Also write SVG plots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        // Help and version requests are successes; everything else is a usage error.
        return rc == 0 ? 0 : static_cast<int>(qtraj::ExitCode::kValidation);
    }
    qtraj::log::set_level(log_level);

    ExperimentConfig cfg;
    if (const char* env = std::getenv("QTRAJ_OUT")) cfg.out_dir = env;
    try {
        if (!config_path.empty()) cfg = qtraj::config_from_json(qtraj::read_json_file(config_path));
    } catch (const qtraj::Error& e) {
        qtraj::log::error(e.kind(), ": ", e.what());
        return static_cast<int>(e.code());
    }
    for (const auto& [opt, apply] : ov) {
        if (opt->count() > 0) apply(cfg, flags);
    }
    if (!app.get_subcommands().empty()) cfg.kind = app.get_subcommands().front()->get_name();
    if (cfg.kind.empty()) {
        std::cerr << app.help();
        return static_cast<int>(qtraj::ExitCode::kValidation);
    }
    if (print_config) {
        std::cout << qtraj::to_json(cfg).dump(2) << "\n";
        return 0;
    }
    return static_cast<int>(qtraj::run(cfg));
}
