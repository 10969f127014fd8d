#pragma once

// Monte-Carlo ensembles of diffusive trajectories.
//
// Trajectory n uses seed base_seed + n. Each trajectory is an independent
// work unit; results are stored by trajectory index and reduced in index
// order, so the statistics do not depend on the number of threads.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qtraj/sde.hpp"

namespace qtraj {

/// Named real-valued function of the state.
struct Observable {
    std::string name;
    std::function<double(const Matrix&)> fn;
};

/// Standard observables: population_i (0-based), offdiag_norm, weighted_diag
/// (sum_i (i+1) rho_ii) and the distance to the nearest pointer state.
Observable population(Index i);
Observable offdiag_observable();
Observable weighted_diagonal();
Observable pointer_distance();

struct EnsembleOptions {
    Index n_trajectories = 1;
    double t_end = 1.0;
    double h = 1e-3;              // before the default step rule
    std::uint64_t base_seed = 1;
    Index save_stride = 1;
    bool keep_states = false;     // keep full per-trajectory saved states
    int threads = 0;              // 0: OpenMP default
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    std::vector<Matrix> states;                 // saved states (if kept)
    std::vector<std::vector<double>> values;    // values[obs][saved index]
    std::vector<double> integrals;              // step-resolution time integral of each observable
    std::size_t clips = 0;
};

struct EnsembleResult {
    std::vector<double> times;      // saved times
    double h = 0.0;                 // step actually used
    Index n_steps = 0;
    std::vector<std::string> names; // observable names
    std::vector<Matrix> mean;       // mean state per saved time
    std::vector<Matrix> stderr_re;  // standard error of the real parts
    std::vector<Matrix> stderr_im;  // standard error of the imaginary parts
    std::vector<std::vector<double>> obs_mean;    // [obs][time]
    std::vector<std::vector<double>> obs_stderr;  // [obs][time]
    std::vector<TrajectoryRecord> trajectories;   // index order
};

/// OpenMP-parallel ensemble.
EnsembleResult simulate_ensemble(const ThreeScaleModel& model, const DensityMatrix& rho0,
                                 const EnsembleOptions& opts, const std::vector<Observable>& observables = {});

/// Single-threaded reference implementation with the same output contract.
EnsembleResult simulate_ensemble_serial(const ThreeScaleModel& model, const DensityMatrix& rho0,
                                        const EnsembleOptions& opts,
                                        const std::vector<Observable>& observables = {});

/// One trajectory of an ensemble (exposed for the benchmarks).
TrajectoryRecord run_member(const ThreeScaleModel& model, const DensityMatrix& rho0, const StepPlan& plan,
                            std::uint64_t seed, Index save_stride, bool keep_states,
                            const std::vector<Observable>& observables);

/// Mean and standard error of a sample (standard error 0 for n < 2).
struct SampleStats {
    double mean = 0.0;
    double stderr_ = 0.0;
    double variance = 0.0;  // unbiased
};
SampleStats sample_stats(const std::vector<double>& xs);

}  // namespace qtraj
