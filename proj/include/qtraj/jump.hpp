#pragma once

// The limiting pure-jump Markov chain on the pointer basis.

#include <cstdint>
#include <vector>

#include "qtraj/qnd.hpp"

namespace qtraj {

/// Piecewise-constant path: state states[0] on [0, jump_times[0]), then
/// states[k] on [jump_times[k-1], jump_times[k]), the last one up to t_end.
struct JumpPath {
    std::vector<double> jump_times;  // size = states.size() - 1
    std::vector<Index> states;       // 0-based pointer indices
    double t_end = 0.0;

    Index state_at(double t) const;
    std::size_t jump_count() const { return jump_times.size(); }
};

/// mu_i = Re rho_ii, clipped at -1e-12 ... 0 and renormalized.
RealVector initial_distribution(const Matrix& rho0);
inline RealVector initial_distribution(const DensityMatrix& rho0) { return initial_distribution(rho0.matrix()); }

/// Throws ValidationError unless mu is a probability vector of length d.
void validate_distribution(const RealVector& mu, Index dim);

/// Gillespie sampling. The initial state and the holding times all come from
/// the stream (seed, 0, jump purpose).
JumpPath simulate_jump(const MarkovGenerator& t, const RealVector& mu, double t_end, std::uint64_t seed);

/// Row vector mu^T e^{t T}.
RealVector marginal(const MarkovGenerator& t, const RealVector& mu, double time);

/// Fraction of paths in each state at the given times; paths n use seeds
/// base_seed + n. OpenMP over paths, ordered reduction.
struct JumpEnsemble {
    std::vector<double> times;
    std::vector<RealVector> occupation;  // per time
    std::vector<RealVector> stderr_;     // per time, binomial standard error
    double mean_jumps = 0.0;
    double mean_jumps_stderr = 0.0;
};
JumpEnsemble simulate_jump_ensemble(const MarkovGenerator& t, const RealVector& mu, double t_end, Index n_paths,
                                    std::uint64_t base_seed, const std::vector<double>& times, int threads = 0);
JumpEnsemble simulate_jump_ensemble_serial(const MarkovGenerator& t, const RealVector& mu, double t_end,
                                           Index n_paths, std::uint64_t base_seed,
                                           const std::vector<double>& times);

/// Total-variation distance 1/2 sum |p - q|.
double total_variation(const RealVector& p, const RealVector& q);

}  // namespace qtraj
