#pragma once

// Path diagnostics. Sampled paths are read as piecewise-constant (cadlag):
// value k holds on [t_k, t_{k+1}); the last value holds for one more grid
// spacing, so every sample owns a cell. All norms are Hilbert-Schmidt.

#include <cstddef>
#include <vector>

#include "qtraj/ensemble.hpp"
#include "qtraj/qnd.hpp"

namespace qtraj {

struct PathFunction {
    std::vector<double> times;
    std::vector<Matrix> values;

    /// times.back() plus the last spacing (times.back() for a single sample).
    double end_time() const;
    /// Throws ValidationError on an empty, non-increasing or ragged path.
    void validate() const;

    static PathFunction from_scalars(const std::vector<double>& times, const std::vector<double>& values);
    static PathFunction from_vectors(const std::vector<double>& times, const std::vector<RealVector>& values);
};

struct ScalarPath {
    std::vector<double> times;
    std::vector<double> values;
};

struct MzDistance {
    double distance = 0.0;
    double truncation_bound = 0.0;  // e^{-t_max}
};

inline constexpr double kDefaultMzHorizon = 30.0;

/// int_0^{t_max} min(1, |w1(t) - w2(t)|) e^{-t} dt, integrated exactly on the
/// merged grid. Before its first sample a path takes its first value; after
/// its last sample it keeps the last value.
MzDistance mz_distance(const PathFunction& w1, const PathFunction& w2, double t_max = kDefaultMzHorizon);

/// Right-aligned moving average over `window` samples; the output grid is the
/// input grid from index window-1 on.
PathFunction smooth(const PathFunction& path, std::size_t window);
ScalarPath smooth(const ScalarPath& path, std::size_t window);

/// Streaming right-aligned moving average with a compensated running sum.
class MovingAverage {
 public:
    explicit MovingAverage(std::size_t window);
    /// Adds a sample; returns true once a full window is available.
    bool push(double x);
    double value() const;
    std::size_t window() const { return buf_.size(); }

 private:
    std::vector<double> buf_;
    std::size_t next_ = 0;
    std::size_t count_ = 0;
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// min_i |rho - E_ii|.
double distance_to_pointers(const Matrix& rho);

/// Measure of {t : min_i |rho_t - E_ii| >= epsilon} on [t_0, end_time()).
double time_outside_balls(const PathFunction& path, double epsilon);

/// |Pi_perp(rho)| = HS norm of the off-diagonal part.
double offdiag_norm(const Matrix& rho);
ScalarPath offdiag_norm(const PathFunction& path);

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// |Pi L_gamma(rho)| as an ensemble observable.
Observable pi_generator_norm(const ThreeScaleModel& model);

/// Monte-Carlo estimate of int_0^tau E|Pi L_gamma(rho_t)| dt from saved paths
/// (piecewise-constant quadrature), with the standard error across paths.
Estimate conditional_variation(const ThreeScaleModel& model, const std::vector<PathFunction>& paths, double tau);

struct EmpiricalMarginal {
    RealVector probabilities;  // fraction assigned to each pointer state
    double unassigned = 0.0;
    /// 1/2 (sum_i |p_i - q_i| + unassigned): unassigned mass counts as fully
    /// misplaced.
    double total_variation(const RealVector& reference) const;
};

EmpiricalMarginal empirical_marginal(const std::vector<Matrix>& states, double radius);
/// Uses the saved state in force at time t (needs keep_states).
EmpiricalMarginal empirical_marginal(const EnsembleResult& ensemble, double t, double radius);

/// Saved index of the state in force at time t on a sampled grid.
std::size_t index_at(const std::vector<double>& times, double t);

}  // namespace qtraj
