#pragma once

// Euler-Maruyama integration of the diffusive stochastic master equation
//
//   d rho = L_gamma(rho) dt + sum_alpha gamma^{alpha/2} sum_k sigma_k^alpha(rho) dW^alpha_k,
//   sigma_k(rho) = sqrt(eta_k) (L_k rho + rho L_k^* - tr[(L_k + L_k^*) rho] rho),
//
// with a projection back onto the state space after every step.
//
// Brownian channels are numbered globally: level 0 first, then level 1, then
// level 2, in Kraus order. Channel c of a trajectory with seed s reads the
// counter-based stream (s, c). Channels with zero efficiency keep their
// number but are never evaluated.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "qtraj/qnd.hpp"
#include "qtraj/superop.hpp"

namespace qtraj {

struct NoiseIncrement {
    std::array<std::vector<double>, 3> dw;  // dW^0, dW^1, dW^2; lengths = Kraus counts

    static NoiseIncrement zero(const ThreeScaleModel& model);
};

/// Number of time steps and the (possibly shortened) step that lands exactly on t_end.
struct StepPlan {
    Index n_steps = 0;
    double h = 0.0;
};

/// min(h_user, 1e-2 / gamma^2).
double default_step(double h_user, double gamma);

/// n = ceil(t_end / h) (up to rounding), h' = t_end / n <= h.
StepPlan plan_steps(double t_end, double h);

std::vector<Matrix> volatility(const GkslSpec& spec, const Matrix& rho);
inline std::vector<Matrix> volatility(const GkslSpec& spec, const DensityMatrix& rho) {
    return volatility(spec, rho.matrix());
}

/// (L0 + gamma L1 + gamma^2 L2)(rho).
Matrix drift(const ThreeScaleModel& model, const Matrix& rho);
inline Matrix drift(const ThreeScaleModel& model, const DensityMatrix& rho) { return drift(model, rho.matrix()); }

/// Hermitize, clip the spectrum at zero when its minimum is below -1e-9,
/// renormalize the trace. Returns true when clipping was needed. Throws
/// NumericalError ("blow_up") on non-finite input or non-positive trace.
bool project_state(Matrix& rho);

/// Hot-path integrator: precomputes L_gamma and the scaled measurement
/// operators, and owns all scratch storage. Not thread-safe; create one per
/// thread.
class EulerMaruyama {
 public:
    explicit EulerMaruyama(const ThreeScaleModel& model);

    Index dim() const { return dim_; }
    std::size_t channel_count() const { return channel_count_; }
    /// Global indices of the channels with positive efficiency.
    const std::vector<std::uint32_t>& active_channels() const { return active_; }

    /// Unprojected increment h L_gamma(rho) + sum_c sigma_c(rho) dW_c, with dW
    /// given for the active channels in order. rho must be Hermitian.
    const Matrix& increment(const Matrix& rho, double h, const double* dw_active);

    /// rho <- project(rho + increment). Returns true when clipping occurred.
    bool advance(Matrix& rho, double h, const double* dw_active);

    std::size_t clip_count() const { return clips_; }

 private:
    Index dim_;
    std::size_t channel_count_;
    Matrix generator_;                 // d^2 x d^2, L_gamma
    std::vector<Matrix> scaled_ops_;   // gamma^{alpha/2} sqrt(eta) L, active channels only
    std::vector<std::uint32_t> active_;
    Matrix incr_;
    Matrix tmp_;
    Vector drift_;
    std::size_t clips_ = 0;
};

/// One Euler-Maruyama step with explicit increments, followed by projection.
DensityMatrix step(const ThreeScaleModel& model, const DensityMatrix& rho, double h, const NoiseIncrement& dw);

struct Trajectory {
    std::vector<double> times;
    std::vector<Matrix> states;
    std::uint64_t seed = 0;
    double h = 0.0;
};

/// Called with (step index, time, state) for step 0 (initial state) through n.
using StepObserver = std::function<void(Index, double, const Matrix&)>;

/// Runs plan.n_steps steps of size plan.h from rho0 with the Brownian streams
/// keyed by seed. Blow-ups are rethrown with the failing step index.
/// Returns the number of projection clips.
std::size_t integrate(const ThreeScaleModel& model, const DensityMatrix& rho0, const StepPlan& plan,
                      std::uint64_t seed, const StepObserver& observer);

/// Uses plan_steps(t_end, default_step(h, gamma)) and records every
/// save_stride-th state, starting with rho0.
Trajectory simulate_trajectory(const ThreeScaleModel& model, const DensityMatrix& rho0, double t_end, double h,
                               std::uint64_t seed, Index save_stride);

struct ReducedPath {
    std::vector<double> times;
    std::vector<RealVector> values;  // populations (X_1, X_2, X_3)
};

/// Autonomous diagonal dynamics of the three-level weak-coupling example:
/// dX = R X dt + 2 gamma [L X - <L X, 1> X] dW with L = diag(1,2,3),
/// R_{ij} = 1 - 3 delta_{ij}, one scalar Brownian motion (stream (seed, 0)).
/// Negative entries are clipped when below -1e-9 and the vector is
/// renormalized to the simplex.
ReducedPath simulate_fig1_reduced(double gamma, Index n_steps, double h, std::uint64_t seed,
                                  const RealVector& x0, Index save_stride = 1);

/// One step of the reduced equation with increment dw (exposed for tests).
void fig1_reduced_step(RealVector& x, double gamma, double h, double dw);

}  // namespace qtraj
