#include "qtraj/jump.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "qtraj/errors.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {
namespace {

constexpr double kMuClip = 1e-12;

// Index drawn from weights w (nonnegative, positive total) with uniform u.
Index categorical(const RealVector& w, double total, double u) {
    double target = u * total;
    const Index n = w.size();
    Index last = -1;
    for (Index k = 0; k < n; ++k) {
        if (w(k) <= 0.0) continue;
        last = k;
        if (target < w(k)) return k;
        target -= w(k);
    }
    return last;  // rounding: fall back on the last positive weight
}

JumpEnsemble reduce(const std::vector<JumpPath>& paths, const std::vector<double>& times, Index d) {
    JumpEnsemble out;
    out.times = times;
    const auto n = static_cast<double>(paths.size());
    for (double t : times) {
        RealVector occ = RealVector::Zero(d);
        for (const auto& p : paths) occ(p.state_at(t)) += 1.0;
        occ /= n;
        RealVector se(d);
        for (Index i = 0; i < d; ++i) se(i) = n > 1 ? std::sqrt(occ(i) * (1.0 - occ(i)) / (n - 1.0)) : 0.0;
        out.occupation.push_back(occ);
        out.stderr_.push_back(se);
    }
    double sum = 0.0;
    double sum2 = 0.0;
    for (const auto& p : paths) {
        const auto k = static_cast<double>(p.jump_count());
        sum += k;
        sum2 += k * k;
    }
    out.mean_jumps = sum / n;
    if (paths.size() > 1) {
        const double var = std::max(0.0, (sum2 - n * out.mean_jumps * out.mean_jumps) / (n - 1.0));
        out.mean_jumps_stderr = std::sqrt(var / n);
    }
    return out;
}

void check_times(const std::vector<double>& times, double t_end) {
    for (double t : times) {
        if (!(t >= 0.0) || t > t_end) throw ValidationError("time", "occupation times must lie in [0, t_end]");
    }
}

}  // namespace

Index JumpPath::state_at(double t) const {
    // First jump strictly after t decides the holding interval.
    const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
    return states[static_cast<std::size_t>(it - jump_times.begin())];
}

RealVector initial_distribution(const Matrix& rho0) {
    const Index d = rho0.rows();
    RealVector mu(d);
    bool clipped = false;
    for (Index i = 0; i < d; ++i) {
        double p = rho0(i, i).real();
        if (p < kMuClip) {
            clipped = clipped || p != 0.0;
            p = 0.0;
        }
        mu(i) = p;
    }
    const double s = mu.sum();
    if (!(s > 0.0)) throw ValidationError("distribution", "diagonal of the initial state has no positive mass");
    if (clipped || std::abs(s - 1.0) > 0.0) mu /= s;
    return mu;
}

void validate_distribution(const RealVector& mu, Index dim) {
    if (mu.size() != dim) throw ValidationError("dimension_mismatch", "distribution length differs from generator");
    for (Index i = 0; i < dim; ++i) {
        if (!(mu(i) >= 0.0)) throw ValidationError("distribution", "probabilities must be non-negative");
    }
    if (std::abs(mu.sum() - 1.0) > 1e-9) throw ValidationError("distribution", "probabilities must sum to 1");
}

JumpPath simulate_jump(const MarkovGenerator& t, const RealVector& mu, double t_end, std::uint64_t seed) {
    t.validate();
    validate_distribution(mu, t.dim());
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end", "t_end must be positive");
    const Index d = t.dim();
    RandomStream rng(seed, 0, StreamPurpose::kJump);

    JumpPath path;
    path.t_end = t_end;
    Index state = categorical(mu, mu.sum(), rng.uniform());
    path.states.push_back(state);
    double now = 0.0;
    RealVector w(d);
    for (;;) {
        const double rate = -t.rates(state, state);
        if (!(rate > 0.0)) break;  // absorbing
        now += rng.exponential(rate);
        if (now > t_end) break;
        double total = 0.0;
        for (Index j = 0; j < d; ++j) {
            w(j) = j == state ? 0.0 : t.rates(state, j);
            total += w(j);
        }
        state = categorical(w, total, rng.uniform());
        path.jump_times.push_back(now);
        path.states.push_back(state);
    }
    return path;
}

RealVector marginal(const MarkovGenerator& t, const RealVector& mu, double time) {
    t.validate();
    validate_distribution(mu, t.dim());
    if (!(time >= 0.0) || !std::isfinite(time)) throw ValidationError("time", "time must be finite and >= 0");
    if (time == 0.0) return mu;
    const RealMatrix scaled = time * t.rates;
    const RealMatrix e = expm<double>(scaled);
    RealVector p = e.transpose() * mu;
    p = p.cwiseMax(0.0);
    return p / p.sum();
}

JumpEnsemble simulate_jump_ensemble_serial(const MarkovGenerator& t, const RealVector& mu, double t_end,
                                           Index n_paths, std::uint64_t base_seed, const std::vector<double>& times) {
    if (n_paths < 1) throw ValidationError("ensemble_size", "need at least one path");
    check_times(times, t_end);
    std::vector<JumpPath> paths;
    paths.reserve(static_cast<std::size_t>(n_paths));
    for (Index n = 0; n < n_paths; ++n) paths.push_back(simulate_jump(t, mu, t_end, base_seed + n));
    return reduce(paths, times, t.dim());
}

JumpEnsemble simulate_jump_ensemble(const MarkovGenerator& t, const RealVector& mu, double t_end, Index n_paths,
                                    std::uint64_t base_seed, const std::vector<double>& times, int threads) {
    if (n_paths < 1) throw ValidationError("ensemble_size", "need at least one path");
    check_times(times, t_end);
    t.validate();
    validate_distribution(mu, t.dim());
    std::vector<JumpPath> paths(static_cast<std::size_t>(n_paths));
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (Index n = 0; n < n_paths; ++n) {
        paths[static_cast<std::size_t>(n)] = simulate_jump(t, mu, t_end, base_seed + n);
    }
    return reduce(paths, times, t.dim());
}

double total_variation(const RealVector& p, const RealVector& q) {
    if (p.size() != q.size()) throw ValidationError("dimension_mismatch", "distributions differ in length");
    return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace qtraj
