#include "qtraj/ensemble.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include <omp.h>

#include "qtraj/errors.hpp"

namespace qtraj {
namespace {

double offdiag_hs(const Matrix& rho) {
    double s = 0.0;
    for (Index j = 0; j < rho.cols(); ++j) {
        for (Index i = 0; i < rho.rows(); ++i) {
            if (i != j) s += std::norm(rho(i, j));
        }
    }
    return std::sqrt(s);
}

void check_options(const EnsembleOptions& opts) {
    if (opts.n_trajectories < 1) throw ValidationError("ensemble_size", "ensemble needs at least one trajectory");
    if (opts.save_stride < 1) throw ValidationError("stride", "save_stride must be >= 1");
    if (opts.threads < 0) throw ValidationError("threads", "thread count must be non-negative");
}

// Ordered reduction over trajectory records.
EnsembleResult reduce(std::vector<TrajectoryRecord> records, const StepPlan& plan, Index stride, bool keep_states,
                      const std::vector<Observable>& observables) {
    EnsembleResult out;
    out.h = plan.h;
    out.n_steps = plan.n_steps;
    for (const auto& o : observables) out.names.push_back(o.name);
    const std::size_t n_saved = records.front().states.size();
    for (std::size_t s = 0; s < n_saved; ++s) out.times.push_back(static_cast<double>(s) * stride * plan.h);

    const auto n = static_cast<double>(records.size());
    const Index d = records.front().states.front().rows();
    out.mean.assign(n_saved, Matrix::Zero(d, d));
    out.stderr_re.assign(n_saved, Matrix::Zero(d, d));
    out.stderr_im.assign(n_saved, Matrix::Zero(d, d));
    for (std::size_t s = 0; s < n_saved; ++s) {
        for (const auto& r : records) out.mean[s] += r.states[s];
        out.mean[s] /= n;
        if (records.size() < 2) continue;
        RealMatrix ss_re = RealMatrix::Zero(d, d);
        RealMatrix ss_im = RealMatrix::Zero(d, d);
        for (const auto& r : records) {
            const Matrix dev = r.states[s] - out.mean[s];
            ss_re += dev.real().cwiseAbs2();
            ss_im += dev.imag().cwiseAbs2();
        }
        const double denom = (n - 1.0) * n;
        out.stderr_re[s] = (ss_re / denom).cwiseSqrt().cast<Complex>();
        out.stderr_im[s] = (ss_im / denom).cwiseSqrt().cast<Complex>();
    }

    out.obs_mean.assign(observables.size(), std::vector<double>(n_saved, 0.0));
    out.obs_stderr.assign(observables.size(), std::vector<double>(n_saved, 0.0));
    std::vector<double> column(records.size());
    for (std::size_t k = 0; k < observables.size(); ++k) {
        for (std::size_t s = 0; s < n_saved; ++s) {
            for (std::size_t r = 0; r < records.size(); ++r) column[r] = records[r].values[k][s];
            const SampleStats st = sample_stats(column);
            out.obs_mean[k][s] = st.mean;
            out.obs_stderr[k][s] = st.stderr_;
        }
    }
    if (!keep_states) {
        for (auto& r : records) {
            r.states.clear();
            r.states.shrink_to_fit();
        }
    }
    out.trajectories = std::move(records);
    return out;
}

}  // namespace

Observable population(Index i) {
    return {"population_" + std::to_string(i), [i](const Matrix& rho) { return rho(i, i).real(); }};
}

Observable offdiag_observable() { return {"offdiag_norm", offdiag_hs}; }

Observable weighted_diagonal() {
    return {"weighted_diag", [](const Matrix& rho) {
                double s = 0.0;
                for (Index i = 0; i < rho.rows(); ++i) s += static_cast<double>(i + 1) * rho(i, i).real();
                return s;
            }};
}

Observable pointer_distance() {
    return {"pointer_distance", [](const Matrix& rho) {
                // |rho - E_ii|^2 = |rho|^2 - 2 rho_ii + 1
                const double base = rho.squaredNorm() + 1.0;
                double best = std::numeric_limits<double>::infinity();
                for (Index i = 0; i < rho.rows(); ++i) best = std::min(best, base - 2.0 * rho(i, i).real());
                return std::sqrt(std::max(0.0, best));
            }};
}

SampleStats sample_stats(const std::vector<double>& xs) {
    SampleStats st;
    if (xs.empty()) return st;
    const auto n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    st.mean = sum / n;
    if (xs.size() < 2) return st;
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.variance = ss / (n - 1.0);
    st.stderr_ = std::sqrt(st.variance / n);
    return st;
}

TrajectoryRecord run_member(const ThreeScaleModel& model, const DensityMatrix& rho0, const StepPlan& plan,
                            std::uint64_t seed, Index save_stride, bool /*keep_states*/,
                            const std::vector<Observable>& observables) {
    TrajectoryRecord rec;
    rec.seed = seed;
    const auto n_saved = static_cast<std::size_t>(plan.n_steps / save_stride + 1);
    rec.states.reserve(n_saved);
    rec.values.assign(observables.size(), {});
    for (auto& v : rec.values) v.reserve(n_saved);
    rec.integrals.assign(observables.size(), 0.0);
    rec.clips = integrate(model, rho0, plan, seed, [&](Index n, double, const Matrix& rho) {
        // Left-point rule: state n holds on [t_n, t_{n+1}).
        if (n < plan.n_steps) {
            for (std::size_t k = 0; k < observables.size(); ++k) rec.integrals[k] += observables[k].fn(rho) * plan.h;
        }
        if (n % save_stride == 0) {
            rec.states.push_back(rho);
            for (std::size_t k = 0; k < observables.size(); ++k) rec.values[k].push_back(observables[k].fn(rho));
        }
    });
    return rec;
}

EnsembleResult simulate_ensemble_serial(const ThreeScaleModel& model, const DensityMatrix& rho0,
                                        const EnsembleOptions& opts, const std::vector<Observable>& observables) {
    check_options(opts);
    const StepPlan plan = plan_steps(opts.t_end, default_step(opts.h, model.gamma));
    std::vector<TrajectoryRecord> records;
    records.reserve(static_cast<std::size_t>(opts.n_trajectories));
    for (Index n = 0; n < opts.n_trajectories; ++n) {
        records.push_back(run_member(model, rho0, plan, opts.base_seed + static_cast<std::uint64_t>(n),
                                     opts.save_stride, opts.keep_states, observables));
    }
    return reduce(std::move(records), plan, opts.save_stride, opts.keep_states, observables);
}

EnsembleResult simulate_ensemble(const ThreeScaleModel& model, const DensityMatrix& rho0, const EnsembleOptions& opts,
                                 const std::vector<Observable>& observables) {
    check_options(opts);
    model.validate();
    const StepPlan plan = plan_steps(opts.t_end, default_step(opts.h, model.gamma));
    const Index n_traj = opts.n_trajectories;
    std::vector<TrajectoryRecord> records(static_cast<std::size_t>(n_traj));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_traj));
    const int threads = opts.threads > 0 ? opts.threads : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (Index n = 0; n < n_traj; ++n) {
        try {
            records[static_cast<std::size_t>(n)] =
                run_member(model, rho0, plan, opts.base_seed + static_cast<std::uint64_t>(n), opts.save_stride,
                           opts.keep_states, observables);
        } catch (...) {
            errors[static_cast<std::size_t>(n)] = std::current_exception();
        }
    }
    // Report the failure of the lowest trajectory index, independent of scheduling.
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return reduce(std::move(records), plan, opts.save_stride, opts.keep_states, observables);
}

}  // namespace qtraj
