#include "qtraj/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "qtraj/errors.hpp"

namespace qtraj {
namespace {

// Value of a piecewise-constant path at t: index of the last sample <= t,
// clamped to the first sample for t before the grid.
std::size_t sample_index(const std::vector<double>& times, double t) {
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0;
    return static_cast<std::size_t>(it - times.begin()) - 1;
}

// int_a^b e^{-t} dt
double exp_weight(double a, double b) { return std::exp(-a) - std::exp(-b); }

}  // namespace

double PathFunction::end_time() const {
    if (times.size() < 2) return times.empty() ? 0.0 : times.back();
    return times.back() + (times.back() - times[times.size() - 2]);
}

void PathFunction::validate() const {
    if (times.empty()) throw ValidationError("empty_path", "path has no samples");
    if (times.size() != values.size()) throw ValidationError("dimension_mismatch", "times and values differ in length");
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1])) throw ValidationError("grid", "time grid must be strictly increasing");
        if (values[k].rows() != values[0].rows() || values[k].cols() != values[0].cols()) {
            throw ValidationError("dimension_mismatch", "path values change shape");
        }
    }
}

PathFunction PathFunction::from_scalars(const std::vector<double>& times, const std::vector<double>& values) {
    PathFunction p;
    p.times = times;
    for (double v : values) p.values.push_back(Matrix::Constant(1, 1, Complex(v, 0.0)));
    return p;
}

PathFunction PathFunction::from_vectors(const std::vector<double>& times, const std::vector<RealVector>& values) {
    PathFunction p;
    p.times = times;
    for (const auto& v : values) p.values.push_back(v.cast<Complex>());
    return p;
}

MzDistance mz_distance(const PathFunction& w1, const PathFunction& w2, double t_max) {
    w1.validate();
    w2.validate();
    if (w1.values[0].rows() != w2.values[0].rows() || w1.values[0].cols() != w2.values[0].cols()) {
        throw ValidationError("dimension_mismatch", "paths take values in different spaces");
    }
    if (!(t_max > 0.0)) throw ValidationError("t_max", "t_max must be positive");

    std::vector<double> grid{0.0, t_max};
    for (const auto* w : {&w1, &w2}) {
        for (double t : w->times) {
            if (t > 0.0 && t < t_max) grid.push_back(t);
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    MzDistance out;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double a = grid[k];
        const double b = grid[k + 1];
        const Matrix& x = w1.values[sample_index(w1.times, a)];
        const Matrix& y = w2.values[sample_index(w2.times, a)];
        out.distance += std::min(1.0, (x - y).norm()) * exp_weight(a, b);
    }
    out.truncation_bound = std::exp(-t_max);
    return out;
}

// ---------------------------------------------------------------------------

MovingAverage::MovingAverage(std::size_t window) : buf_(window, 0.0) {
    if (window < 1) throw ValidationError("window", "window must be >= 1");
}

bool MovingAverage::push(double x) {
    const double old = count_ >= buf_.size() ? buf_[next_] : 0.0;
    buf_[next_] = x;
    next_ = (next_ + 1) % buf_.size();
    ++count_;
    // Neumaier summation of +x and -old.
    for (double term : {x, -old}) {
        const double t = sum_ + term;
        if (std::abs(sum_) >= std::abs(term)) {
            comp_ += (sum_ - t) + term;
        } else {
            comp_ += (term - t) + sum_;
        }
        sum_ = t;
    }
    if (next_ == 0) {
        // Once per window: restart from an exact re-sum to stop drift.
        double s = 0.0;
        double c = 0.0;
        for (double v : buf_) {
            const double t = s + v;
            c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
            s = t;
        }
        sum_ = s;
        comp_ = c;
    }
    return count_ >= buf_.size();
}

double MovingAverage::value() const {
    const std::size_t n = std::min(count_, buf_.size());
    return n == 0 ? 0.0 : (sum_ + comp_) / static_cast<double>(n);
}

PathFunction smooth(const PathFunction& path, std::size_t window) {
    path.validate();
    if (window < 1) throw ValidationError("window", "window must be >= 1");
    if (window > path.times.size()) throw ValidationError("window", "window exceeds the number of samples");
    const Index rows = path.values[0].rows();
    const Index cols = path.values[0].cols();
    std::vector<MovingAverage> re;
    std::vector<MovingAverage> im;
    for (Index k = 0; k < rows * cols; ++k) {
        re.emplace_back(window);
        im.emplace_back(window);
    }
    PathFunction out;
    for (std::size_t s = 0; s < path.times.size(); ++s) {
        bool full = false;
        for (Index k = 0; k < rows * cols; ++k) {
            const Complex z = path.values[s](k % rows, k / rows);
            full = re[static_cast<std::size_t>(k)].push(z.real());
            im[static_cast<std::size_t>(k)].push(z.imag());
        }
        if (!full) continue;
        Matrix m(rows, cols);
        for (Index k = 0; k < rows * cols; ++k) {
            m(k % rows, k / rows) =
                Complex(re[static_cast<std::size_t>(k)].value(), im[static_cast<std::size_t>(k)].value());
        }
        out.times.push_back(path.times[s]);
        out.values.push_back(std::move(m));
    }
    return out;
}

ScalarPath smooth(const ScalarPath& path, std::size_t window) {
    if (window < 1) throw ValidationError("window", "window must be >= 1");
    if (path.times.size() != path.values.size()) {
        throw ValidationError("dimension_mismatch", "times and values differ in length");
    }
    if (window > path.values.size()) throw ValidationError("window", "window exceeds the number of samples");
    MovingAverage avg(window);
    ScalarPath out;
    for (std::size_t s = 0; s < path.values.size(); ++s) {
        if (avg.push(path.values[s])) {
            out.times.push_back(path.times[s]);
            out.values.push_back(avg.value());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

double distance_to_pointers(const Matrix& rho) {
    // |rho - E_ii|^2 = |rho|^2 - 2 Re rho_ii + 1
    const double base = rho.squaredNorm() + 1.0;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < rho.rows(); ++i) best = std::min(best, base - 2.0 * rho(i, i).real());
    return std::sqrt(std::max(0.0, best));
}

double time_outside_balls(const PathFunction& path, double epsilon) {
    if (!(epsilon > 0.0)) throw ValidationError("epsilon", "epsilon must be positive");
    path.validate();
    const double end = path.end_time();
    double total = 0.0;
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        const double next = k + 1 < path.times.size() ? path.times[k + 1] : end;
        if (distance_to_pointers(path.values[k]) >= epsilon) total += next - path.times[k];
    }
    return total;
}

double offdiag_norm(const Matrix& rho) {
    double s = 0.0;
    for (Index j = 0; j < rho.cols(); ++j) {
        for (Index i = 0; i < rho.rows(); ++i) {
            if (i != j) s += std::norm(rho(i, j));
        }
    }
    return std::sqrt(s);
}

ScalarPath offdiag_norm(const PathFunction& path) {
    ScalarPath out;
    out.times = path.times;
    for (const auto& v : path.values) out.values.push_back(offdiag_norm(v));
    return out;
}

Observable pi_generator_norm(const ThreeScaleModel& model) {
    model.validate();
    const Index d = model.dim();
    const double g = model.gamma;
    const Matrix full = lindblad_from_gksl(model.level0).matrix() + g * lindblad_from_gksl(model.level1).matrix() +
                        (g * g) * lindblad_from_gksl(model.level2).matrix();
    // Rows of L_gamma that produce the diagonal entries.
    auto rows = std::make_shared<Matrix>(d, d * d);
    for (Index i = 0; i < d; ++i) rows->row(i) = full.row(vec_index(i, i, d));
    return {"pi_generator_norm", [rows, d](const Matrix& rho) {
                const Eigen::Map<const Vector> v(rho.data(), d * d);
                return (*rows * v).norm();
            }};
}

Estimate conditional_variation(const ThreeScaleModel& model, const std::vector<PathFunction>& paths, double tau) {
    if (paths.empty()) throw ValidationError("ensemble_size", "no paths given");
    if (!(tau > 0.0)) throw ValidationError("tau", "tau must be positive");
    const Observable f = pi_generator_norm(model);
    std::vector<double> per_path;
    per_path.reserve(paths.size());
    for (const auto& p : paths) {
        p.validate();
        if (p.end_time() < tau * (1.0 - 1e-12)) throw ValidationError("horizon", "path horizon is shorter than tau");
        double integral = 0.0;
        for (std::size_t k = 0; k < p.times.size() && p.times[k] < tau; ++k) {
            const double next = std::min(tau, k + 1 < p.times.size() ? p.times[k + 1] : p.end_time());
            integral += f.fn(p.values[k]) * (next - p.times[k]);
        }
        per_path.push_back(integral);
    }
    const SampleStats st = sample_stats(per_path);
    return {st.mean, st.stderr_};
}

// ---------------------------------------------------------------------------

double EmpiricalMarginal::total_variation(const RealVector& reference) const {
    if (reference.size() != probabilities.size()) {
        throw ValidationError("dimension_mismatch", "distributions differ in length");
    }
    return 0.5 * ((probabilities - reference).cwiseAbs().sum() + unassigned);
}

EmpiricalMarginal empirical_marginal(const std::vector<Matrix>& states, double radius) {
    if (states.empty()) throw ValidationError("ensemble_size", "no states given");
    if (!(radius > 0.0)) throw ValidationError("radius", "radius must be positive");
    const Index d = states.front().rows();
    EmpiricalMarginal out;
    out.probabilities = RealVector::Zero(d);
    const double base_weight = 1.0 / static_cast<double>(states.size());
    for (const auto& rho : states) {
        const double norm2 = rho.squaredNorm() + 1.0;
        Index best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < d; ++i) {
            const double d2 = norm2 - 2.0 * rho(i, i).real();
            if (d2 < best_d2) {
                best_d2 = d2;
                best = i;
            }
        }
        if (std::sqrt(std::max(0.0, best_d2)) < radius) {
            out.probabilities(best) += base_weight;
        } else {
            out.unassigned += base_weight;
        }
    }
    return out;
}

std::size_t index_at(const std::vector<double>& times, double t) {
    if (times.empty()) throw ValidationError("empty_path", "no saved times");
    const double slack = 1e-9 * (1.0 + std::abs(t));
    if (t < times.front() - slack || t > times.back() + slack) {
        throw ValidationError("time", "requested time is outside the saved grid");
    }
    return sample_index(times, t + slack);
}

EmpiricalMarginal empirical_marginal(const EnsembleResult& ensemble, double t, double radius) {
    const std::size_t s = index_at(ensemble.times, t);
    std::vector<Matrix> states;
    states.reserve(ensemble.trajectories.size());
    for (const auto& r : ensemble.trajectories) {
        if (r.states.size() <= s) throw ValidationError("states", "ensemble was run without keep_states");
        states.push_back(r.states[s]);
    }
    return empirical_marginal(states, radius);
}

}  // namespace qtraj
