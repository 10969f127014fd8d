#include "qtraj/sde.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "qtraj/errors.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {
namespace {

constexpr double kClipThreshold = 1e-9;

// Cholesky of rho + tol I; succeeds iff every eigenvalue of rho exceeds -tol.
template <class Work>
bool shifted_cholesky_ok(const Matrix& rho, double tol, Work& l) {
    const Index d = rho.rows();
    l.resize(d, d);
    for (Index j = 0; j < d; ++j) {
        double diag = rho(j, j).real() + tol;
        for (Index k = 0; k < j; ++k) diag -= std::norm(l(j, k));
        if (!(diag > 0.0)) return false;
        const double root = std::sqrt(diag);
        l(j, j) = root;
        for (Index i = j + 1; i < d; ++i) {
            Complex s = rho(i, j);
            for (Index k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / root;
        }
    }
    return true;
}

bool psd_within(const Matrix& rho, double tol) {
    if (rho.rows() <= 16) {
        Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 16, 16> work;
        return shifted_cholesky_ok(rho, tol, work);
    }
    Matrix work;
    return shifted_cholesky_ok(rho, tol, work);
}

std::size_t total_channels(const ThreeScaleModel& m) {
    return m.level0.kraus.size() + m.level1.kraus.size() + m.level2.kraus.size();
}

}  // namespace

NoiseIncrement NoiseIncrement::zero(const ThreeScaleModel& model) {
    NoiseIncrement n;
    for (int a = 0; a < 3; ++a) n.dw[a].assign(model.level(a).kraus.size(), 0.0);
    return n;
}

double default_step(double h_user, double gamma) {
    if (gamma == 0.0) return h_user;
    return std::min(h_user, 1e-2 / (gamma * gamma));
}

StepPlan plan_steps(double t_end, double h) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end", "t_end must be positive");
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("step", "step size must be positive");
    const double ratio = t_end / h;
    const auto n = static_cast<Index>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
    StepPlan plan;
    plan.n_steps = std::max<Index>(1, n);
    plan.h = t_end / static_cast<double>(plan.n_steps);
    return plan;
}

std::vector<Matrix> volatility(const GkslSpec& spec, const Matrix& rho) {
    if (rho.rows() != spec.dim || rho.cols() != spec.dim) {
        throw ValidationError("dimension_mismatch", "state and generator dimensions differ");
    }
    std::vector<Matrix> out;
    out.reserve(spec.kraus.size());
    for (std::size_t k = 0; k < spec.kraus.size(); ++k) {
        const Matrix& l = spec.kraus[k];
        const double eta = spec.efficiencies[k];
        if (eta == 0.0) {
            out.push_back(Matrix::Zero(spec.dim, spec.dim));
            continue;
        }
        const Complex tr = ((l.adjoint() + l) * rho).trace();
        out.push_back(std::sqrt(eta) * (l * rho + rho * l.adjoint() - tr * rho));
    }
    return out;
}

Matrix drift(const ThreeScaleModel& model, const Matrix& rho) {
    model.validate();
    if (rho.rows() != model.dim() || rho.cols() != model.dim()) {
        throw ValidationError("dimension_mismatch", "state and model dimensions differ");
    }
    const double g = model.gamma;
    return gksl_action(model.level0, rho) + g * gksl_action(model.level1, rho) +
           (g * g) * gksl_action(model.level2, rho);
}

bool project_state(Matrix& rho) {
    const Index d = rho.rows();
    for (Index j = 0; j < d; ++j) {
        rho(j, j) = Complex(rho(j, j).real(), 0.0);
        for (Index i = j + 1; i < d; ++i) {
            const Complex avg = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
            rho(i, j) = avg;
            rho(j, i) = std::conj(avg);
        }
    }
    bool clipped = false;
    if (!psd_within(rho, kClipThreshold)) {
        if (!rho.allFinite()) throw NumericalError("blow_up", "state became non-finite");
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
        const RealVector vals = es.eigenvalues().cwiseMax(0.0);
        rho = es.eigenvectors() * vals.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
        clipped = true;
    }
    double tr = 0.0;
    for (Index i = 0; i < d; ++i) tr += rho(i, i).real();
    if (!(tr > 0.0) || !std::isfinite(tr)) throw NumericalError("blow_up", "state trace is not positive");
    rho /= tr;
    return clipped;
}

// ---------------------------------------------------------------------------

EulerMaruyama::EulerMaruyama(const ThreeScaleModel& model)
    : dim_(model.dim()), channel_count_(total_channels(model)) {
    model.validate();
    const double g = model.gamma;
    generator_ = lindblad_from_gksl(model.level0).matrix() + g * lindblad_from_gksl(model.level1).matrix() +
                 (g * g) * lindblad_from_gksl(model.level2).matrix();
    std::uint32_t channel = 0;
    for (int alpha = 0; alpha < 3; ++alpha) {
        const GkslSpec& spec = model.level(alpha);
        const double scale = std::pow(g, 0.5 * alpha);
        for (std::size_t k = 0; k < spec.kraus.size(); ++k, ++channel) {
            if (spec.efficiencies[k] <= 0.0) continue;
            active_.push_back(channel);
            scaled_ops_.push_back(scale * std::sqrt(spec.efficiencies[k]) * spec.kraus[k]);
        }
    }
    incr_.resize(dim_, dim_);
    tmp_.resize(dim_, dim_);
    drift_.resize(dim_ * dim_);
}

const Matrix& EulerMaruyama::increment(const Matrix& rho, double h, const double* dw_active) {
    const Eigen::Map<const Vector> rho_vec(rho.data(), dim_ * dim_);
    drift_.noalias() = generator_ * rho_vec;
    Eigen::Map<Vector>(incr_.data(), dim_ * dim_) = h * drift_;
    for (std::size_t c = 0; c < scaled_ops_.size(); ++c) {
        const double dw = dw_active[c];
        if (dw == 0.0) continue;
        // With rho Hermitian: rho A^* = (A rho)^* and tr[(A + A^*) rho] = 2 Re tr(A rho).
        tmp_.noalias() = scaled_ops_[c] * rho;
        const double centre = 2.0 * tmp_.trace().real();
        incr_.noalias() += dw * (tmp_ + tmp_.adjoint() - centre * rho);
    }
    return incr_;
}

bool EulerMaruyama::advance(Matrix& rho, double h, const double* dw_active) {
    rho += increment(rho, h, dw_active);
    const bool clipped = project_state(rho);
    if (clipped) ++clips_;
    return clipped;
}

DensityMatrix step(const ThreeScaleModel& model, const DensityMatrix& rho, double h, const NoiseIncrement& dw) {
    if (!(h > 0.0)) throw ValidationError("step", "step size must be positive");
    for (int a = 0; a < 3; ++a) {
        if (dw.dw[a].size() != model.level(a).kraus.size()) {
            throw ValidationError("dimension_mismatch", "noise increment length differs from Kraus count");
        }
    }
    EulerMaruyama em(model);
    if (rho.dim() != em.dim()) throw ValidationError("dimension_mismatch", "state and model dimensions differ");
    std::vector<double> flat;
    for (int a = 0; a < 3; ++a) flat.insert(flat.end(), dw.dw[a].begin(), dw.dw[a].end());
    std::vector<double> active;
    for (std::uint32_t c : em.active_channels()) active.push_back(flat[c]);
    Matrix next = rho.matrix();
    em.advance(next, h, active.data());
    return DensityMatrix(std::move(next));
}

std::size_t integrate(const ThreeScaleModel& model, const DensityMatrix& rho0, const StepPlan& plan,
                      std::uint64_t seed, const StepObserver& observer) {
    EulerMaruyama em(model);
    if (rho0.dim() != em.dim()) throw ValidationError("dimension_mismatch", "state and model dimensions differ");
    std::vector<RandomStream> streams;
    streams.reserve(em.active_channels().size());
    for (std::uint32_t c : em.active_channels()) streams.emplace_back(seed, c);
    std::vector<double> dw(streams.size());
    const double sqrt_h = std::sqrt(plan.h);

    Matrix rho = rho0.matrix();
    if (observer) observer(0, 0.0, rho);
    for (Index n = 1; n <= plan.n_steps; ++n) {
        for (std::size_t c = 0; c < streams.size(); ++c) dw[c] = sqrt_h * streams[c].normal();
        try {
            em.advance(rho, plan.h, dw.data());
        } catch (const NumericalError& e) {
            std::ostringstream os;
            os << e.what() << " at step " << n << " (t = " << static_cast<double>(n) * plan.h
               << "); try a smaller step size";
            throw NumericalError(e.kind(), os.str());
        }
        if (observer) observer(n, static_cast<double>(n) * plan.h, rho);
    }
    return em.clip_count();
}

Trajectory simulate_trajectory(const ThreeScaleModel& model, const DensityMatrix& rho0, double t_end, double h,
                               std::uint64_t seed, Index save_stride) {
    if (save_stride < 1) throw ValidationError("stride", "save_stride must be >= 1");
    const StepPlan plan = plan_steps(t_end, default_step(h, model.gamma));
    Trajectory traj;
    traj.seed = seed;
    traj.h = plan.h;
    const Index saved = plan.n_steps / save_stride + 1;
    traj.times.reserve(static_cast<std::size_t>(saved));
    traj.states.reserve(static_cast<std::size_t>(saved));
    integrate(model, rho0, plan, seed, [&](Index n, double t, const Matrix& rho) {
        if (n % save_stride == 0) {
            traj.times.push_back(t);
            traj.states.push_back(rho);
        }
    });
    return traj;
}

// ---------------------------------------------------------------------------

void fig1_reduced_step(RealVector& x, double gamma, double h, double dw) {
    const double total = x.sum();
    // R x with R_{ij} = 1 - 3 delta_{ij}
    RealVector drift = RealVector::Constant(3, total) - 3.0 * x;
    double mean_l = 0.0;
    for (Index i = 0; i < 3; ++i) mean_l += static_cast<double>(i + 1) * x(i);
    RealVector noise(3);
    for (Index i = 0; i < 3; ++i) noise(i) = (static_cast<double>(i + 1) - mean_l) * x(i);
    x += h * drift + (2.0 * gamma * dw) * noise;
    if (!x.allFinite()) throw NumericalError("blow_up", "reduced state became non-finite");
    if (x.minCoeff() < -kClipThreshold) x = x.cwiseMax(0.0);
    const double s = x.sum();
    if (!(s > 0.0)) throw NumericalError("blow_up", "reduced state left the simplex");
    x /= s;
}

ReducedPath simulate_fig1_reduced(double gamma, Index n_steps, double h, std::uint64_t seed, const RealVector& x0,
                                  Index save_stride) {
    if (!(h > 0.0)) throw ValidationError("step", "step size must be positive");
    if (n_steps < 0) throw ValidationError("steps", "step count must be non-negative");
    if (save_stride < 1) throw ValidationError("stride", "save_stride must be >= 1");
    if (x0.size() != 3) throw ValidationError("dimension_mismatch", "reduced state has three populations");
    RandomStream stream(seed, 0);
    const double sqrt_h = std::sqrt(h);
    ReducedPath path;
    RealVector x = x0;
    path.times.push_back(0.0);
    path.values.push_back(x);
    for (Index n = 1; n <= n_steps; ++n) {
        fig1_reduced_step(x, gamma, h, sqrt_h * stream.normal());
        if (n % save_stride == 0) {
            path.times.push_back(static_cast<double>(n) * h);
            path.values.push_back(x);
        }
    }
    return path;
}

}  // namespace qtraj
