#include "qtraj/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "qtraj/ensemble.hpp"
#include "qtraj/homogenize.hpp"
#include "qtraj/jump.hpp"
#include "qtraj/log.hpp"
#include "qtraj/metrics.hpp"
#include "qtraj/models.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/sde.hpp"

#ifndef QTRAJ_VERSION
#define QTRAJ_VERSION "unknown"
#endif

namespace qtraj {
namespace fs = std::filesystem;
namespace {

using Clock = std::chrono::steady_clock;

class PhaseTimer {
 public:
    explicit PhaseTimer(RunMetadata& meta) : meta_(meta) {}
    template <class F>
    auto operator()(const std::string& name, F&& f) {
        const auto start = Clock::now();
        struct Record {
            PhaseTimer* self;
            std::string name;
            Clock::time_point start;
            ~Record() {
                self->meta_.phases.emplace_back(name,
                                                std::chrono::duration<double>(Clock::now() - start).count());
            }
        } rec{this, name, start};
        return f();
    }

 private:
    RunMetadata& meta_;
};

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string cell;
    while (std::getline(is, cell, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw ValidationError("list", "not a number: '" + cell + "'");
        }
    }
    if (out.empty()) throw ValidationError("list", "empty list");
    return out;
}

std::string idx_name(const char* prefix, Index i, Index j) {
    return std::string(prefix) + "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("config", std::string(name) + " must be positive");
}

std::string padded(std::int64_t n) {
    std::ostringstream os;
    os << std::setw(5) << std::setfill('0') << n;
    return os.str();
}

// --------------------------------------------------------------------------- subcommands

void run_validate(const ExperimentConfig& c, const fs::path& out) {
    const ThreeScaleModel m = load_model(c);
    const AssumptionReport r = assess_assumptions(m, c.tol);
    Json j = to_json(r);
    j["dim"] = m.dim();
    j["gamma"] = m.gamma;
    write_json_file(out / "report.json", j);
    std::cout << std::boolalpha << "qnd_ok=" << r.qnd_ok << " identifiability_ok=" << r.identifiability_ok
              << " decoherence_ok=" << r.decoherence_ok << " max_offdiagonal=" << format_double(r.max_offdiagonal)
              << "\n";
}

void run_rates(const ExperimentConfig& c, const fs::path& out) {
    const ThreeScaleModel m = load_model(c);
    const MarkovGenerator t = transition_rates(m, c.tol);
    const TauMatrix tau = tau_eigenvalues(m.level2, c.tol);
    Json j = to_json(t);
    j["tau"] = matrix_to_json(tau.values);
    j["decoherence_rates"] = real_matrix_to_json(decoherence_rates(m, c.tol));
    j["gamma"] = m.gamma;
    write_json_file(out / "rates.json", j);
    std::cout << "T =\n";
    for (Index i = 0; i < t.dim(); ++i) {
        for (Index k = 0; k < t.dim(); ++k) std::cout << (k ? " " : "  ") << format_double(t.rates(i, k));
        std::cout << "\n";
    }
}

void run_homog(const ExperimentConfig& c, const fs::path& out) {
    const ThreeScaleModel m = load_model(c);
    const Matrix l0 = lindblad_from_gksl(m.level0).matrix();
    const Matrix l1 = lindblad_from_gksl(m.level1).matrix();
    const Matrix l2 = lindblad_from_gksl(m.level2).matrix();
    const HomogenizationResult h = homogenized_generator(l0, l1, l2);
    const HomogenizationResiduals r = residuals(h, l1, l2);
    Json j;
    j["spectral_gap"] = std::isfinite(h.spectral_gap) ? Json(h.spectral_gap) : Json(nullptr);
    j["kernel_dim"] = h.kernel_dim;
    j["residuals"] = to_json(r);
    // Generator read off the pointer diagonal: (L_inf(E_ii))_jj.
    const Index d = m.dim();
    RealMatrix q(d, d);
    for (Index i = 0; i < d; ++i) {
        const Matrix img = unvectorize(h.l_infinity * vectorize(basis_matrix(d, i, i)), d);
        for (Index k = 0; k < d; ++k) q(i, k) = img(k, k).real();
    }
    j["pointer_generator"] = real_matrix_to_json(q);
    if (c.full_matrices) {
        j["projector"] = matrix_to_json(h.projector);
        j["pseudo_inverse"] = matrix_to_json(h.pseudo_inverse);
        j["l_infinity"] = matrix_to_json(h.l_infinity);
    }
    write_json_file(out / "homog.json", j);
    std::cout << "kernel_dim=" << h.kernel_dim << " spectral_gap=" << format_double(h.spectral_gap)
              << " max_residual=" << format_double(r.max()) << "\n";
}

void run_compare(const ExperimentConfig& c, const fs::path& out) {
    const ThreeScaleModel m = load_model(c);
    if (c.gammas.empty()) throw ValidationError("config", "gamma grid must be non-empty");
    for (double g : c.gammas) require_positive(g, "gamma grid entries");
    const auto errs = compare_semigroups(lindblad_from_gksl(m.level0).matrix(),
                                         lindblad_from_gksl(m.level1).matrix(),
                                         lindblad_from_gksl(m.level2).matrix(), c.gammas, c.t);
    PlotSeries s;
    s.x_label = "gamma";
    s.labels = {"error"};
    s.ys.resize(1);
    for (const auto& e : errs) {
        s.x.push_back(e.gamma);
        s.ys[0].push_back(e.error);
        std::cout << "gamma=" << format_double(e.gamma) << " error=" << format_double(e.error) << "\n";
    }
    emit_plot_data(s, out / "compare.csv", c.svg, "semigroup error at t = " + format_double(c.t));
}

void run_sim(const ExperimentConfig& c, const fs::path& out, RunMetadata& meta, PhaseTimer& timer) {
    const ThreeScaleModel m = load_model(c);
    const DensityMatrix rho0 = parse_rho0(c.rho0, m.dim());
    require_positive(c.t_end, "t_end");
    require_positive(c.h, "h");
    EnsembleOptions o;
    o.n_trajectories = c.n;
    o.t_end = c.t_end;
    o.h = c.h;
    o.base_seed = c.seed;
    o.save_stride = c.stride;
    o.keep_states = true;
    o.threads = c.threads;
    const Index d = m.dim();
    std::vector<Observable> obs;
    for (Index i = 0; i < d; ++i) obs.push_back(population(i));
    obs.push_back(offdiag_observable());

    const EnsembleResult r = timer("simulate", [&] { return simulate_ensemble(m, rho0, o, obs); });
    for (const auto& tr : r.trajectories) meta.seeds.push_back(tr.seed);
    log::info("sim: ", r.trajectories.size(), " trajectories, ", r.n_steps, " steps of h = ", format_double(r.h));

    timer("write", [&] {
        std::vector<std::string> header{"t"};
        for (Index i = 0; i < d; ++i) header.push_back(idx_name("rho", i, i));
        header.push_back("offdiag_norm");
        std::vector<std::string> state_header{"t"};
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) {
                state_header.push_back(idx_name("re", i, j));
                state_header.push_back(idx_name("im", i, j));
            }
        }
        std::vector<double> row;
        for (std::size_t k = 0; k < r.trajectories.size(); ++k) {
            const auto& tr = r.trajectories[k];
            CsvWriter csv(out / "trajectories" / ("traj_" + padded(static_cast<std::int64_t>(k)) + ".csv"), header);
            for (std::size_t s = 0; s < r.times.size(); ++s) {
                row.assign(1, r.times[s]);
                for (std::size_t q = 0; q < obs.size(); ++q) row.push_back(tr.values[q][s]);
                csv.row(row);
            }
            csv.close();
            if (!c.full_states) continue;
            CsvWriter st(out / "states" / ("states_" + padded(static_cast<std::int64_t>(k)) + ".csv"), state_header);
            for (std::size_t s = 0; s < r.times.size(); ++s) {
                row.assign(1, r.times[s]);
                const Matrix& rho = tr.states[s];
                for (Index i = 0; i < d; ++i) {
                    for (Index j = 0; j < d; ++j) {
                        row.push_back(rho(i, j).real());
                        row.push_back(rho(i, j).imag());
                    }
                }
                st.row(row);
            }
            st.close();
        }

        PlotSeries ens;
        ens.x = r.times;
        for (Index i = 0; i < d; ++i) {
            ens.labels.push_back(idx_name("mean_rho", i, i));
            ens.ys.push_back(r.obs_mean[static_cast<std::size_t>(i)]);
            ens.labels.push_back(idx_name("se_rho", i, i));
            ens.ys.push_back(r.obs_stderr[static_cast<std::size_t>(i)]);
        }
        ens.labels.push_back("mean_offdiag_norm");
        ens.ys.push_back(r.obs_mean.back());
        ens.labels.push_back("se_offdiag_norm");
        ens.ys.push_back(r.obs_stderr.back());
        emit_plot_data(ens, out / "ensemble.csv", c.svg, "ensemble mean");
        return 0;
    });
    Json summary{{"h", r.h}, {"n_steps", r.n_steps}, {"n_trajectories", r.trajectories.size()}};
    std::size_t clips = 0;
    for (const auto& tr : r.trajectories) clips += tr.clips;
    summary["projection_clips"] = clips;
    write_json_file(out / "sim.json", summary);
}

MarkovGenerator resolve_rates(const ExperimentConfig& c, Index* dim_out) {
    MarkovGenerator t;
    if (c.rates == "from-model") {
        t = transition_rates(load_model(c), c.tol);
    } else {
        try {
            t = markov_from_json(read_json_file(c.rates));
        } catch (const Json::exception& e) {
            throw ValidationError("schema", c.rates + ": " + e.what());
        }
    }
    *dim_out = t.dim();
    return t;
}

void run_jump(const ExperimentConfig& c, const fs::path& out, RunMetadata& meta, PhaseTimer& timer) {
    Index d = 0;
    const MarkovGenerator t = resolve_rates(c, &d);
    require_positive(c.t_end, "t_end");
    if (c.n < 1) throw ValidationError("config", "n must be >= 1");
    if (c.n_times < 2) throw ValidationError("config", "n_times must be >= 2");
    RealVector mu;
    if (!c.mu.empty()) {
        const auto v = parse_list(c.mu);
        mu = Eigen::Map<const RealVector>(v.data(), static_cast<Index>(v.size()));
    } else {
        mu = initial_distribution(parse_rho0(c.rho0, d));
    }
    validate_distribution(mu, d);

    std::vector<double> grid;
    for (std::int64_t k = 0; k < c.n_times; ++k) {
        grid.push_back(c.t_end * static_cast<double>(k) / static_cast<double>(c.n_times - 1));
    }
    const JumpEnsemble ens = timer("simulate", [&] {
        return simulate_jump_ensemble(t, mu, c.t_end, c.n, c.seed, grid, c.threads);
    });
    timer("write", [&] {
        CsvWriter paths(out / "jump_paths.csv", {"path", "t", "state"});
        for (std::int64_t p = 0; p < c.n; ++p) {
            const JumpPath path = simulate_jump(t, mu, c.t_end, c.seed + static_cast<std::uint64_t>(p));
            meta.seeds.push_back(c.seed + static_cast<std::uint64_t>(p));
            paths.row({static_cast<double>(p), 0.0, static_cast<double>(path.states[0] + 1)});
            for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
                paths.row({static_cast<double>(p), path.jump_times[k], static_cast<double>(path.states[k + 1] + 1)});
            }
        }
        paths.close();

        PlotSeries s;
        s.x = grid;
        std::vector<RealVector> exact;
        for (double tt : grid) exact.push_back(marginal(t, mu, tt));
        for (Index i = 0; i < d; ++i) {
            s.labels.push_back("p_" + std::to_string(i + 1));
            s.labels.push_back("empirical_" + std::to_string(i + 1));
            s.labels.push_back("se_" + std::to_string(i + 1));
            std::vector<double> p, e, se;
            for (std::size_t k = 0; k < grid.size(); ++k) {
                p.push_back(exact[k](i));
                e.push_back(ens.occupation[k](i));
                se.push_back(ens.stderr_[k](i));
            }
            s.ys.push_back(std::move(p));
            s.ys.push_back(std::move(e));
            s.ys.push_back(std::move(se));
        }
        emit_plot_data(s, out / "marginal.csv", c.svg, "jump-chain marginal");
        return 0;
    });
    std::cout << "mean jumps per path: " << format_double(ens.mean_jumps) << " +- "
              << format_double(ens.mean_jumps_stderr) << "\n";
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(p)) {
                if (e.is_regular_file() && e.path().extension() == ".csv") found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else if (fs::exists(p)) {
            files.push_back(p);
        } else {
            throw IoError("input not found: " + in);
        }
    }
    if (files.empty()) throw ValidationError("config", "metrics needs at least one trajectory CSV");
    return files;
}

struct DiagPath {
    std::vector<double> times;
    std::vector<RealVector> diag;
    std::vector<double> offdiag;
};

DiagPath load_diag_path(const fs::path& file) {
    const CsvTable t = read_csv(file);
    DiagPath p;
    const std::size_t tc = t.column("t");
    const std::size_t oc = t.column("offdiag_norm");
    std::vector<std::size_t> dc;
    for (Index i = 0;; ++i) {
        const std::string name = idx_name("rho", i, i);
        if (std::find(t.header.begin(), t.header.end(), name) == t.header.end()) break;
        dc.push_back(t.column(name));
    }
    if (dc.empty()) throw ValidationError("csv", file.string() + ": no rho_i_i columns");
    for (const auto& row : t.rows) {
        p.times.push_back(row[tc]);
        RealVector v(static_cast<Index>(dc.size()));
        for (std::size_t i = 0; i < dc.size(); ++i) v(static_cast<Index>(i)) = row[dc[i]];
        p.diag.push_back(std::move(v));
        p.offdiag.push_back(row[oc]);
    }
    if (p.times.empty()) throw ValidationError("csv", file.string() + ": no rows");
    return p;
}

// |rho - E_ii|^2 = sum_j (rho_jj - delta_ij)^2 + |offdiag|^2, minimized over i.
std::pair<double, Index> nearest_pointer(const RealVector& diag, double offdiag) {
    double best = std::numeric_limits<double>::infinity();
    Index arg = 0;
    const double base = diag.squaredNorm() + offdiag * offdiag + 1.0;
    for (Index i = 0; i < diag.size(); ++i) {
        const double d2 = base - 2.0 * diag(i);
        if (d2 < best) {
            best = d2;
            arg = i;
        }
    }
    return {std::sqrt(std::max(0.0, best)), arg};
}

PathFunction load_state_path(const fs::path& file) {
    const CsvTable t = read_csv(file);
    const std::size_t cols = t.header.size() - 1;
    const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(cols / 2))));
    if (static_cast<std::size_t>(2 * d * d) != cols) throw ValidationError("csv", file.string() + ": not a state file");
    PathFunction p;
    const std::size_t tc = t.column("t");
    for (const auto& row : t.rows) {
        p.times.push_back(row[tc]);
        Matrix m(d, d);
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) {
                m(i, j) = Complex(row[t.column(idx_name("re", i, j))], row[t.column(idx_name("im", i, j))]);
            }
        }
        p.values.push_back(std::move(m));
    }
    return p;
}

void run_metrics(const ExperimentConfig& c, const fs::path& out) {
    const auto files = expand_inputs(c.inputs);
    require_positive(c.epsilon, "epsilon");
    std::vector<DiagPath> paths;
    for (const auto& f : files) paths.push_back(load_diag_path(f));
    const Index d = paths.front().diag.front().size();

    Json j;
    j["n_paths"] = paths.size();
    j["epsilon"] = c.epsilon;

    // Time outside the pointer balls and MZ distance to the snapped path.
    std::vector<double> t_eps;
    std::vector<double> mz_snap;
    PathFunction reference;
    bool have_reference = false;
    if (!c.reference.empty()) {
        const CsvTable jt = read_csv(c.reference);
        const std::size_t pc = jt.column("path"), tc = jt.column("t"), sc = jt.column("state");
        for (const auto& row : jt.rows) {
            if (row[pc] != 0.0) continue;
            const auto s = static_cast<Index>(row[sc]) - 1;
            if (s < 0 || s >= d) throw ValidationError("csv", "reference state out of range");
            reference.times.push_back(row[tc]);
            reference.values.push_back(basis_matrix(d, s, 0).col(0));
        }
        have_reference = !reference.times.empty();
    }
    std::vector<double> mz_ref;
    for (const auto& p : paths) {
        PathFunction diag_path;
        PathFunction snapped;
        diag_path.times = p.times;
        snapped.times = p.times;
        double outside = 0.0;
        for (std::size_t k = 0; k < p.times.size(); ++k) {
            const auto [dist, arg] = nearest_pointer(p.diag[k], p.offdiag[k]);
            diag_path.values.push_back(p.diag[k].cast<Complex>());
            snapped.values.push_back(RealVector::Unit(d, arg).cast<Complex>());
            if (dist >= c.epsilon) outside += (k + 1 < p.times.size() ? p.times[k + 1] : diag_path.end_time()) - p.times[k];
        }
        t_eps.push_back(outside);
        mz_snap.push_back(mz_distance(diag_path, snapped).distance);
        if (have_reference) mz_ref.push_back(mz_distance(diag_path, reference).distance);
    }
    const SampleStats te = sample_stats(t_eps);
    j["time_outside"] = {{"mean", te.mean}, {"stderr", te.stderr_}, {"per_path", t_eps}};
    const SampleStats ms = sample_stats(mz_snap);
    j["mz_to_nearest_pointer_path"] = {{"mean", ms.mean}, {"stderr", ms.stderr_}, {"per_path", mz_snap},
                                       {"truncation_bound", std::exp(-kDefaultMzHorizon)}};
    if (have_reference) {
        const SampleStats mr = sample_stats(mz_ref);
        j["mz_to_reference"] = {{"mean", mr.mean}, {"stderr", mr.stderr_}, {"per_path", mz_ref}};
    }

    // Off-diagonal decay on the first path's grid.
    const auto& grid = paths.front().times;
    PlotSeries decay;
    decay.x = grid;
    decay.labels = {"mean_offdiag_norm", "se_offdiag_norm"};
    decay.ys.resize(2);
    Json table = Json::array();
    std::vector<double> column(paths.size());
    for (std::size_t s = 0; s < grid.size(); ++s) {
        for (std::size_t k = 0; k < paths.size(); ++k) {
            column[k] = paths[k].offdiag[index_at(paths[k].times, grid[s])];
        }
        const SampleStats st = sample_stats(column);
        decay.ys[0].push_back(st.mean);
        decay.ys[1].push_back(st.stderr_);
    }
    const std::size_t step = std::max<std::size_t>(1, grid.size() / 20);
    for (std::size_t s = 0; s < grid.size(); s += step) {
        table.push_back({{"t", grid[s]}, {"mean", decay.ys[0][s]}, {"stderr", decay.ys[1][s]}});
    }
    j["offdiag_decay"] = table;
    emit_plot_data(decay, out / "offdiag_decay.csv", c.svg, "mean off-diagonal norm");

    // Smoothed weighted diagonal of the first path.
    const auto& p0 = paths.front();
    if (c.window >= 1 && static_cast<std::size_t>(c.window) <= p0.times.size()) {
        ScalarPath w;
        w.times = p0.times;
        for (const auto& v : p0.diag) w.values.push_back(RealVector::LinSpaced(d, 1.0, static_cast<double>(d)).dot(v));
        const ScalarPath sm = smooth(w, static_cast<std::size_t>(c.window));
        PlotSeries ps;
        ps.x = sm.times;
        ps.labels = {"weighted_diag_smoothed"};
        ps.ys = {sm.values};
        emit_plot_data(ps, out / "weighted_smoothed.csv", c.svg, "smoothed weighted diagonal");
    }

    if (!c.states_input.empty()) {
        const ThreeScaleModel m = load_model(c);
        std::vector<PathFunction> states;
        for (const auto& f : expand_inputs({c.states_input})) states.push_back(load_state_path(f));
        const double tau = c.tau > 0.0 ? c.tau : states.front().times.back();
        const Estimate v = conditional_variation(m, states, tau);
        j["conditional_variation"] = {{"tau", tau}, {"value", v.value}, {"stderr", v.stderr_}};
    }
    write_json_file(out / "diagnostics.json", j);
    std::cout << "T_eps mean=" << format_double(te.mean) << " +- " << format_double(te.stderr_) << "\n";
}

void run_fig1(const ExperimentConfig& c, const fs::path& out, RunMetadata& meta, PhaseTimer& timer) {
    const double gamma = c.gamma > 0.0 ? c.gamma : 1e4;
    if (c.steps < 1) throw ValidationError("config", "steps must be >= 1");
    if (c.window < 1) throw ValidationError("config", "window must be >= 1");
    if (c.stride < 1) throw ValidationError("config", "stride must be >= 1");
    const double h = default_step(c.h, gamma);
    const DensityMatrix rho0 = parse_rho0(c.rho0, 3);
    meta.seeds.push_back(c.seed);

    std::vector<double> ts;
    std::array<std::vector<double>, 4> raw;
    std::array<std::vector<double>, 4> smoothed;
    std::array<MovingAverage, 4> avg{MovingAverage(static_cast<std::size_t>(c.window)),
                                     MovingAverage(static_cast<std::size_t>(c.window)),
                                     MovingAverage(static_cast<std::size_t>(c.window)),
                                     MovingAverage(static_cast<std::size_t>(c.window))};
    std::int64_t near = 0;
    std::int64_t counted = 0;
    const auto record = [&](std::int64_t n, const RealVector& x) {
        const double vals[4] = {x(0), x(1), x(2), x(0) + 2.0 * x(1) + 3.0 * x(2)};
        bool full = false;
        for (int k = 0; k < 4; ++k) full = avg[k].push(vals[k]);
        if (full) {
            const double w = avg[3].value();
            ++counted;
            if (std::min({std::abs(w - 1.0), std::abs(w - 2.0), std::abs(w - 3.0)}) <= 0.2) ++near;
        }
        if (n % c.stride != 0) return;
        ts.push_back(static_cast<double>(n) * h);
        for (int k = 0; k < 4; ++k) {
            raw[k].push_back(vals[k]);
            smoothed[k].push_back(full ? avg[k].value() : std::nan(""));
        }
    };

    timer("simulate", [&] {
        if (c.full_model) {
            const StepPlan plan{static_cast<Index>(c.steps), h};
            integrate(fig1_model(gamma), rho0, plan, c.seed, [&](Index n, double, const Matrix& rho) {
                record(n, rho.diagonal().real());
            });
        } else {
            RealVector x = rho0.matrix().diagonal().real();
            RandomStream stream(c.seed, 0);
            const double sqrt_h = std::sqrt(h);
            record(0, x);
            for (std::int64_t n = 1; n <= c.steps; ++n) {
                fig1_reduced_step(x, gamma, h, sqrt_h * stream.normal());
                record(n, x);
            }
        }
        return 0;
    });
    timer("write", [&] {
        const char* names[4] = {"x1", "x2", "x3", "weighted"};
        for (int k = 0; k < 4; ++k) {
            PlotSeries s;
            s.x = ts;
            s.labels = {"raw", "smoothed"};
            s.ys = {raw[k], smoothed[k]};
            emit_plot_data(s, out / (std::string("fig1_") + names[k] + ".csv"), c.svg, names[k]);
        }
        return 0;
    });
    const double frac = counted > 0 ? static_cast<double>(near) / static_cast<double>(counted) : 0.0;
    write_json_file(out / "fig1.json", Json{{"gamma", gamma},
                                            {"h", h},
                                            {"steps", c.steps},
                                            {"horizon", static_cast<double>(c.steps) * h},
                                            {"window", c.window},
                                            {"simulator", c.full_model ? "full" : "reduced"},
                                            {"fraction_near_pointers", frac}});
    std::cout << "h=" << format_double(h) << " horizon=" << format_double(static_cast<double>(c.steps) * h)
              << " fraction of time near {1,2,3}: " << format_double(frac) << "\n";
}

}  // namespace

// --------------------------------------------------------------------------- config

Json to_json(const ExperimentConfig& c) {
    Json j;
    j["schema_version"] = c.schema_version;
    j["kind"] = c.kind;
    j["model_path"] = c.model_path;
    j["preset"] = c.preset;
    j["gamma"] = c.gamma;
    j["t_end"] = c.t_end;
    j["h"] = c.h;
    j["n"] = c.n;
    j["seed"] = c.seed;
    j["stride"] = c.stride;
    j["gammas"] = c.gammas;
    j["t"] = c.t;
    j["rho0"] = c.rho0;
    j["rates"] = c.rates;
    j["mu"] = c.mu;
    j["n_times"] = c.n_times;
    j["inputs"] = c.inputs;
    j["states_input"] = c.states_input;
    j["reference"] = c.reference;
    j["epsilon"] = c.epsilon;
    j["tau"] = c.tau;
    j["radius"] = c.radius;
    j["steps"] = c.steps;
    j["window"] = c.window;
    j["full_model"] = c.full_model;
    j["full_states"] = c.full_states;
    j["full_matrices"] = c.full_matrices;
    j["svg"] = c.svg;
    j["tol"] = c.tol;
    j["out_dir"] = c.out_dir;
    j["threads"] = c.threads;
    return j;
}

ExperimentConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("schema", "config must be a JSON object");
    ExperimentConfig c;
    const Json known = to_json(c);
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ValidationError("schema", "unknown config key '" + key + "'");
    }
    try {
        const auto get = [&](const char* key, auto& dst) {
            if (j.contains(key)) dst = j.at(key).get<std::decay_t<decltype(dst)>>();
        };
        get("schema_version", c.schema_version);
        get("kind", c.kind);
        get("model_path", c.model_path);
        get("preset", c.preset);
        get("gamma", c.gamma);
        get("t_end", c.t_end);
        get("h", c.h);
        get("n", c.n);
        get("seed", c.seed);
        get("stride", c.stride);
        get("gammas", c.gammas);
        get("t", c.t);
        get("rho0", c.rho0);
        get("rates", c.rates);
        get("mu", c.mu);
        get("n_times", c.n_times);
        get("inputs", c.inputs);
        get("states_input", c.states_input);
        get("reference", c.reference);
        get("epsilon", c.epsilon);
        get("tau", c.tau);
        get("radius", c.radius);
        get("steps", c.steps);
        get("window", c.window);
        get("full_model", c.full_model);
        get("full_states", c.full_states);
        get("full_matrices", c.full_matrices);
        get("svg", c.svg);
        get("tol", c.tol);
        get("out_dir", c.out_dir);
        get("threads", c.threads);
    } catch (const Json::exception& e) {
        throw ValidationError("schema", std::string("bad config value: ") + e.what());
    }
    if (c.schema_version != kSchemaVersion) {
        throw ValidationError("schema", "unsupported schema_version " + std::to_string(c.schema_version));
    }
    return c;
}

std::string config_hash(const ExperimentConfig& c) {
    const std::string s = to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

Json to_json(const RunMetadata& m) {
    Json j;
    j["timestamp"] = m.timestamp;
    j["config_hash"] = m.config_hash;
    j["seeds"] = m.seeds;
    j["version"] = m.version;
    j["phases"] = Json::array();
    for (const auto& [name, secs] : m.phases) j["phases"].push_back({{"name", name}, {"seconds", secs}});
    return j;
}

ThreeScaleModel load_model(const ExperimentConfig& c) {
    ThreeScaleModel m;
    if (!c.model_path.empty()) {
        m = read_model_file(c.model_path);
    } else if (c.preset == "fig1") {
        m = fig1_model(1.0);
    } else if (c.preset == "rabi") {
        m = rabi_model(1.0);
    } else if (c.preset.empty()) {
        throw ValidationError("config", "no model given (use a model file or a preset)");
    } else {
        throw ValidationError("config", "unknown preset '" + c.preset + "'");
    }
    if (c.gamma > 0.0) m.gamma = c.gamma;
    m.validate();
    return m;
}

DensityMatrix parse_rho0(const std::string& spec, Index d) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "mixed") return DensityMatrix::maximally_mixed(d);
    if (head == "coherent") return DensityMatrix::coherent(RealVector::Constant(d, 1.0 / static_cast<double>(d)));
    if (head == "pointer") {
        const auto v = parse_list(tail);
        const auto i = static_cast<Index>(v.at(0)) - 1;
        if (v.size() != 1 || i < 0 || i >= d || static_cast<double>(i + 1) != v[0]) {
            throw ValidationError("rho0", "pointer index must be an integer in 1.." + std::to_string(d));
        }
        return DensityMatrix::pointer(d, i);
    }
    if (head == "diag" || head == "pure") {
        const auto v = parse_list(tail);
        if (static_cast<Index>(v.size()) != d) throw ValidationError("rho0", "expected " + std::to_string(d) + " entries");
        const RealVector p = Eigen::Map<const RealVector>(v.data(), d);
        if (head == "pure") return DensityMatrix::coherent(p);
        return DensityMatrix(p.cast<Complex>().asDiagonal().toDenseMatrix());
    }
    const Json j = read_json_file(spec);
    const Matrix m = matrix_from_json(j.is_object() ? j.at("rho") : j);
    if (m.rows() != d || m.cols() != d) throw ValidationError("dimension_mismatch", "rho0 has the wrong dimension");
    return DensityMatrix(m);
}

ExitCode run(const ExperimentConfig& c) {
    RunMetadata meta;
    meta.timestamp = utc_timestamp();
    meta.version = QTRAJ_VERSION;
    PhaseTimer timer(meta);
    try {
        meta.config_hash = config_hash(c);
        if (c.threads < 0) throw ValidationError("config", "threads must be >= 0");
        if (c.n < 1) throw ValidationError("config", "n must be >= 1");
        if (c.stride < 1) throw ValidationError("config", "stride must be >= 1");
        const fs::path out(c.out_dir);
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

        if (c.kind == "validate") {
            timer("validate", [&] { run_validate(c, out); return 0; });
        } else if (c.kind == "rates") {
            timer("rates", [&] { run_rates(c, out); return 0; });
        } else if (c.kind == "homog") {
            timer("homog", [&] { run_homog(c, out); return 0; });
        } else if (c.kind == "compare") {
            timer("compare", [&] { run_compare(c, out); return 0; });
        } else if (c.kind == "sim") {
            run_sim(c, out, meta, timer);
        } else if (c.kind == "jump") {
            run_jump(c, out, meta, timer);
        } else if (c.kind == "metrics") {
            timer("metrics", [&] { run_metrics(c, out); return 0; });
        } else if (c.kind == "fig1") {
            run_fig1(c, out, meta, timer);
        } else {
            throw ValidationError("config", "unknown experiment kind '" + c.kind + "'");
        }
        Json md = to_json(meta);
        md["config"] = to_json(c);
        write_json_file(out / "metadata.json", md);
        return ExitCode::kOk;
    } catch (const Error& e) {
        log::error(e.kind(), ": ", e.what());
        return e.code();
    } catch (const fs::filesystem_error& e) {
        log::error("io: ", e.what());
        return ExitCode::kIo;
    } catch (const Json::exception& e) {
        log::error("schema: ", e.what());
        return ExitCode::kValidation;
    }
}

}  // namespace qtraj
