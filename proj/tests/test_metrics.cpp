#include <cmath>
#include <limits>

#include "doctest.h"
#include "qtraj/errors.hpp"
#include "qtraj/metrics.hpp"
#include "qtraj/models.hpp"
#include "test_support.hpp"

using namespace qtraj;
using namespace qtraj::testing;

namespace {

std::vector<double> grid(std::size_t n, double dt) {
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = static_cast<double>(k) * dt;
    return t;
}

PathFunction constant_path(const Matrix& m, std::size_t n, double dt) {
    PathFunction p;
    p.times = grid(n, dt);
    p.values.assign(n, m);
    return p;
}

PathFunction random_path(Rng& rng, std::size_t n) {
    PathFunction p;
    double t = uniform(rng, 0.0, 0.5);
    for (std::size_t k = 0; k < n; ++k) {
        p.times.push_back(t);
        p.values.push_back(random_matrix(2, rng) * uniform(rng, 0.0, 0.7));
        t += uniform(rng, 0.05, 2.0);
    }
    return p;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("mz_distance examples") {
    Rng rng(131);
    const PathFunction w = random_path(rng, 20);
    CHECK(mz_distance(w, w).distance == 0.0);

    Matrix a = Matrix::Zero(1, 1), b = Matrix::Zero(1, 1);
    b(0, 0) = 0.5;
    const MzDistance half = mz_distance(constant_path(a, 5, 1.0), constant_path(b, 5, 1.0), 20.0);
    CHECK(half.distance == doctest::Approx(0.5 * (1.0 - std::exp(-20.0))).epsilon(1e-14));
    CHECK(half.truncation_bound == doctest::Approx(std::exp(-20.0)));

    b(0, 0) = 3.0;
    const MzDistance clipped = mz_distance(constant_path(a, 5, 1.0), constant_path(b, 5, 1.0), 7.0);
    CHECK(clipped.distance == doctest::Approx(1.0 - std::exp(-7.0)).epsilon(1e-14));

    CHECK_THROWS_AS(mz_distance(constant_path(a, 2, 1.0), constant_path(Matrix::Zero(2, 2), 2, 1.0)),
                    ValidationError);
}

TEST_CASE("mz_distance is a pseudometric bounded by 1 - e^{-t_max}") {
    Rng rng(137);
    for (int trial = 0; trial < 30; ++trial) {
        const PathFunction x = random_path(rng, 15), y = random_path(rng, 9), z = random_path(rng, 25);
        const double t_max = uniform(rng, 1.0, 30.0);
        const double xy = mz_distance(x, y, t_max).distance;
        CHECK(xy == mz_distance(y, x, t_max).distance);
        CHECK(xy <= mz_distance(x, z, t_max).distance + mz_distance(z, y, t_max).distance + 1e-12);
        CHECK(xy <= 1.0 - std::exp(-t_max));
        CHECK(xy >= 0.0);
    }
}

TEST_CASE("mz_distance on a step function") {
    // |w1 - w2| = 0.25 on [1, 2) and 0 elsewhere.
    const PathFunction w1 = PathFunction::from_scalars({0.0, 1.0, 2.0}, {0.0, 0.25, 0.0});
    const PathFunction w2 = PathFunction::from_scalars({0.0}, {0.0});
    const double expected = 0.25 * (std::exp(-1.0) - std::exp(-2.0));
    CHECK(mz_distance(w1, w2).distance == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("smooth examples and affine commutation") {
    const PathFunction w = PathFunction::from_scalars(grid(8, 0.5), {0, 1, 0, 1, 0, 1, 0, 1});
    const PathFunction id = smooth(w, 1);
    CHECK(id.times == w.times);
    for (std::size_t k = 0; k < w.values.size(); ++k) CHECK(id.values[k] == w.values[k]);

    const PathFunction half = smooth(w, 2);
    CHECK(half.times.size() == 7);
    CHECK(half.times.front() == 0.5);
    for (const Matrix& v : half.values) CHECK(v(0, 0).real() == 0.5);

    const PathFunction c = smooth(PathFunction::from_scalars(grid(6, 1.0), std::vector<double>(6, 0.3)), 3);
    for (const Matrix& v : c.values) CHECK(std::abs(v(0, 0).real() - 0.3) < 1e-16);

    CHECK_THROWS_AS(smooth(w, 9), ValidationError);
    CHECK_THROWS_AS(smooth(w, 0), ValidationError);

    // Dyadic data: every operation is exact, so the identity holds bit for bit.
    Rng rng(139);
    std::vector<double> vals(64), mapped(64);
    for (std::size_t k = 0; k < vals.size(); ++k) {
        vals[k] = std::floor(uniform(rng, -64.0, 64.0)) / 8.0;
        mapped[k] = 2.0 * vals[k] + 0.5;
    }
    const ScalarPath s = smooth(ScalarPath{grid(64, 1.0), vals}, 4);
    const ScalarPath sm = smooth(ScalarPath{grid(64, 1.0), mapped}, 4);
    for (std::size_t k = 0; k < s.values.size(); ++k) CHECK(sm.values[k] == 2.0 * s.values[k] + 0.5);

    // Generic data, long window.
    for (double& v : vals) v = uniform(rng);
    for (std::size_t k = 0; k < vals.size(); ++k) mapped[k] = -1.7 * vals[k] + 3.1;
    const ScalarPath g = smooth(ScalarPath{grid(64, 1.0), vals}, 10);
    const ScalarPath gm = smooth(ScalarPath{grid(64, 1.0), mapped}, 10);
    for (std::size_t k = 0; k < g.values.size(); ++k) CHECK(std::abs(gm.values[k] - (-1.7 * g.values[k] + 3.1)) < 1e-13);
}

TEST_CASE("MovingAverage matches the batch smoother") {
    Rng rng(149);
    std::vector<double> vals(5000);
    for (double& v : vals) v = uniform(rng, 0.0, 3.0);
    const ScalarPath batch = smooth(ScalarPath{grid(vals.size(), 1.0), vals}, 100);
    MovingAverage ma(100);
    std::size_t k = 0;
    for (double v : vals) {
        if (ma.push(v)) {
            CHECK(std::abs(ma.value() - batch.values[k]) < 1e-13);
            ++k;
        }
    }
    CHECK(k == batch.values.size());
}

TEST_CASE("time_outside_balls examples and monotonicity") {
    const Matrix p = DensityMatrix::pointer(3, 0).matrix();
    const Matrix mixed = DensityMatrix::maximally_mixed(3).matrix();
    CHECK(time_outside_balls(constant_path(p, 10, 0.1), 0.2) == 0.0);
    CHECK(distance_to_pointers(mixed) == doctest::Approx(std::sqrt(6.0) / 3.0));
    const PathFunction m = constant_path(mixed, 10, 0.1);
    CHECK(time_outside_balls(m, 0.5) == doctest::Approx(m.end_time()));
    PathFunction halves = constant_path(p, 10, 0.1);
    for (std::size_t k = 5; k < 10; ++k) halves.values[k] = mixed;
    CHECK(time_outside_balls(halves, 0.5) == doctest::Approx(halves.end_time() / 2));

    Rng rng(151);
    PathFunction rp;
    rp.times = grid(200, 0.01);
    for (int k = 0; k < 200; ++k) rp.values.push_back(random_density(3, rng));
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 1.2}) {
        const double t = time_outside_balls(rp, eps);
        CHECK(t <= prev);
        prev = t;
    }
    CHECK_THROWS_AS(time_outside_balls(rp, 0.0), ValidationError);
}

TEST_CASE("offdiag_norm examples") {
    Matrix rho(2, 2);
    rho << 0.5, 0.5, 0.5, 0.5;
    CHECK(offdiag_norm(rho) == doctest::Approx(std::sqrt(2.0) / 2));
    const ScalarPath z = offdiag_norm(constant_path(DensityMatrix::maximally_mixed(3).matrix(), 4, 1.0));
    for (double v : z.values) CHECK(v == 0.0);
}

TEST_CASE("conditional_variation examples") {
    ThreeScaleModel zero;
    zero.level0 = GkslSpec::zero(3);
    zero.level1 = GkslSpec::zero(3);
    zero.level2 = GkslSpec::zero(3);
    Rng rng(157);
    std::vector<PathFunction> paths;
    for (int k = 0; k < 4; ++k) {
        PathFunction p;
        p.times = grid(11, 0.1);
        for (int s = 0; s < 11; ++s) p.values.push_back(random_density(3, rng));
        paths.push_back(p);
    }
    CHECK(conditional_variation(zero, paths, 1.0).value == 0.0);

    ThreeScaleModel qnd = fig1_model(50.0);
    qnd.level0 = GkslSpec::zero(3);
    CHECK(conditional_variation(qnd, paths, 1.0).value < 1e-10);

    // Fig. 1 on a constant state E_11: |diag L_0(E_11)| = sqrt(6) for all t.
    const ThreeScaleModel fig = fig1_model(50.0);
    std::vector<PathFunction> pointer{constant_path(DensityMatrix::pointer(3, 0).matrix(), 11, 0.1)};
    const Estimate e = conditional_variation(fig, pointer, 0.5);
    CHECK(e.value == doctest::Approx(0.5 * std::sqrt(6.0)).epsilon(1e-12));
    CHECK_THROWS_AS(conditional_variation(fig, pointer, 5.0), ValidationError);
}

TEST_CASE("empirical_marginal examples") {
    std::vector<Matrix> states;
    for (int k = 0; k < 6; ++k) states.push_back(DensityMatrix::pointer(3, k % 3 == 2 ? 2 : 0).matrix());
    const EmpiricalMarginal em = empirical_marginal(states, 0.2);
    CHECK(em.probabilities(0) == doctest::Approx(4.0 / 6));
    CHECK(em.probabilities(1) == 0.0);
    CHECK(em.probabilities(2) == doctest::Approx(2.0 / 6));
    CHECK(em.unassigned == 0.0);

    const std::vector<Matrix> mixed(5, DensityMatrix::maximally_mixed(3).matrix());
    const EmpiricalMarginal none = empirical_marginal(mixed, 0.5);
    CHECK(none.unassigned == 1.0);
    RealVector ref = RealVector::Constant(3, 1.0 / 3);
    CHECK(none.total_variation(ref) == doctest::Approx(1.0));
    CHECK(em.total_variation(em.probabilities) == 0.0);
}

TEST_CASE("index_at and path validation") {
    const std::vector<double> t{0.0, 0.1, 0.2, 0.3};
    CHECK(index_at(t, 0.0) == 0);
    CHECK(index_at(t, 0.2) == 2);
    CHECK(index_at(t, 0.25) == 2);
    CHECK(index_at(t, 0.1 + 0.2) == 3);
    PathFunction bad = PathFunction::from_scalars({0.0, 0.0}, {1.0, 2.0});
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK(PathFunction::from_scalars({0.0, 0.5}, {1.0, 2.0}).end_time() == 1.0);
}

}  // TEST_SUITE
