#include <cmath>

#include "doctest.h"
#include "qtraj/errors.hpp"
#include "qtraj/models.hpp"
#include "qtraj/qnd.hpp"
#include "test_support.hpp"

using namespace qtraj;
using namespace qtraj::testing;

namespace {

Matrix diag(std::initializer_list<Complex> v) {
    Matrix m = Matrix::Zero(static_cast<Index>(v.size()), static_cast<Index>(v.size()));
    Index i = 0;
    for (Complex x : v) m(i, i) = x, ++i;
    return m;
}

ThreeScaleModel empty_model(Index d) {
    ThreeScaleModel m;
    m.level0 = GkslSpec::zero(d);
    m.level1 = GkslSpec::zero(d);
    m.level2 = GkslSpec::zero(d);
    return m;
}

}  // namespace

TEST_SUITE("qnd") {

TEST_CASE("check_qnd examples") {
    CHECK(check_qnd(fig1_model(1.0)).qnd_ok);

    ThreeScaleModel m = fig1_model(1.0);
    m.level2.add_channel(basis_matrix(3, 0, 1), 1.0);
    const AssumptionReport r = check_qnd(m);
    CHECK_FALSE(r.qnd_ok);
    REQUIRE(r.offending.size() == 1);
    CHECK(r.offending[0].i == 0);
    CHECK(r.offending[0].j == 1);
    CHECK(r.offending[0].k == 1);

    Rng rng(1);
    ThreeScaleModel only0 = empty_model(3);
    only0.level0 = random_gksl(3, rng, 3);
    CHECK(check_qnd(only0).qnd_ok);
}

TEST_CASE("tau_eigenvalues examples") {
    const TauMatrix tau = tau_eigenvalues(fig1_model(1.0).level2);
    CHECK(std::abs(tau(0, 1) - Complex(-0.5)) < 1e-15);
    CHECK(std::abs(tau(0, 2) - Complex(-2.0)) < 1e-15);
    CHECK(std::abs(tau(1, 2) - Complex(-0.5)) < 1e-15);
    for (Index i = 0; i < 3; ++i) CHECK(tau(i, i) == Complex(0.0));

    GkslSpec h = GkslSpec::zero(2);
    h.hamiltonian = diag({1.0, -1.0});
    CHECK(std::abs(tau_eigenvalues(h)(0, 1) - Complex(0, -2)) < 1e-15);
    CHECK(tau_eigenvalues(GkslSpec::zero(3)).values.cwiseAbs().maxCoeff() == 0.0);

    GkslSpec off = GkslSpec::zero(2);
    off.add_channel(basis_matrix(2, 0, 1), 1.0);
    CHECK_THROWS_AS(tau_eigenvalues(off), ValidationError);
}

TEST_CASE("eigenvector property for random diagonal specs") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const Index d = 2 + trial % 3;
        GkslSpec s = GkslSpec::zero(d);
        s.hamiltonian = random_diagonal(d, rng, true);
        s.add_channel(random_diagonal(d, rng), 1.0);
        s.add_channel(random_diagonal(d, rng), 0.2);
        const TauMatrix tau = tau_eigenvalues(s);
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) {
                const Matrix e = basis_matrix(d, i, j);
                CHECK(max_abs(gksl_direct(s, e) - tau(i, j) * e) <= 1e-10);
            }
        }
    }
}

TEST_CASE("check_identifiability examples") {
    const AssumptionReport fig = check_identifiability(fig1_model(1.0).level2);
    CHECK(fig.identifiability_ok);
    CHECK(fig.decoherence_ok);

    GkslSpec blind = GkslSpec::zero(3);
    blind.add_channel(diag({1.0, 2.0, 3.0}), 0.0);
    const AssumptionReport r0 = check_identifiability(blind);
    CHECK_FALSE(r0.identifiability_ok);
    CHECK(r0.decoherence_ok);

    GkslSpec imag = GkslSpec::zero(2);
    imag.add_channel(diag({Complex(0, 1), Complex(0, 2)}), 1.0);
    const AssumptionReport ri = check_identifiability(imag);
    CHECK_FALSE(ri.identifiability_ok);
    CHECK(ri.decoherence_ok);
}

TEST_CASE("transition_rates examples") {
    const MarkovGenerator t = transition_rates(fig1_model(1.0));
    CHECK((t.rates - fig1_rates()).cwiseAbs().maxCoeff() < 1e-14);

    const MarkovGenerator rabi = transition_rates(rabi_model(1.0));
    CHECK(std::abs(rabi.rates(0, 1) - 1.0) < 1e-14);
    CHECK(std::abs(rabi.rates(1, 0) - 1.0) < 1e-14);

    ThreeScaleModel quiet = empty_model(3);
    quiet.level2.add_channel(diag({1.0, 2.0, 3.0}), 1.0);
    CHECK(transition_rates(quiet).rates.cwiseAbs().maxCoeff() == 0.0);

    ThreeScaleModel unread = rabi_model(1.0);
    unread.level2.efficiencies[0] = 0.0;
    CHECK_THROWS_AS(transition_rates(unread), ValidationError);
}

TEST_CASE("transition_rates matches the closed form and is a generator") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const ThreeScaleModel m = random_qnd_model(2 + trial % 3, rng);
        const MarkovGenerator t = transition_rates(m);
        CHECK_NOTHROW(t.validate());
        CHECK(max_abs(RealMatrix(t.rates - rates_oracle(m))) <= 1e-10 * (1.0 + max_abs(t.rates)));
    }
}

TEST_CASE("decoherence_rates examples") {
    const RealMatrix dg = decoherence_rates(fig1_model(10.0));
    CHECK(std::abs(dg(0, 1) - 100.0) < 1e-12);
    CHECK(std::abs(dg(0, 2) - 400.0) < 1e-12);
    CHECK(dg(1, 1) == 0.0);

    ThreeScaleModel imag = empty_model(2);
    imag.gamma = 3.0;
    imag.level2.add_channel(diag({Complex(0, 1), Complex(0, 2)}), 1.0);
    imag.level1.add_channel(diag({Complex(0, -1), Complex(0, 2)}), 1.0);
    CHECK(max_abs(decoherence_rates(imag)) < 1e-14);

    ThreeScaleModel none = empty_model(3);
    none.level0 = fig1_model(1.0).level0;
    CHECK(max_abs(decoherence_rates(none)) == 0.0);
}

TEST_CASE("markov_from_pi_l_pi examples") {
    GkslSpec s = GkslSpec::zero(2);
    s.add_channel(basis_matrix(2, 1, 0), 1.0);
    RealMatrix expected(2, 2);
    expected << -1, 1, 0, 0;
    CHECK(max_abs(RealMatrix(markov_from_pi_l_pi(s).rates - expected)) < 1e-15);

    Rng rng(29);
    GkslSpec ham = GkslSpec::zero(3);
    ham.hamiltonian = random_hermitian(3, rng);
    CHECK(max_abs(markov_from_pi_l_pi(ham).rates) < 1e-15);
    CHECK(max_abs(markov_from_pi_l_pi(GkslSpec::zero(3)).rates) == 0.0);
}

TEST_CASE("markov_from_pi_l_pi vanishes iff the Kraus operators are diagonal") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Index d = 2 + trial % 3;
        GkslSpec s = GkslSpec::zero(d);
        s.hamiltonian = random_hermitian(d, rng);
        const bool diagonal = trial % 2 == 0;
        for (int k = 0; k < 2; ++k) s.add_channel(diagonal ? random_diagonal(d, rng) : random_matrix(d, rng), 1.0);
        const double q = max_abs(markov_from_pi_l_pi(s).rates);
        CHECK((q <= 1e-10) == diagonal);
    }
}

TEST_CASE("detailed balance witness") {
    // p_i |L_{j,i}|^2 = p_j |L_{i,j}|^2 holds for L_{i,j} = sqrt(p_i) c_{ij}
    // with c symmetric in magnitude.
    Rng rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        const Index d = 2 + trial % 3;
        RealVector p(d);
        for (Index i = 0; i < d; ++i) p(i) = uniform(rng, 0.2, 1.0);
        p /= p.sum();
        ThreeScaleModel m = empty_model(d);
        m.level0.hamiltonian = random_hermitian(d, rng);
        for (int k = 0; k < 2; ++k) {
            Matrix c = random_matrix(d, rng);
            Matrix l(d, d);
            for (Index i = 0; i < d; ++i) {
                for (Index j = 0; j < d; ++j) l(i, j) = std::sqrt(p(i)) * std::abs(c(std::min(i, j), std::max(i, j)));
            }
            m.level0.add_channel(l, 0.0);
        }
        Matrix l2 = random_diagonal(d, rng);
        for (Index i = 0; i < d; ++i) l2(i, i) += static_cast<double>(i);
        m.level2.add_channel(l2, 1.0);
        const RealMatrix t = transition_rates(m).rates;
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) CHECK(std::abs(p(i) * t(i, j) - p(j) * t(j, i)) <= 1e-12);
        }
    }
}

}  // TEST_SUITE
