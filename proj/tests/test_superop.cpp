#include <cmath>
#include <limits>

#include "doctest.h"
#include "qtraj/errors.hpp"
#include "qtraj/models.hpp"
#include "qtraj/superop.hpp"
#include "test_support.hpp"

using namespace qtraj;
using namespace qtraj::testing;

TEST_SUITE("superop") {

TEST_CASE("column-stacking vectorization round trip and kron identity") {
    Rng rng(11);
    for (Index d : {1, 2, 3, 4}) {
        const Matrix a = random_matrix(d, rng), x = random_matrix(d, rng), b = random_matrix(d, rng);
        CHECK(max_abs(unvectorize(vectorize(x), d) - x) == 0.0);
        // vec(A X B) = (B^T kron A) vec(X), tabulated through from_map.
        const SuperOperator op = SuperOperator::from_map(d, [&](const Matrix& m) { return Matrix(a * m * b); });
        Matrix kron(d * d, d * d);
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) kron.block(i * d, j * d, d, d) = b(j, i) * a;
        }
        CHECK(max_abs(op.matrix() - kron) < 1e-13);
        const Vector v = vectorize(basis_matrix(d, d - 1, 0));
        CHECK(v(vec_index(d - 1, 0, d)) == Complex(1.0));
    }
}

TEST_CASE("lindblad_from_gksl examples") {
    CHECK(max_abs(lindblad_from_gksl(GkslSpec::zero(3)).matrix()) == 0.0);

    GkslSpec h = GkslSpec::zero(2);
    h.hamiltonian(0, 0) = 1.0;
    h.hamiltonian(1, 1) = -1.0;
    const Matrix img = qtraj::apply(lindblad_from_gksl(h), basis_matrix(2, 0, 1));
    CHECK(max_abs(img - Complex(0, -2) * basis_matrix(2, 0, 1)) < 1e-14);

    const ThreeScaleModel fig = fig1_model(1.0);
    const SuperOperator l2 = lindblad_from_gksl(fig.level2);
    CHECK(max_abs(qtraj::apply(l2, basis_matrix(3, 0, 2)) + 2.0 * basis_matrix(3, 0, 2)) < 1e-14);
    CHECK(max_abs(qtraj::apply(l2, basis_matrix(3, 0, 1)) + 0.5 * basis_matrix(3, 0, 1)) < 1e-14);
}

TEST_CASE("dimension mismatch is a validation error") {
    GkslSpec s = GkslSpec::zero(2);
    s.kraus.push_back(Matrix::Zero(3, 3));
    s.efficiencies.push_back(1.0);
    CHECK_THROWS_AS(lindblad_from_gksl(s), ValidationError);
    GkslSpec bad_eta = GkslSpec::zero(2);
    CHECK_THROWS_AS(bad_eta.add_channel(Matrix::Identity(2, 2), 1.5).validate(), ValidationError);
    CHECK_THROWS_AS(qtraj::apply(SuperOperator::identity(2), Matrix::Zero(3, 3)), ValidationError);
}

TEST_CASE("apply on identity and zero") {
    Rng rng(3);
    const Matrix x = random_matrix(3, rng);
    CHECK(max_abs(qtraj::apply(SuperOperator::identity(3), x) - x) == 0.0);
    CHECK(max_abs(qtraj::apply(SuperOperator::zero(3), x)) == 0.0);
}

TEST_CASE("vec identity: matrix form equals the direct GKSL sum") {
    Rng rng(5);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Index d = 1 + trial % 4;
        const GkslSpec s = random_gksl(d, rng, 1 + trial % 3);
        const Matrix x = random_matrix(d, rng);
        const SuperOperator l = lindblad_from_gksl(s);
        worst = std::max(worst, max_abs(qtraj::apply(l, x) - gksl_direct(s, x)));
        worst = std::max(worst, max_abs(gksl_action(s, x) - gksl_direct(s, x)));
    }
    CHECK(worst <= 1e-11);
}

TEST_CASE("hs_adjoint") {
    Rng rng(7);
    CHECK(max_abs(hs_adjoint(SuperOperator::identity(3)).matrix() - SuperOperator::identity(3).matrix()) == 0.0);
    const Index d = 3;
    const Matrix a = random_matrix(d, rng), b = random_matrix(d, rng);
    const SuperOperator op = SuperOperator::from_map(d, [&](const Matrix& x) { return Matrix(a * x * b); });
    const SuperOperator expected =
        SuperOperator::from_map(d, [&](const Matrix& x) { return Matrix(a.adjoint() * x * b.adjoint()); });
    CHECK(max_abs(hs_adjoint(op).matrix() - expected.matrix()) < 1e-13);
    for (int trial = 0; trial < 10; ++trial) {
        const SuperOperator l = lindblad_from_gksl(random_gksl(1 + trial % 4, rng, 2));
        CHECK(max_abs(hs_adjoint(hs_adjoint(l)).matrix() - l.matrix()) <= Tolerances::kLinear);
        const Index n = l.dim();
        CHECK(max_abs(qtraj::apply(hs_adjoint(l), Matrix::Identity(n, n))) < 1e-12);
        // <A, L B> = <L* A, B> on random matrices.
        const Matrix x = random_matrix(n, rng), y = random_matrix(n, rng);
        const Complex lhs = (x.adjoint() * qtraj::apply(l, y)).trace();
        const Complex rhs = (qtraj::apply(hs_adjoint(l), x).adjoint() * y).trace();
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("check_trace_preserving") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        CHECK(check_trace_preserving(lindblad_from_gksl(random_gksl(1 + trial % 4, rng, 3)), 1e-10));
    }
    CHECK_FALSE(check_trace_preserving(SuperOperator::identity(2), 1e-10));
    CHECK(check_trace_preserving(SuperOperator::zero(2), 1e-10));
}

TEST_CASE("expm examples") {
    const SuperOperator l2 = lindblad_from_gksl(fig1_model(1.0).level2);
    CHECK(max_abs(expm(l2, 0.0).matrix() - SuperOperator::identity(3).matrix()) == 0.0);
    const Matrix img = qtraj::apply(expm(l2, 1.0), basis_matrix(3, 0, 2));
    CHECK(std::abs(img(0, 2) - std::exp(-2.0)) < 1e-14);
    CHECK(max_abs(img - img(0, 2) * basis_matrix(3, 0, 2)) < 1e-15);

    RealMatrix nil(2, 2);
    nil << 0, 1, 0, 0;
    RealMatrix expected(2, 2);
    expected << 1, 1, 0, 1;
    CHECK((expm<double>(nil) - expected).cwiseAbs().maxCoeff() < 1e-15);

    CHECK_THROWS_AS(expm(l2, std::numeric_limits<double>::infinity()), ValidationError);
    CHECK_THROWS_AS(expm(l2, std::nan("")), ValidationError);
}

TEST_CASE("expm against a Taylor oracle and the semigroup law") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const Index d = 1 + trial % 4;
        const SuperOperator l = lindblad_from_gksl(random_gksl(d, rng, 2)) * Complex(uniform(rng, 0.5, 4.0));
        const double t = uniform(rng, 0.1, 3.0);
        const Matrix ours = expm(l, t).matrix();
        const Matrix oracle = expm_taylor(l.matrix() * t);
        CHECK(op_norm(ours - oracle) <= 1e-12 * std::max(1.0, op_norm(oracle)));
        const double s = uniform(rng, 0.1, 2.0);
        const Matrix composed = expm(l, s).matrix() * expm(l, t).matrix();
        CHECK(op_norm(expm(l, s + t).matrix() - composed) <= 1e-12 * std::max(1.0, op_norm(composed)));
    }
}

TEST_CASE("evolved states stay Hermitian with unit trace") {
    Rng rng(17);
    for (int trial = 0; trial < 12; ++trial) {
        const Index d = 1 + trial % 4;
        const SuperOperator l = lindblad_from_gksl(random_gksl(d, rng, 2));
        const Matrix rho = random_density(d, rng);
        for (double t : {0.1, 1.0, 10.0}) {
            const Matrix out = qtraj::apply(expm(l, t), rho);
            CHECK(is_hermitian(out, 1e-9));
            CHECK(std::abs(out.trace() - Complex(1.0)) <= 1e-9);
        }
    }
}

TEST_CASE("DensityMatrix validation and constructors") {
    CHECK(DensityMatrix::maximally_mixed(1).matrix()(0, 0) == Complex(1.0));
    CHECK_THROWS_AS(DensityMatrix(Matrix::Identity(2, 2)), ValidationError);  // trace 2
    Matrix neg = Matrix::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix{neg}, ValidationError);
    Matrix nonherm = 0.5 * Matrix::Identity(2, 2);
    nonherm(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix{nonherm}, ValidationError);
    CHECK(density_matrix_defect(nonherm) != "");
    RealVector p(3);
    p << 0.5, 0.3, 0.2;
    const Matrix c = DensityMatrix::coherent(p).matrix();
    CHECK(std::abs(c(0, 1) - std::sqrt(0.15)) < 1e-15);
    CHECK(std::abs(c.trace() - Complex(1.0)) < 1e-15);
    CHECK(max_abs(DensityMatrix::pointer(3, 1).matrix() - basis_matrix(3, 1, 1)) == 0.0);
}

}  // TEST_SUITE
