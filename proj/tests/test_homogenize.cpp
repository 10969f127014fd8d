#include <cmath>

#include "doctest.h"
#include "qtraj/errors.hpp"
#include "qtraj/homogenize.hpp"
#include "qtraj/models.hpp"
#include "test_support.hpp"

using namespace qtraj;
using namespace qtraj::testing;

namespace {

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

struct Levels {
    Matrix l0, l1, l2;
};

Levels levels(const ThreeScaleModel& m) {
    return {lindblad_from_gksl(m.level0).matrix(), lindblad_from_gksl(m.level1).matrix(),
            lindblad_from_gksl(m.level2).matrix()};
}

// Orthogonal projector onto the diagonal matrices.
Matrix diagonal_projector(Index d) {
    Matrix p = Matrix::Zero(d * d, d * d);
    for (Index i = 0; i < d; ++i) p(vec_index(i, i, d), vec_index(i, i, d)) = 1.0;
    return p;
}

}  // namespace

TEST_SUITE("homogenize") {

TEST_CASE("kernel_projector examples") {
    const Levels fig = levels(fig1_model(1.0));
    const KernelProjection kp = kernel_projector(fig.l2);
    CHECK(kp.kernel_dim == 3);
    CHECK(max_abs(kp.projector - diagonal_projector(3)) < 1e-12);
    CHECK(std::abs(kp.spectral_gap - 0.5) < 1e-12);

    const KernelProjection two = kernel_projector(mat2(0, 1, 0, -1));
    CHECK(max_abs(two.projector - mat2(1, 1, 0, 0)) < 1e-12);
    CHECK(max_abs(two.projector - expm_taylor(mat2(0, 1, 0, -1) * 40.0)) < 1e-12);

    const KernelProjection one = kernel_projector(Matrix::Zero(1, 1));
    CHECK(one.projector(0, 0) == Complex(1.0));
    CHECK(std::isinf(one.spectral_gap));
}

TEST_CASE("kernel_projector failure modes") {
    Matrix rot = mat2(0, 1, -1, 0);  // eigenvalues +-i
    try {
        kernel_projector(rot);
        FAIL("expected a spectral-property error");
    } catch (const NumericalError& e) {
        CHECK(e.kind() == "spectral_property");
    }
    try {
        kernel_projector(mat2(0, 1, 0, 0));
        FAIL("expected a Jordan-block error");
    } catch (const NumericalError& e) {
        CHECK(e.kind() == "jordan_block");
    }
}

TEST_CASE("pseudo_inverse examples") {
    const Matrix l = mat2(0, 1, 0, -1);
    const Matrix p = kernel_projector(l).projector;
    const Matrix s = pseudo_inverse(l, p);
    Vector v(2);
    v << 1, -1;
    CHECK(max_abs(Matrix(s * v + v)) < 1e-12);
    Vector k(2);
    k << 1, 0;
    CHECK(max_abs(Matrix(s * k)) < 1e-12);
    CHECK(max_abs(s - pseudo_inverse_integral(l, p, 60.0)) < 1e-9);

    const Matrix dg = mat2(0, 0, 0, -2);
    const Matrix sd = pseudo_inverse(dg, kernel_projector(dg).projector);
    CHECK(max_abs(sd - mat2(0, 0, 0, -0.5)) < 1e-14);

    const Matrix z = Matrix::Zero(4, 4);
    CHECK(max_abs(pseudo_inverse(z, kernel_projector(z).projector)) == 0.0);
}

TEST_CASE("check_centering examples") {
    Rng rng(41);
    const ThreeScaleModel m = random_qnd_model(3, rng);
    const Levels lv = levels(m);
    CHECK(check_centering(lv.l1, diagonal_projector(3), 1e-12));
    CHECK_FALSE(check_centering(Matrix::Identity(9, 9), diagonal_projector(3), 1e-12));
    CHECK(check_centering(Matrix::Zero(9, 9), diagonal_projector(3), 0.0));
}

TEST_CASE("homogenized_generator examples") {
    Rng rng(43);
    ThreeScaleModel m = random_qnd_model(3, rng);
    m.level1 = GkslSpec::zero(3);
    const Levels lv = levels(m);
    const HomogenizationResult r = homogenized_generator(lv.l0, lv.l1, lv.l2);
    CHECK(max_abs(r.l_infinity - r.projector * lv.l0 * r.projector) < 1e-14);

    const Levels fig = levels(fig1_model(1.0));
    const HomogenizationResult hf = homogenized_generator(fig.l0, fig.l1, fig.l2);
    for (Index i = 0; i < 3; ++i) {
        const Matrix img = unvectorize(hf.l_infinity * vectorize(basis_matrix(3, i, i)), 3);
        for (Index j = 0; j < 3; ++j) CHECK(std::abs(img(j, j).real() - fig1_rates()(i, j)) < 1e-12);
    }

    const Levels rabi = levels(rabi_model(1.0));
    const HomogenizationResult hr = homogenized_generator(rabi.l0, rabi.l1, rabi.l2);
    const Matrix img = unvectorize(hr.l_infinity * vectorize(basis_matrix(2, 0, 0)), 2);
    CHECK(std::abs(img(1, 1) - Complex(1.0)) < 1e-12);

    // Non-centered L1 is rejected.
    try {
        homogenized_generator(fig.l0, Matrix::Identity(9, 9), fig.l2);
        FAIL("expected a centering error");
    } catch (const ValidationError& e) {
        CHECK(e.kind() == "centering");
    }
}

TEST_CASE("operator identities, projector cross-check and consistency on random QND models") {
    Rng rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        const Index d = 2 + trial % 3;
        const ThreeScaleModel m = random_qnd_model(d, rng);
        const Levels lv = levels(m);
        const HomogenizationResult h = homogenized_generator(lv.l0, lv.l1, lv.l2);
        const HomogenizationResiduals res = residuals(h, lv.l1, lv.l2);
        CHECK(res.max() <= 1e-9);

        // Long-time exponential of L2 gives the same projector.
        const Matrix p_long = expm_taylor(lv.l2 * (50.0 / h.spectral_gap));
        CHECK(max_abs(h.projector - p_long) <= 1e-6);

        // Integral formula for the pseudo-inverse.
        if (d <= 3) {
            const Matrix s_int = pseudo_inverse_integral(lv.l2, h.projector, 60.0 / h.spectral_gap);
            CHECK(max_abs(h.pseudo_inverse - s_int) <= 1e-6 * (1.0 + max_abs(s_int)));
        }

        const RealMatrix t = rates_oracle(m);
        for (Index i = 0; i < d; ++i) {
            const Matrix img = unvectorize(h.l_infinity * vectorize(basis_matrix(d, i, i)), d);
            for (Index j = 0; j < d; ++j) CHECK(std::abs(img(j, j).real() - t(i, j)) <= 1e-8);
        }

        // tr(L_inf(X)) = 0.
        for (int k = 0; k < 3; ++k) {
            const Matrix x = random_matrix(d, rng);
            CHECK(std::abs(unvectorize(h.l_infinity * vectorize(x), d).trace()) <= 1e-10);
        }
    }
}

TEST_CASE("compare_semigroups") {
    Rng rng(53);
    const ThreeScaleModel m = random_qnd_model(2, rng);
    const Levels lv = levels(m);
    const Matrix zero = Matrix::Zero(4, 4);
    const KernelProjection kp = kernel_projector(lv.l2);
    const std::vector<SemigroupError> errs = compare_semigroups(zero, zero, lv.l2, {1.0, 2.0}, 0.5);
    REQUIRE(errs.size() == 2);
    for (const SemigroupError& e : errs) {
        const Matrix expected = expm_taylor(lv.l2 * (e.gamma * e.gamma * 0.5)) - kp.projector;
        CHECK(std::abs(e.error - op_norm(expected)) < 1e-12);
        CHECK(e.error <= std::exp(-e.gamma * e.gamma * 0.5 * kp.spectral_gap) * 10.0);
    }
    CHECK(errs[1].error < errs[0].error);
    CHECK_THROWS_AS(compare_semigroups(zero, zero, lv.l2, {1.0}, std::nan("")), ValidationError);
}

}  // TEST_SUITE
