#pragma once

// Strong-coupling elimination of the fast generator L2 from
// L_gamma = L0 + gamma L1 + gamma^2 L2.
//
// Everything here works for arbitrary linear operators on a finite-dimensional
// space, given as square matrices; superoperators are handled through their
// d^2 x d^2 representing matrix (column-stacking convention).

#include <vector>

#include "qtraj/superop.hpp"

namespace qtraj {

/// Spectral projector onto Ker L2 parallel to Im L2.
struct KernelProjection {
    Matrix projector;
    Index kernel_dim = 0;
    /// -max Re(lambda) over the nonzero eigenvalues; +inf when there are none.
    double spectral_gap = 0.0;
    double tol_zero = 0.0;
};

struct HomogenizationResult {
    Matrix projector;
    Matrix pseudo_inverse;
    Matrix l_infinity;
    double spectral_gap = 0.0;
    Index kernel_dim = 0;
};

/// Norms of the defining identities; all should vanish.
struct HomogenizationResiduals {
    double idempotence = 0.0;     // |P P - P|
    double kernel_left = 0.0;     // |P L2|
    double kernel_right = 0.0;    // |L2 P|
    double pinv_projector = 0.0;  // max(|L2^- P|, |P L2^-|)
    double pinv_inverse = 0.0;    // max(|L2 L2^- - (I-P)|, |L2^- L2 - (I-P)|)
    double centering = 0.0;       // |P L1 P|
    double max() const;
};

struct SemigroupError {
    double gamma = 0.0;
    double error = 0.0;
};

/// 1e-9 (1 + |L2|).
double default_zero_tolerance(const Matrix& l2);

/// Biorthogonal construction P = sum_i r_i <l_i, .> from the singular-vector
/// kernels of L2 and L2^*. Throws NumericalError with kind
/// "spectral_property" (purely imaginary eigenvalue), "jordan_block"
/// (zero eigenvalue not semi-simple) or "degenerate_biorthogonal".
KernelProjection kernel_projector(const Matrix& l2, double tol_zero);
KernelProjection kernel_projector(const Matrix& l2);
inline KernelProjection kernel_projector(const SuperOperator& l2) { return kernel_projector(l2.matrix()); }

/// Inverse of L2 on Ker P and zero on Im P. Throws NumericalError
/// ("ill_conditioned", message carries the condition number) when the
/// restricted operator is numerically singular.
Matrix pseudo_inverse(const Matrix& l2, const Matrix& projector);

bool check_centering(const Matrix& l1, const Matrix& projector, double tol);

/// L_inf = P L0 P - P L1 L2^- L1 P. Throws ValidationError ("centering") if
/// |P L1 P| exceeds 1e-9 (1 + |L1|).
HomogenizationResult homogenized_generator(const Matrix& l0, const Matrix& l1, const Matrix& l2);
inline HomogenizationResult homogenized_generator(const SuperOperator& l0, const SuperOperator& l1,
                                                  const SuperOperator& l2) {
    return homogenized_generator(l0.matrix(), l1.matrix(), l2.matrix());
}

HomogenizationResiduals residuals(const HomogenizationResult& result, const Matrix& l1, const Matrix& l2);

/// | e^{t L_gamma} - P e^{t L_inf} P | in spectral norm, per gamma.
std::vector<SemigroupError> compare_semigroups(const Matrix& l0, const Matrix& l1, const Matrix& l2,
                                               const std::vector<double>& gammas, double t);

}  // namespace qtraj
