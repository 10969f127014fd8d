#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qtraj {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Matrix exponential e^{A} by scaling and squaring with diagonal Pade
/// approximants (orders 3..13, Higham's backward-error thresholds).
///
/// The sparsity pattern of A is first split into connected components; each
/// decoupled block is exponentiated on its own, so that a stiff block does not
/// force extra squarings (and the associated rounding) onto a slow one.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> expm(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a);

/// Spectral (largest singular value) norm.
double op_norm(const Matrix& a);
double op_norm(const RealMatrix& a);
template <class Derived>
double op_norm(const Eigen::MatrixBase<Derived>& a) {
    if constexpr (Eigen::NumTraits<typename Derived::Scalar>::IsComplex) {
        return op_norm(Matrix(a));
    } else {
        return op_norm(RealMatrix(a));
    }
}

/// Hilbert-Schmidt (Frobenius) norm.
inline double hs_norm(const Matrix& a) { return a.norm(); }

}  // namespace qtraj
