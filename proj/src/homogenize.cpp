#include "qtraj/homogenize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qtraj/errors.hpp"

namespace qtraj {
namespace {

void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw ValidationError("dimension_mismatch", std::string(what) + " must be a non-empty square matrix");
    }
}

void require_same_shape(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ValidationError("dimension_mismatch", "operators act on different spaces");
    }
}

}  // namespace

double HomogenizationResiduals::max() const {
    return std::max({idempotence, kernel_left, kernel_right, pinv_projector, pinv_inverse, centering});
}

double default_zero_tolerance(const Matrix& l2) { return 1e-9 * (1.0 + op_norm(l2)); }

KernelProjection kernel_projector(const Matrix& l2) { return kernel_projector(l2, default_zero_tolerance(l2)); }

KernelProjection kernel_projector(const Matrix& l2, double tol_zero) {
    require_square(l2, "L2");
    const Index n = l2.rows();

    const Eigen::ComplexEigenSolver<Matrix> eig(l2, /*computeEigenvectors=*/false);
    if (eig.info() != Eigen::Success) throw NumericalError("eigensolver", "eigenvalue computation failed");
    Index zero_count = 0;
    double max_re = -std::numeric_limits<double>::infinity();
    for (Index k = 0; k < n; ++k) {
        const Complex lambda = eig.eigenvalues()(k);
        if (std::abs(lambda) <= tol_zero) {
            ++zero_count;
            continue;
        }
        if (std::abs(lambda.real()) <= tol_zero) {
            std::ostringstream os;
            os << "purely imaginary eigenvalue " << lambda.real() << (lambda.imag() < 0 ? "" : "+")
               << lambda.imag() << "i";
            throw NumericalError("spectral_property", os.str());
        }
        max_re = std::max(max_re, lambda.real());
    }

    const Eigen::JacobiSVD<Matrix> svd(l2, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& sigma = svd.singularValues();
    Index kernel_dim = 0;
    for (Index k = 0; k < n; ++k) {
        if (sigma(k) <= tol_zero) ++kernel_dim;
    }
    if (kernel_dim != zero_count) {
        std::ostringstream os;
        os << "zero eigenvalue has algebraic multiplicity " << zero_count << " but kernel dimension "
           << kernel_dim;
        throw NumericalError("jordan_block", os.str());
    }

    KernelProjection out;
    out.kernel_dim = kernel_dim;
    out.tol_zero = tol_zero;
    out.spectral_gap = std::isfinite(max_re) ? -max_re : std::numeric_limits<double>::infinity();
    if (kernel_dim == 0) {
        out.projector = Matrix::Zero(n, n);
        return out;
    }

    // Singular values are sorted in decreasing order: the kernel sits in the
    // trailing columns of V (for L2) and U (for L2^*).
    const Matrix right = svd.matrixV().rightCols(kernel_dim);
    const Matrix left = svd.matrixU().rightCols(kernel_dim);
    const Matrix gram = left.adjoint() * right;
    const Eigen::JacobiSVD<Matrix> gram_svd(gram);
    const RealVector& gs = gram_svd.singularValues();
    if (!(gs(gs.size() - 1) > 1e-12 * gs(0))) {
        throw NumericalError("degenerate_biorthogonal", "kernels of L2 and L2^* are not in duality");
    }
    // Biorthogonalize: replace right by right * gram^{-1} so that <l_i, r_j> = delta_ij.
    const Matrix dual = gram.partialPivLu().solve(left.adjoint());
    out.projector = right * dual;

    const double check_tol = std::max(tol_zero, 1e-9 * (1.0 + op_norm(l2)));
    if (op_norm(out.projector * l2) > check_tol || op_norm(l2 * out.projector) > check_tol) {
        throw NumericalError("jordan_block", "projector does not annihilate L2; zero is not semi-simple");
    }
    return out;
}

Matrix pseudo_inverse(const Matrix& l2, const Matrix& projector) {
    require_square(l2, "L2");
    require_same_shape(l2, projector);
    const Index n = l2.rows();
    const Matrix complement = Matrix::Identity(n, n) - projector;

    // Orthonormal basis of Im(I - P) = Im L2; nonzero singular values of a
    // projector are >= 1.
    const Eigen::JacobiSVD<Matrix> svd(complement, Eigen::ComputeFullU);
    Index rank = 0;
    for (Index k = 0; k < n; ++k) {
        if (svd.singularValues()(k) > 0.5) ++rank;
    }
    if (rank == 0) return Matrix::Zero(n, n);
    const Matrix basis = svd.matrixU().leftCols(rank);
    const Matrix restricted = basis.adjoint() * l2 * basis;

    const RealVector rs = Eigen::JacobiSVD<Matrix>(restricted).singularValues();
    const double cond = rs(0) / rs(rs.size() - 1);
    if (!(cond < 1e13)) {
        std::ostringstream os;
        os << "restricted L2 is numerically singular (condition number " << cond << ")";
        throw NumericalError("ill_conditioned", os.str());
    }
    const Matrix coords = restricted.partialPivLu().solve(basis.adjoint() * complement);
    return basis * coords;
}

bool check_centering(const Matrix& l1, const Matrix& projector, double tol) {
    require_same_shape(l1, projector);
    return op_norm(projector * l1 * projector) <= tol;
}

HomogenizationResult homogenized_generator(const Matrix& l0, const Matrix& l1, const Matrix& l2) {
    require_square(l2, "L2");
    require_same_shape(l0, l2);
    require_same_shape(l1, l2);

    const KernelProjection kp = kernel_projector(l2);
    const Matrix& p = kp.projector;
    const double centering_tol = 1e-9 * (1.0 + op_norm(l1));
    if (!check_centering(l1, p, centering_tol)) {
        std::ostringstream os;
        os << "centering fails: |P L1 P| = " << op_norm(p * l1 * p);
        throw ValidationError("centering", os.str());
    }

    HomogenizationResult r;
    r.projector = p;
    r.pseudo_inverse = pseudo_inverse(l2, p);
    r.l_infinity = p * l0 * p - p * l1 * r.pseudo_inverse * l1 * p;
    r.spectral_gap = kp.spectral_gap;
    r.kernel_dim = kp.kernel_dim;
    return r;
}

HomogenizationResiduals residuals(const HomogenizationResult& result, const Matrix& l1, const Matrix& l2) {
    const Matrix& p = result.projector;
    const Matrix& pinv = result.pseudo_inverse;
    const Matrix q = Matrix::Identity(p.rows(), p.cols()) - p;
    HomogenizationResiduals r;
    r.idempotence = op_norm(p * p - p);
    r.kernel_left = op_norm(p * l2);
    r.kernel_right = op_norm(l2 * p);
    r.pinv_projector = std::max(op_norm(pinv * p), op_norm(p * pinv));
    r.pinv_inverse = std::max(op_norm(l2 * pinv - q), op_norm(pinv * l2 - q));
    r.centering = op_norm(p * l1 * p);
    return r;
}

std::vector<SemigroupError> compare_semigroups(const Matrix& l0, const Matrix& l1, const Matrix& l2,
                                               const std::vector<double>& gammas, double t) {
    if (!std::isfinite(t)) throw ValidationError("non_finite", "time must be finite");
    const HomogenizationResult h = homogenized_generator(l0, l1, l2);
    const Matrix scaled_inf = t * h.l_infinity;
    const Matrix limit = h.projector * expm<Complex>(scaled_inf) * h.projector;
    std::vector<SemigroupError> out;
    out.reserve(gammas.size());
    for (double g : gammas) {
        const Matrix lg = l0 + g * l1 + (g * g) * l2;
        const Matrix scaled = t * lg;
        out.push_back({g, op_norm(expm<Complex>(scaled) - limit)});
    }
    return out;
}

}  // namespace qtraj
