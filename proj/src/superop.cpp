#include "qtraj/superop.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "qtraj/errors.hpp"

namespace qtraj {
namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

void require_square(const Matrix& m, Index dim, const std::string& what) {
    if (m.rows() != dim || m.cols() != dim) {
        std::ostringstream os;
        os << what << " has shape " << m.rows() << "x" << m.cols() << ", expected " << dim << "x"
           << dim;
        throw ValidationError("dimension_mismatch", os.str());
    }
}

}  // namespace

Matrix basis_matrix(Index dim, Index i, Index j) {
    Matrix e = Matrix::Zero(dim, dim);
    e(i, j) = 1.0;
    return e;
}

Vector vectorize(const Matrix& x) { return Eigen::Map<const Vector>(x.data(), x.size()); }

Matrix unvectorize(const Vector& v, Index dim) { return Eigen::Map<const Matrix>(v.data(), dim, dim); }

// ---------------------------------------------------------------------------
// GkslSpec

GkslSpec GkslSpec::zero(Index dim) {
    if (dim < 1) throw ValidationError("dimension", "dimension must be >= 1");
    GkslSpec s;
    s.dim = dim;
    s.hamiltonian = Matrix::Zero(dim, dim);
    return s;
}

GkslSpec& GkslSpec::add_channel(Matrix op, double efficiency) {
    kraus.push_back(std::move(op));
    efficiencies.push_back(efficiency);
    return *this;
}

void GkslSpec::validate(double tol_herm) const {
    if (dim < 1) throw ValidationError("dimension", "dimension must be >= 1");
    require_square(hamiltonian, dim, "hamiltonian");
    if (!hamiltonian.allFinite()) throw ValidationError("non_finite", "hamiltonian has non-finite entries");
    if (!is_hermitian(hamiltonian, tol_herm)) {
        throw ValidationError("not_hermitian", "hamiltonian is not Hermitian");
    }
    if (kraus.size() != efficiencies.size()) {
        throw ValidationError("dimension_mismatch", "kraus and efficiencies differ in length");
    }
    for (std::size_t k = 0; k < kraus.size(); ++k) {
        require_square(kraus[k], dim, "kraus[" + std::to_string(k) + "]");
        if (!kraus[k].allFinite()) throw ValidationError("non_finite", "kraus operator has non-finite entries");
        const double eta = efficiencies[k];
        if (!(eta >= 0.0 && eta <= 1.0)) {
            throw ValidationError("efficiency_range",
                                  "efficiency " + std::to_string(eta) + " outside [0, 1]");
        }
    }
}

// ---------------------------------------------------------------------------
// SuperOperator

SuperOperator::SuperOperator(Index dim, Matrix matrix) : dim_(dim), matrix_(std::move(matrix)) {
    if (dim < 1) throw ValidationError("dimension", "dimension must be >= 1");
    if (matrix_.rows() != dim * dim || matrix_.cols() != dim * dim) {
        throw ValidationError("dimension_mismatch", "superoperator matrix must be d^2 x d^2");
    }
}

SuperOperator SuperOperator::identity(Index dim) {
    return SuperOperator(dim, Matrix::Identity(dim * dim, dim * dim));
}

SuperOperator SuperOperator::zero(Index dim) { return SuperOperator(dim, Matrix::Zero(dim * dim, dim * dim)); }

SuperOperator SuperOperator::from_map(Index dim, const std::function<Matrix(const Matrix&)>& map) {
    Matrix m(dim * dim, dim * dim);
    for (Index j = 0; j < dim; ++j) {
        for (Index i = 0; i < dim; ++i) {
            const Matrix image = map(basis_matrix(dim, i, j));
            require_square(image, dim, "mapped basis element");
            m.col(vec_index(i, j, dim)) = vectorize(image);
        }
    }
    return SuperOperator(dim, std::move(m));
}

Matrix SuperOperator::operator()(const Matrix& x) const {
    require_square(x, dim_, "argument");
    return unvectorize(matrix_ * vectorize(x), dim_);
}

void SuperOperator::require_same_dim(const SuperOperator& o) const {
    if (o.dim_ != dim_) throw ValidationError("dimension_mismatch", "superoperators act on different spaces");
}

SuperOperator SuperOperator::operator+(const SuperOperator& o) const {
    require_same_dim(o);
    return SuperOperator(dim_, matrix_ + o.matrix_);
}

SuperOperator SuperOperator::operator-(const SuperOperator& o) const {
    require_same_dim(o);
    return SuperOperator(dim_, matrix_ - o.matrix_);
}

SuperOperator SuperOperator::operator*(const SuperOperator& o) const {
    require_same_dim(o);
    return SuperOperator(dim_, matrix_ * o.matrix_);
}

SuperOperator SuperOperator::operator*(Complex s) const { return SuperOperator(dim_, s * matrix_); }

// ---------------------------------------------------------------------------

SuperOperator lindblad_from_gksl(const GkslSpec& spec) {
    spec.validate();
    const Index d = spec.dim;
    const Matrix id = Matrix::Identity(d, d);
    const Complex minus_i(0.0, -1.0);
    // vec(H X) = (I kron H) vec X,  vec(X H) = (H^T kron I) vec X
    Matrix m = minus_i * (kron(id, spec.hamiltonian) - kron(spec.hamiltonian.transpose(), id));
    for (const Matrix& l : spec.kraus) {
        const Matrix ldl = l.adjoint() * l;
        m += kron(l.conjugate(), l);
        m -= 0.5 * (kron(id, ldl) + kron(ldl.transpose(), id));
    }
    return SuperOperator(d, std::move(m));
}

Matrix gksl_action(const GkslSpec& spec, const Matrix& x) {
    require_square(x, spec.dim, "argument");
    const Complex minus_i(0.0, -1.0);
    Matrix out = minus_i * (spec.hamiltonian * x - x * spec.hamiltonian);
    for (const Matrix& l : spec.kraus) {
        const Matrix ldl = l.adjoint() * l;
        out += l * x * l.adjoint() - 0.5 * (ldl * x + x * ldl);
    }
    return out;
}

Matrix apply(const SuperOperator& op, const Matrix& x) { return op(x); }

SuperOperator hs_adjoint(const SuperOperator& op) {
    // vec is unitary for the Hilbert-Schmidt product, so the adjoint is the
    // conjugate transpose of the representing matrix.
    return SuperOperator(op.dim(), op.matrix().adjoint());
}

bool check_trace_preserving(const SuperOperator& op, double tol) {
    const Index d = op.dim();
    const Matrix& m = op.matrix();
    double worst = 0.0;
    for (Index col = 0; col < d * d; ++col) {
        Complex tr = 0.0;
        for (Index a = 0; a < d; ++a) tr += m(vec_index(a, a, d), col);
        worst = std::max(worst, std::abs(tr));
    }
    return worst <= tol;
}

SuperOperator expm(const SuperOperator& op, double t) {
    if (!std::isfinite(t)) throw ValidationError("non_finite", "exponential time must be finite");
    if (t == 0.0) return SuperOperator::identity(op.dim());
    const Matrix scaled = t * op.matrix();
    return SuperOperator(op.dim(), expm<Complex>(scaled));
}

// ---------------------------------------------------------------------------
// DensityMatrix

bool is_hermitian(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

std::string density_matrix_defect(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() < 1) return "not a non-empty square matrix";
    if (!m.allFinite()) return "non-finite entries";
    if (!is_hermitian(m, Tolerances::kHermitian)) return "not Hermitian";
    const Complex tr = m.trace();
    if (std::abs(tr - 1.0) > Tolerances::kTrace) return "trace differs from 1";
    const Matrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -Tolerances::kPsd) return "negative eigenvalue";
    return {};
}

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
    const std::string defect = density_matrix_defect(m_);
    if (!defect.empty()) throw ValidationError("invalid_state", "invalid density matrix: " + defect);
}

DensityMatrix DensityMatrix::pointer(Index dim, Index i) {
    if (i < 0 || i >= dim) throw ValidationError("index", "pointer index out of range");
    return DensityMatrix(basis_matrix(dim, i, i));
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
    const double n2 = psi.squaredNorm();
    if (!(n2 > 0.0)) throw ValidationError("invalid_state", "zero state vector");
    return DensityMatrix(psi * psi.adjoint() / n2);
}

DensityMatrix DensityMatrix::coherent(const RealVector& populations) {
    if ((populations.array() < 0.0).any()) {
        throw ValidationError("invalid_state", "populations must be non-negative");
    }
    return pure(populations.cwiseSqrt().cast<Complex>());
}

}  // namespace qtraj
