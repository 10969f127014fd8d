#pragma once

// Dense matrix and superoperator algebra on M_d(C).
//
// Vectorization convention (fixed for the whole library): column stacking.
// The basis matrix E_{i,j} = e_i e_j^* sits at flat index j * d + i, so that
// vec(A X B) = (B^T kron A) vec(X).

#include <functional>
#include <string>
#include <vector>

#include "qtraj/linalg.hpp"

namespace qtraj {

struct Tolerances {
    static constexpr double kHermitian = 1e-9;
    static constexpr double kTrace = 1e-9;
    static constexpr double kPsd = 1e-9;
    static constexpr double kLinear = 1e-10;
    static constexpr double kExp = 1e-12;
};

inline Index vec_index(Index i, Index j, Index dim) { return j * dim + i; }

/// E_{i,j} = e_i e_j^* (0-based indices).
Matrix basis_matrix(Index dim, Index i, Index j);

Vector vectorize(const Matrix& x);
Matrix unvectorize(const Vector& v, Index dim);

/// Hamiltonian plus Kraus operators; the efficiencies only enter the
/// measurement noise, never the Lindbladian itself.
struct GkslSpec {
    Index dim = 1;
    Matrix hamiltonian = Matrix::Zero(1, 1);
    std::vector<Matrix> kraus;
    std::vector<double> efficiencies;

    static GkslSpec zero(Index dim);

    std::size_t channel_count() const { return kraus.size(); }
    GkslSpec& add_channel(Matrix op, double efficiency);

    /// Throws ValidationError on shape mismatch, non-Hermitian H or
    /// efficiencies outside [0, 1].
    void validate(double tol_herm = Tolerances::kHermitian) const;
};

class SuperOperator {
 public:
    SuperOperator() : SuperOperator(1, Matrix::Zero(1, 1)) {}
    SuperOperator(Index dim, Matrix matrix);

    static SuperOperator identity(Index dim);
    static SuperOperator zero(Index dim);
    /// Tabulates an arbitrary linear map by applying it to every E_{i,j}.
    static SuperOperator from_map(Index dim, const std::function<Matrix(const Matrix&)>& map);

    Index dim() const { return dim_; }
    const Matrix& matrix() const { return matrix_; }

    Matrix operator()(const Matrix& x) const;

    SuperOperator operator+(const SuperOperator& o) const;
    SuperOperator operator-(const SuperOperator& o) const;
    SuperOperator operator*(const SuperOperator& o) const;  // composition: (A*B)(X) = A(B(X))
    SuperOperator operator*(Complex s) const;
    friend SuperOperator operator*(Complex s, const SuperOperator& a) { return a * s; }

 private:
    void require_same_dim(const SuperOperator& o) const;

    Index dim_;
    Matrix matrix_;
};

/// L(X) = -i[H, X] + sum_k (L_k X L_k^* - 1/2 {L_k^* L_k, X}).
SuperOperator lindblad_from_gksl(const GkslSpec& spec);

/// Direct evaluation of the GKSL sum, without forming the d^2 x d^2 matrix.
Matrix gksl_action(const GkslSpec& spec, const Matrix& x);

Matrix apply(const SuperOperator& op, const Matrix& x);

/// Adjoint for <A, B> = tr(A^* B).
SuperOperator hs_adjoint(const SuperOperator& op);

/// True iff max_{i,j} |tr(op(E_{i,j}))| <= tol.
bool check_trace_preserving(const SuperOperator& op, double tol);

/// e^{t op}. Throws ValidationError for non-finite t.
SuperOperator expm(const SuperOperator& op, double t);

/// Validated quantum state: Hermitian, positive semidefinite, unit trace.
class DensityMatrix {
 public:
    /// Throws ValidationError if the invariants fail at the library tolerances.
    explicit DensityMatrix(Matrix m);

    static DensityMatrix pointer(Index dim, Index i);
    static DensityMatrix maximally_mixed(Index dim);
    /// psi psi^* / |psi|^2.
    static DensityMatrix pure(const Vector& psi);
    /// Pure state with the given populations and zero relative phases.
    static DensityMatrix coherent(const RealVector& populations);

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

 private:
    Matrix m_;
};

bool is_hermitian(const Matrix& m, double tol = Tolerances::kHermitian);

/// Empty string when m is a valid density matrix, otherwise a reason.
std::string density_matrix_defect(const Matrix& m);

}  // namespace qtraj
