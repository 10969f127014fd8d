#include "qtraj/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qtraj/errors.hpp"

namespace qtraj {
namespace {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Backward-error bounds for the [m/m] Pade approximant (Higham 2005, Table 2.3).
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <class Scalar>
double one_norm(const Mat<Scalar>& a) {
    return a.cwiseAbs().colwise().sum().maxCoeff();
}

// Fills u (odd part) and v (even part) of the [m/m] approximant, m <= 9.
template <class Scalar>
void pade_low(const Mat<Scalar>& a, int m, Mat<Scalar>& u, Mat<Scalar>& v) {
    static const double b3[] = {120., 60., 12., 1.};
    static const double b5[] = {30240., 15120., 3360., 420., 30., 1.};
    static const double b7[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
    static const double b9[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                2162160.,     110880.,     3960.,       90.,        1.};
    const double* b = m == 3 ? b3 : m == 5 ? b5 : m == 7 ? b7 : b9;

    const Index n = a.rows();
    const Mat<Scalar> id = Mat<Scalar>::Identity(n, n);
    const Mat<Scalar> a2 = a * a;
    Mat<Scalar> power = a2;
    Mat<Scalar> odd = b[1] * id;
    v = b[0] * id;
    for (int k = 1; 2 * k <= m; ++k) {
        odd += b[2 * k + 1] * power;
        v += b[2 * k] * power;
        if (2 * (k + 1) <= m) power = power * a2;
    }
    u = a * odd;
}

template <class Scalar>
void pade13(const Mat<Scalar>& a, Mat<Scalar>& u, Mat<Scalar>& v) {
    static const double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                               1187353796428800.,  129060195264000.,   10559470521600.,
                               670442572800.,      33522128640.,       1323241920.,
                               40840800.,          960960.,            16380.,
                               182.,               1.};
    const Index n = a.rows();
    const Mat<Scalar> id = Mat<Scalar>::Identity(n, n);
    const Mat<Scalar> a2 = a * a;
    const Mat<Scalar> a4 = a2 * a2;
    const Mat<Scalar> a6 = a4 * a2;
    Mat<Scalar> tmp = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    tmp += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
    u = a * tmp;
    v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
    v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

template <class Scalar>
Mat<Scalar> expm_dense(const Mat<Scalar>& a) {
    const Index n = a.rows();
    if (n == 0) return a;
    const double norm = one_norm(a);
    if (!std::isfinite(norm)) {
        throw NumericalError("non_finite", "matrix exponential of a non-finite matrix");
    }
    if (norm == 0.0) return Mat<Scalar>::Identity(n, n);

    Mat<Scalar> u, v;
    int squarings = 0;
    if (norm <= kTheta3) {
        pade_low(a, 3, u, v);
    } else if (norm <= kTheta5) {
        pade_low(a, 5, u, v);
    } else if (norm <= kTheta7) {
        pade_low(a, 7, u, v);
    } else if (norm <= kTheta9) {
        pade_low(a, 9, u, v);
    } else {
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
        const Mat<Scalar> scaled = a / std::ldexp(1.0, squarings);
        pade13(scaled, u, v);
    }
    Mat<Scalar> result = (v - u).partialPivLu().solve(v + u);
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

// Union-find over the off-diagonal nonzero pattern.
template <class Scalar>
std::vector<Index> components_of(const Mat<Scalar>& a) {
    const Index n = a.rows();
    std::vector<Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            if (i != j && a(i, j) != Scalar(0)) {
                const Index ri = find(i), rj = find(j);
                if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
            }
        }
    }
    std::vector<Index> root(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) root[i] = find(i);
    return root;
}

}  // namespace

template <class Scalar>
Mat<Scalar> expm(const Mat<Scalar>& a) {
    if (a.rows() != a.cols()) {
        throw ValidationError("dimension_mismatch", "matrix exponential needs a square matrix");
    }
    const Index n = a.rows();
    const std::vector<Index> root = components_of(a);
    std::vector<std::vector<Index>> blocks;
    {
        std::vector<Index> slot(static_cast<std::size_t>(n), -1);
        for (Index i = 0; i < n; ++i) {
            Index& s = slot[root[i]];
            if (s < 0) {
                s = static_cast<Index>(blocks.size());
                blocks.emplace_back();
            }
            blocks[s].push_back(i);
        }
    }
    if (blocks.size() <= 1) return expm_dense(a);

    Mat<Scalar> result = Mat<Scalar>::Zero(n, n);
    for (const auto& idx : blocks) {
        const Index m = static_cast<Index>(idx.size());
        if (m == 1) {
            result(idx[0], idx[0]) = std::exp(a(idx[0], idx[0]));
            continue;
        }
        Mat<Scalar> block(m, m);
        for (Index c = 0; c < m; ++c)
            for (Index r = 0; r < m; ++r) block(r, c) = a(idx[r], idx[c]);
        const Mat<Scalar> eb = expm_dense(block);
        for (Index c = 0; c < m; ++c)
            for (Index r = 0; r < m; ++r) result(idx[r], idx[c]) = eb(r, c);
    }
    return result;
}

template Mat<double> expm<double>(const Mat<double>&);
template Mat<Complex> expm<Complex>(const Mat<Complex>&);

double op_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

double op_norm(const RealMatrix& a) {
    if (a.size() == 0) return 0.0;
    return Eigen::JacobiSVD<RealMatrix>(a).singularValues()(0);
}

}  // namespace qtraj
