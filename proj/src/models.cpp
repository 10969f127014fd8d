#include "qtraj/models.hpp"

namespace qtraj {

ThreeScaleModel fig1_model(double gamma) {
    ThreeScaleModel m;
    m.gamma = gamma;
    m.level0 = GkslSpec::zero(3);
    for (Index j = 0; j < 3; ++j) {
        for (Index i = 0; i < 3; ++i) m.level0.add_channel(basis_matrix(3, i, j), 0.0);
    }
    m.level1 = GkslSpec::zero(3);
    m.level2 = GkslSpec::zero(3);
    Matrix l = Matrix::Zero(3, 3);
    l.diagonal() << 1.0, 2.0, 3.0;
    m.level2.add_channel(l, 1.0);
    return m;
}

ThreeScaleModel rabi_model(double gamma) {
    ThreeScaleModel m;
    m.gamma = gamma;
    m.level0 = GkslSpec::zero(2);
    m.level1 = GkslSpec::zero(2);
    m.level1.hamiltonian << 0.0, 0.5, 0.5, 0.0;
    m.level2 = GkslSpec::zero(2);
    Matrix l = Matrix::Zero(2, 2);
    l(1, 1) = 1.0;
    m.level2.add_channel(l, 1.0);
    return m;
}

RealMatrix fig1_rates() {
    RealMatrix r = RealMatrix::Ones(3, 3);
    r.diagonal().setConstant(-2.0);
    return r;
}

}  // namespace qtraj
