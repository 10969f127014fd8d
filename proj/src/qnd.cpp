#include "qtraj/qnd.hpp"

#include <cmath>
#include <sstream>

#include "qtraj/errors.hpp"

namespace qtraj {
namespace {

// Records every off-diagonal entry above tol and tracks the largest one seen.
void scan_offdiagonal(const Matrix& m, const std::string& source, Index k, double tol,
                      AssumptionReport& report) {
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i < m.rows(); ++i) {
            if (i == j) continue;
            const double mag = std::abs(m(i, j));
            report.max_offdiagonal = std::max(report.max_offdiagonal, mag);
            if (mag > tol) {
                report.qnd_ok = false;
                report.offending.push_back({source, i, j, k});
            }
        }
    }
}

void require_diagonal(const GkslSpec& spec, const std::string& what, double tol) {
    AssumptionReport r;
    scan_offdiagonal(spec.hamiltonian, "H", -1, tol, r);
    for (std::size_t k = 0; k < spec.kraus.size(); ++k) {
        scan_offdiagonal(spec.kraus[k], "L", static_cast<Index>(k), tol, r);
    }
    if (!r.qnd_ok) {
        std::ostringstream os;
        os << what << " is not diagonal in the computational basis (largest off-diagonal "
           << r.max_offdiagonal << ")";
        throw ValidationError("not_diagonal", os.str());
    }
}

void require_rate_model(const ThreeScaleModel& model, double tol) {
    model.validate();
    const AssumptionReport r = assess_assumptions(model, tol);
    if (!r.qnd_ok) throw ValidationError("qnd", "model violates the QND assumption");
    if (!r.identifiability_ok) {
        throw ValidationError("identifiability", "model violates the identifiability condition");
    }
}

}  // namespace

const GkslSpec& ThreeScaleModel::level(int alpha) const {
    switch (alpha) {
        case 0: return level0;
        case 1: return level1;
        case 2: return level2;
        default: throw ValidationError("level", "level index must be 0, 1 or 2");
    }
}

void ThreeScaleModel::validate() const {
    level0.validate();
    level1.validate();
    level2.validate();
    if (level1.dim != level0.dim || level2.dim != level0.dim) {
        throw ValidationError("dimension_mismatch", "the three levels have different dimensions");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw ValidationError("gamma", "gamma must be positive and finite");
    }
}

void MarkovGenerator::validate(double tol) const {
    if (rates.rows() != rates.cols() || rates.rows() < 1) {
        throw ValidationError("dimension_mismatch", "rate matrix must be square and non-empty");
    }
    if (!rates.allFinite()) throw ValidationError("non_finite", "rate matrix has non-finite entries");
    for (Index i = 0; i < rates.rows(); ++i) {
        for (Index j = 0; j < rates.cols(); ++j) {
            if (i != j && rates(i, j) < 0.0) {
                throw ValidationError("negative_rate", "off-diagonal rate is negative");
            }
        }
        const double scale = 1.0 + rates.row(i).cwiseAbs().maxCoeff();
        if (std::abs(rates.row(i).sum()) > tol * scale) {
            throw ValidationError("row_sum", "rate matrix row does not sum to zero");
        }
    }
}

AssumptionReport check_qnd(const ThreeScaleModel& model, double tol) {
    AssumptionReport report;
    scan_offdiagonal(model.level2.hamiltonian, "H2", -1, tol, report);
    for (std::size_t k = 0; k < model.level2.kraus.size(); ++k) {
        scan_offdiagonal(model.level2.kraus[k], "L2", static_cast<Index>(k), tol, report);
    }
    for (std::size_t k = 0; k < model.level1.kraus.size(); ++k) {
        scan_offdiagonal(model.level1.kraus[k], "L1", static_cast<Index>(k), tol, report);
    }
    return report;
}

AssumptionReport check_identifiability(const GkslSpec& level2, double tol) {
    AssumptionReport report;
    const Index d = level2.dim;
    for (Index i = 0; i < d; ++i) {
        for (Index j = i + 1; j < d; ++j) {
            bool identified = false;
            bool separated = false;
            for (std::size_t k = 0; k < level2.kraus.size(); ++k) {
                const Complex gap = level2.kraus[k](i, i) - level2.kraus[k](j, j);
                if (std::abs(gap) > tol) separated = true;
                if (level2.efficiencies[k] > 0.0 && std::abs(gap.real()) > tol) identified = true;
            }
            if (!identified) {
                report.identifiability_ok = false;
                report.offending.push_back({"identifiability", i, j, -1});
            }
            if (!separated) {
                report.decoherence_ok = false;
                report.offending.push_back({"decoherence", i, j, -1});
            }
        }
    }
    return report;
}

AssumptionReport assess_assumptions(const ThreeScaleModel& model, double tol) {
    AssumptionReport report = check_qnd(model, tol);
    const AssumptionReport id = check_identifiability(model.level2, tol);
    report.identifiability_ok = id.identifiability_ok;
    report.decoherence_ok = id.decoherence_ok;
    report.offending.insert(report.offending.end(), id.offending.begin(), id.offending.end());
    return report;
}

TauMatrix tau_eigenvalues(const GkslSpec& level2, double tol) {
    level2.validate();
    require_diagonal(level2, "level-2 generator", tol);
    const Index d = level2.dim;
    TauMatrix tau{Matrix::Zero(d, d)};
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            double re = 0.0;
            double im = level2.hamiltonian(i, i).real() - level2.hamiltonian(j, j).real();
            for (const Matrix& l : level2.kraus) {
                re -= 0.5 * std::norm(l(i, i) - l(j, j));
                im += (std::conj(l(i, i)) * l(j, j)).imag();
            }
            tau.values(i, j) = Complex(re, -im);
        }
    }

    const SuperOperator gen = lindblad_from_gksl(level2);
    for (Index j = 0; j < d; ++j) {
        for (Index i = 0; i < d; ++i) {
            const Index col = vec_index(i, j, d);
            Vector residual = gen.matrix().col(col);
            residual(col) -= tau.values(i, j);
            if (residual.norm() > 1e-10) {
                std::ostringstream os;
                os << "E_{" << i << "," << j << "} is not an eigenvector (residual " << residual.norm() << ")";
                throw NumericalError("eigenvector_check", os.str());
            }
        }
    }
    return tau;
}

MarkovGenerator transition_rates(const ThreeScaleModel& model, double tol) {
    require_rate_model(model, tol);
    const Index d = model.dim();
    const TauMatrix tau = tau_eigenvalues(model.level2, tol);
    MarkovGenerator t{RealMatrix::Zero(d, d)};
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            if (i == j) continue;
            double rate = 0.0;
            for (const Matrix& l : model.level0.kraus) rate += std::norm(l(j, i));
            const double coupling = std::norm(model.level1.hamiltonian(i, j));
            if (coupling > 0.0) {
                const double tau2 = std::norm(tau(i, j));
                if (tau2 == 0.0) {
                    throw ValidationError("identifiability", "vanishing tau eigenvalue for a coupled pair");
                }
                double spread = 0.0;
                for (const Matrix& l : model.level2.kraus) spread += std::norm(l(i, i) - l(j, j));
                rate += coupling / tau2 * spread;
            }
            t.rates(i, j) = rate;
        }
        t.rates(i, i) = -t.rates.row(i).sum();
    }
    return t;
}

RealMatrix decoherence_rates(const ThreeScaleModel& model, double tol) {
    model.validate();
    if (!check_qnd(model, tol).qnd_ok) throw ValidationError("qnd", "model violates the QND assumption");
    const Index d = model.dim();
    RealMatrix dmat = RealMatrix::Zero(d, d);
    for (int alpha = 1; alpha <= 2; ++alpha) {
        const GkslSpec& spec = model.level(alpha);
        const double weight = std::pow(model.gamma, alpha);
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) {
                if (i == j) continue;
                double acc = 0.0;
                for (std::size_t k = 0; k < spec.kraus.size(); ++k) {
                    const Complex gap = spec.kraus[k](i, i) - spec.kraus[k](j, j);
                    acc += gap.real() * gap.real() + (1.0 - spec.efficiencies[k]) * gap.imag() * gap.imag();
                }
                dmat(i, j) += weight * acc;
            }
        }
    }
    return dmat;
}

MarkovGenerator markov_from_pi_l_pi(const GkslSpec& spec) {
    spec.validate();
    const Index d = spec.dim;
    MarkovGenerator q{RealMatrix::Zero(d, d)};
    for (const Matrix& l : spec.kraus) {
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) {
                if (i != j) q.rates(i, j) += std::norm(l(j, i));
            }
        }
    }
    // Diagonal: sum_k |<L_k e_i, e_i>|^2 - ||L_k e_i||^2 = -sum_{j != i} Q_{i,j}.
    for (Index i = 0; i < d; ++i) {
        double out = 0.0;
        for (const Matrix& l : spec.kraus) out += l.col(i).squaredNorm() - std::norm(l(i, i));
        q.rates(i, i) = -out;
    }
    return q;
}

}  // namespace qtraj
