#pragma once

// Structural checks on three-scale models and the closed-form spectral data
// of a QND dominant generator: dephasing eigenvalues, decoherence rates and
// the jump-rate matrix of the limiting Markov chain.
//
// The pointer basis is always the computational basis; models expressed in
// another eigenbasis are rejected rather than rotated.

#include <string>
#include <vector>

#include "qtraj/superop.hpp"

namespace qtraj {

inline constexpr double kAssumptionTol = 1e-10;

/// L_gamma = L0 + gamma L1 + gamma^2 L2, each level in GKSL form.
struct ThreeScaleModel {
    GkslSpec level0;
    GkslSpec level1;
    GkslSpec level2;
    double gamma = 1.0;

    Index dim() const { return level0.dim; }
    const GkslSpec& level(int alpha) const;

    /// Throws ValidationError unless the three dims agree and gamma > 0.
    void validate() const;
};

/// Eigenvalues tau_{i,j} of L2 on E_{i,j}.
struct TauMatrix {
    Matrix values;
    Complex operator()(Index i, Index j) const { return values(i, j); }
};

/// Rate matrix with T_{i,j} >= 0 off the diagonal and zero row sums.
struct MarkovGenerator {
    RealMatrix rates;

    Index dim() const { return rates.rows(); }
    /// Throws ValidationError if the generator invariants fail.
    void validate(double tol = 1e-12) const;
};

struct Witness {
    std::string source;  // "H2", "L2", "L1" or "identifiability"/"decoherence"
    Index i = 0;
    Index j = 0;
    Index k = -1;  // channel index, -1 for Hamiltonians and pair witnesses
};

struct AssumptionReport {
    bool qnd_ok = true;
    bool identifiability_ok = true;
    bool decoherence_ok = true;
    std::vector<Witness> offending;
    double max_offdiagonal = 0.0;
};

/// QND: H2, every L2_k and every L1_k diagonal within tol.
AssumptionReport check_qnd(const ThreeScaleModel& model, double tol = kAssumptionTol);

/// Fills identifiability_ok / decoherence_ok (and their witnesses) only.
AssumptionReport check_identifiability(const GkslSpec& level2, double tol = kAssumptionTol);

/// check_qnd merged with check_identifiability of level 2.
AssumptionReport assess_assumptions(const ThreeScaleModel& model, double tol = kAssumptionTol);

/// Closed-form eigenvalues of a diagonal GKSL generator; also verifies each
/// E_{i,j} is an eigenvector of the assembled superoperator within 1e-10.
TauMatrix tau_eigenvalues(const GkslSpec& level2, double tol = kAssumptionTol);

/// Jump rates of the limiting chain; requires QND and identifiability.
MarkovGenerator transition_rates(const ThreeScaleModel& model, double tol = kAssumptionTol);

/// D^gamma_{i,j} of the dephasing envelope of the stochastic flow.
RealMatrix decoherence_rates(const ThreeScaleModel& model, double tol = kAssumptionTol);

/// Q_{i,j} = (L(E_{i,i}))_{j,j}: the Markov generator read off Pi L Pi.
MarkovGenerator markov_from_pi_l_pi(const GkslSpec& spec);

}  // namespace qtraj
