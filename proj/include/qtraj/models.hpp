#pragma once

// Built-in models.

#include "qtraj/qnd.hpp"

namespace qtraj {

/// Three-level weak-coupling example: level 0 has all nine E_ij as unread
/// Kraus operators (jump rates 1 between every pair), level 1 is empty and
/// level 2 is a single perfectly read channel diag(1, 2, 3).
ThreeScaleModel fig1_model(double gamma);

/// Two-level driven example: H1 = sigma_x / 2, L2 = diag(0, 1) read with
/// efficiency 1, no level-0 dynamics. Jump rates are 1 in both directions.
ThreeScaleModel rabi_model(double gamma);

/// The model's jump-rate matrix R_ij = 1 - 3 delta_ij of the first example.
RealMatrix fig1_rates();

}  // namespace qtraj
