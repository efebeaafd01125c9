#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "inphys/matrix.hpp"

namespace inphys {

// One evaluation of the loss at the current parameter values, together
// with a hash of every ReLU branch taken. Probes whose patterns differ
// across the +h / -h evaluations straddle a kink, where the central
// difference is meaningless and the entry is skipped.
struct LossProbe {
    double value = 0.0;
    std::uint64_t activation_pattern = 0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    int entries_checked = 0;
    int kinks_skipped = 0;
    int worst_slot = -1;
    int worst_row = -1;
    int worst_col = -1;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    double tol = 0.0;
    bool passed = false;
};

// Central finite differences against analytic gradients.
//   rel error = |analytic - numeric| / max(|analytic|, |numeric|, denom_floor)
// Parameters are perturbed in place and restored before returning.
GradCheckReport grad_check(const std::function<LossProbe()>& loss_fn,
                           std::span<Matrix* const> params,
                           std::span<const Matrix* const> analytic,
                           double h = 1e-5, double tol = 1e-4,
                           double denom_floor = 1e-4);

} // namespace inphys
