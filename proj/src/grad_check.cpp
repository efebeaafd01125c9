#include "inphys/grad_check.hpp"

#include <cmath>

namespace inphys {

GradCheckReport grad_check(const std::function<LossProbe()>& loss_fn,
                           std::span<Matrix* const> params,
                           std::span<const Matrix* const> analytic,
                           double h, double tol, double denom_floor) {
    if (params.size() != analytic.size())
        throw contract_error("grad_check: parameter and gradient counts differ");
    if (h <= 0.0 || tol <= 0.0) throw config_error("grad_check: h and tol must be positive");

    GradCheckReport rep;
    rep.tol = tol;
    for (std::size_t s = 0; s < params.size(); ++s) {
        Matrix& p = *params[s];
        const Matrix& a = *analytic[s];
        if (!p.same_shape(a))
            throw contract_error("grad_check: slot " + std::to_string(s) +
                                 " gradient shape mismatch");
        for (int r = 0; r < p.rows; ++r) {
            for (int c = 0; c < p.cols; ++c) {
                double saved = p(r, c);
                p(r, c) = saved + h;
                LossProbe plus = loss_fn();
                p(r, c) = saved - h;
                LossProbe minus = loss_fn();
                p(r, c) = saved;
                if (plus.activation_pattern != minus.activation_pattern) {
                    ++rep.kinks_skipped;
                    continue;
                }
                double numeric = (plus.value - minus.value) / (2.0 * h);
                double ana = a(r, c);
                double denom = std::max({std::abs(ana), std::abs(numeric), denom_floor});
                double rel = std::abs(ana - numeric) / denom;
                ++rep.entries_checked;
                if (rel > rep.max_rel_error) {
                    rep.max_rel_error = rel;
                    rep.worst_slot = static_cast<int>(s);
                    rep.worst_row = r;
                    rep.worst_col = c;
                    rep.worst_analytic = ana;
                    rep.worst_numeric = numeric;
                }
            }
        }
    }
    rep.passed = rep.max_rel_error <= tol;
    return rep;
}

} // namespace inphys
