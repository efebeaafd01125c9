#include "inphys/optim.hpp"

#include <cmath>

#include "inphys/errors.hpp"

namespace inphys {

bool WaterfallSchedule::update(double validation_error) {
    if (!std::isfinite(validation_error))
        throw numeric_error("waterfall: non-finite validation error");
    if (window <= 0) throw config_error("waterfall: window must be positive");

    recent.push_back(validation_error);
    if (static_cast<int>(recent.size()) > window) recent.pop_front();
    if (static_cast<int>(recent.size()) < window) return false;

    double mean = 0.0;
    for (double v : recent) mean += v;
    mean /= static_cast<double>(recent.size());

    if (mean < best * (1.0 - min_rel_improvement)) {
        best = mean;
        return false;
    }
    lr = std::max(lr * decay, floor);
    ++decays;
    recent.clear();
    return true;
}

AdamState AdamState::create(std::span<const Matrix* const> params) {
    AdamState st;
    for (const Matrix* p : params)
        st.slots.push_back({Matrix(p->rows, p->cols), Matrix(p->rows, p->cols)});
    return st;
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& state, double lr) {
    if (params.size() != grads.size() || params.size() != state.slots.size())
        throw contract_error("adam_step: parameter, gradient and slot counts differ");
    ++state.step;
    double t = static_cast<double>(state.step);
    double bc1 = 1.0 - std::pow(state.beta1, t);
    double bc2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t s = 0; s < params.size(); ++s) {
        Matrix& p = *params[s];
        const Matrix& g = *grads[s];
        AdamState::Slot& slot = state.slots[s];
        if (!p.same_shape(g) || !p.same_shape(slot.m))
            throw contract_error("adam_step: slot " + std::to_string(s) +
                                 " shape mismatch");
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            double gi = g.data[i];
            slot.m.data[i] = state.beta1 * slot.m.data[i] + (1.0 - state.beta1) * gi;
            slot.v.data[i] = state.beta2 * slot.v.data[i] + (1.0 - state.beta2) * gi * gi;
            double mhat = slot.m.data[i] / bc1;
            double vhat = slot.v.data[i] / bc2;
            p.data[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
        INPHYS_CHECK_FINITE(p);
    }
}

} // namespace inphys
