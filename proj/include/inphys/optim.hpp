#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include "inphys/matrix.hpp"

namespace inphys {

// Validation-driven learning rate: start at `lr`, and whenever the mean
// validation error over the last `window` epochs stops improving by at
// least `min_rel_improvement` relative to the best windowed mean seen so
// far, multiply the rate by `decay` and start filling a fresh window.
struct WaterfallSchedule {
    double lr = 1e-3;
    double decay = 0.8;
    double floor = 1e-7;
    int window = 40;
    double min_rel_improvement = 1e-3;

    std::deque<double> recent;
    double best = std::numeric_limits<double>::infinity();
    int decays = 0;

    // Feed one validation error per epoch. Returns true when this update
    // decayed the learning rate.
    bool update(double validation_error);
};

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;

    struct Slot {
        Matrix m, v;
    };
    std::vector<Slot> slots;

    static AdamState create(std::span<const Matrix* const> params);
};

// One Adam update over all parameter matrices. `params` and `grads` must
// line up with the slots the state was created from. The step counter
// advances once per call.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& state, double lr);

} // namespace inphys
