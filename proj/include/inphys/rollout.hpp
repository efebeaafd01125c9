#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "inphys/engine.hpp"
#include "inphys/training.hpp"

namespace inphys {

// Maps the current scene state to next-step velocities (2 x n).
using Predictor = std::function<Matrix(const Scene&)>;

// Wraps a trained velocity model: graph, normalize, predict, denormalize.
// The model is copied into the predictor.
Predictor model_predictor(const TrainedModel& model, bool use_best = true);
// Ground-truth predictor: one simulator step on a scratch copy.
Predictor oracle_predictor(double dt);

struct RolloutResult {
    Trajectory traj;
    // Step index at which a non-finite prediction stopped the rollout,
    // -1 for a complete run. traj keeps the snapshots before the failure.
    int truncated_at = -1;
};

// Closed loop: v_{t+1} = predictor(state_t), then x_{t+1} = x_t + v_{t+1} dt.
// `use_input_velocity` switches the position update to the pre-prediction
// velocity v_t. Static entities never move.
RolloutResult rollout(const Scene& initial, const Predictor& predictor, int steps,
                      double dt = 1e-3, bool use_input_velocity = false);

// Per-snapshot maximum distance between matching entities.
std::vector<double> positional_divergence(const Trajectory& a, const Trajectory& b);

void save_trajectory(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory(const std::string& path);
void export_divergence_csv(const std::vector<double>& divergence, std::ostream& out);

} // namespace inphys
