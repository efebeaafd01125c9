#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "inphys/baselines.hpp"
#include "inphys/dataset.hpp"
#include "inphys/model.hpp"
#include "inphys/normalizer.hpp"
#include "inphys/optim.hpp"

namespace inphys {

enum class ModelKind { in_full, in_dynamics_only, mlp_flat };

struct NoiseConfig {
    double fraction = 0.2;
    double std_scale = 0.05;
    int anneal_start = 50;
    int anneal_end = 250;
};

// Fraction of batch items corrupted at this epoch: flat before the
// anneal window, linear to zero across it, zero after.
double noise_fraction_at(int epoch, const NoiseConfig& cfg);

struct TrainConfig {
    ModelKind model = ModelKind::in_full;
    MarshalMode marshal = MarshalMode::position_invariant;
    AggregateMode aggregate = AggregateMode::velocity_only;
    int d_e = 25;
    std::vector<int> fr_hidden{75, 75, 75, 75};
    std::vector<int> fo_hidden{50};
    int d_p = 2;
    bool abstract_head = false;  // potential-energy estimation
    std::vector<int> fa_hidden{13};
    std::vector<int> mlp_hidden{150, 150};
    int epochs = 300;
    int batch_size = 100;
    double l2_effects = 1e-3;
    double l2_params = 1e-5;
    NoiseConfig noise;
    int balance_bins = 10;
    std::uint64_t seed = 0;
    int checkpoint_every = 25;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
    double lr = 0.0;
};

// Everything needed to resume training or run inference later.
struct TrainedModel {
    TrainConfig config;
    Domain domain = Domain::nbody;
    TargetKind target = TargetKind::velocity;
    int n_objects = 0;     // binding for mlp_flat; informational otherwise
    int n_relations = 0;
    InModel in;
    MlpBaseline flat;
    InModel best_in;
    MlpBaseline best_flat;
    Normalizer norm;
    AdamState adam;
    WaterfallSchedule schedule;
    int epochs_done = 0;
    double best_val = 0.0;
    bool has_best = false;
    std::vector<EpochRecord> metrics;

    std::vector<Matrix*> trainable_params();
    std::vector<const Matrix*> trainable_params() const;
};

struct TrainResult {
    bool diverged = false;
    int diverged_epoch = -1;
};

Normalizer fit_normalizer(const Dataset& ds);
GraphInput normalize_graph(const Normalizer& norm, const GraphInput& g);

// Partition of sample indices into batches. Items are binned by
// target-magnitude quantile (plus a contact stratum when requested) and
// dealt across batches so every batch sees each bin's share.
std::vector<std::vector<int>> balance_batches(const Dataset& ds, int batch_size,
                                              int bins, bool stratify_contact,
                                              Rng& rng);

TrainedModel init_trained_model(const TrainConfig& cfg, const Dataset& train);

// Runs epochs [state.epochs_done, config.epochs). `on_epoch` fires after
// each epoch's metrics are recorded (checkpoint hooks live there). A
// non-negative `stop_after` pauses once that many total epochs are done;
// resuming later continues exactly as an uninterrupted run would have.
TrainResult train(TrainedModel& state, const Dataset& train, const Dataset& val,
                  const std::function<void(const TrainedModel&)>& on_epoch = {},
                  int stop_after = -1);

struct EvalResult {
    double mse = 0.0;
    Matrix per_row;  // target_rows x 1 mean squared error, physical units
};

// Denormalized MSE of the best (falling back to current) parameters.
EvalResult evaluate(const TrainedModel& model, const Dataset& ds);
double evaluate_constant_velocity(const Dataset& ds);
// Energy baseline: predict the training-set mean target everywhere.
double mean_predictor_mse(const Dataset& train, const Dataset& test);

// Denormalized predictions for the listed samples, concatenated along
// columns in argument order (velocity: 2 x sum(n); energy: 1 x count).
Matrix predict_samples(const TrainedModel& model, const Dataset& ds,
                       const std::vector<int>& indices, bool use_best = true);

} // namespace inphys
