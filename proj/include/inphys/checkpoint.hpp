#pragma once

#include <iosfwd>
#include <string>

#include "inphys/training.hpp"

namespace inphys {

// Full training state: parameters (current and best), optimizer moments,
// schedule, normalizer, metrics, and the originating config. Loading a
// checkpoint and continuing reproduces an uninterrupted run exactly.
void save_checkpoint(const TrainedModel& model, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

// Human-readable companion describing modes, dimensions and provenance.
std::string model_card_json(const TrainedModel& model);

// Columns: epoch, train_mse, val_mse, lr, wall_time. The wall-time column
// is pinned to 0 so repeated runs stay byte-identical.
void write_metrics_csv(const std::vector<EpochRecord>& metrics, std::ostream& out);

} // namespace inphys
