#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "inphys/engine.hpp"
#include "inphys/graph.hpp"

namespace inphys {

enum class TargetKind { velocity, energy };

// n-body initial-condition regime for a dataset. `half` alternates per
// scene index (even scenes orbit a heavy star, odd scenes start with
// random velocities), matching the data distribution the architecture
// is meant to learn from; the pure variants support probes and rollouts.
enum class OrbitMix { random, half, orbit };

// One supervised pair: object states at (scene, step) and either the
// next-step velocities (2 x n_objects) or the potential energy at the
// same step (1 x 1). `contact` marks steps where the simulator resolved
// at least one collision between step and step + 1.
struct DatasetSample {
    Matrix o;
    Matrix target;
    int scene = 0;
    int step = 0;
    bool contact = false;
};

struct DataGenConfig {
    Domain domain = Domain::nbody;
    int n_bodies = 3;    // balls: ball count; string: mass count
    OrbitMix orbit_mix = OrbitMix::half;  // n-body only
    int pinned = 1;                       // string only
    int n_scenes = 100;
    int n_steps = 500;
    int n_samples = 100000;
    double dt = 1e-3;
    TargetKind target = TargetKind::velocity;
    std::uint64_t seed = 0;
    // Balls velocity datasets: raise the share of contact steps (they
    // carry nearly all of the learning signal but are rare per step).
    bool contact_boost = true;

    void validate() const;
};

// Scenes sampled from one config share topology (entity count, relation
// list, incidence), so incidence is stored once; relation attributes and
// external effects vary per scene and are stored per scene.
struct Dataset {
    DataGenConfig provenance;
    int n_objects = 0;
    int n_relations = 0;
    OneHotColumns r_r;
    OneHotColumns r_s;
    std::vector<Matrix> scene_r_a;
    std::vector<Matrix> scene_x;
    std::vector<DatasetSample> samples;
    double raw_contact_rate = 0.0;  // contact steps / simulated steps

    int size() const { return static_cast<int>(samples.size()); }
    int target_rows() const { return provenance.target == TargetKind::velocity ? 2 : 1; }
    GraphInput graph_for(int sample) const;
    void validate() const;
};

// The scene used for scene index `i`; generate_dataset draws every scene
// through this function, so targets are reproducible afterwards.
Scene sample_scene_for(const DataGenConfig& cfg, int scene_index);

Dataset generate_dataset(const DataGenConfig& cfg);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);
void export_dataset_csv(const Dataset& ds, std::ostream& out);

} // namespace inphys
