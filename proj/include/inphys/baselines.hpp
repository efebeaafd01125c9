#pragma once

#include <vector>

#include "inphys/graph.hpp"
#include "inphys/matrix.hpp"
#include "inphys/mlp.hpp"
#include "inphys/rng.hpp"

namespace inphys {

// Predicts that every object keeps its current velocity. The floor any
// learned dynamics model has to beat.
Matrix constant_velocity_prediction(const GraphInput& g);

// Flattens a graph into a single column: O column-major (object by
// object), then X, then R_a. Only valid for a fixed topology.
Matrix flatten_graph(const GraphInput& g);

// Fully connected baseline over the flattened graph. Has no weight
// sharing and is pinned to one object/relation count. The network
// produces out_rows * out_cols values per graph, read back column-major
// as an (out_rows x out_cols) prediction: (2 x N_O) for dynamics,
// (1 x 1) for energy.
struct MlpBaseline {
    MlpParams net;
    int n_objects = 0;
    int n_relations = 0;
    int out_rows = 0;
    int out_cols = 0;

    static MlpBaseline create(int n_objects, int n_relations, int out_rows,
                              int out_cols, const std::vector<int>& hidden, Rng& rng);
    void validate() const;
};

Matrix mlp_baseline_predict(const MlpBaseline& m, const GraphInput& g,
                            MlpCache* cache = nullptr);

// Inverse of the output flattening: one network output column back to
// an (out_rows x out_cols) matrix.
Matrix unflatten_output(const Matrix& column, int out_rows, int out_cols);

} // namespace inphys
