#pragma once

#include <cstdint>
#include <optional>

#include "inphys/graph.hpp"
#include "inphys/matrix.hpp"
#include "inphys/mlp.hpp"

namespace inphys {

// How relation columns are assembled.
//   basic:              [receiver state; sender state; attributes]
//   position_invariant: [receiver dyn - sender dyn; receiver static;
//                        sender static; attributes]
enum class MarshalMode { basic, position_invariant };

// How object columns are assembled after effect aggregation.
//   full_state:    [O; X; aggregated effects]
//   velocity_only: [velocity rows; static attribute rows; X; effects]
// (positions are withheld from the object model, attributes are not)
enum class AggregateMode { full_state, velocity_only };

// Interaction network: a relation-wise MLP f_R, effect aggregation by
// receiver, an object-wise MLP f_O, and an optional abstract head f_A
// applied to the column sum of the per-object outputs.
struct InModel {
    MlpParams f_r;
    MlpParams f_o;
    std::optional<MlpParams> f_a;
    MarshalMode marshal_mode = MarshalMode::basic;
    AggregateMode aggregate_mode = AggregateMode::full_state;
    // Dynamics-only ablation: effects are pinned to the zero matrix.
    bool effects_zeroed = false;

    int d_e() const { return f_r.output_size(); }
    int d_p() const { return f_o.output_size(); }

    static int marshal_width(MarshalMode mode);
    static int aggregate_width(AggregateMode mode, int d_e);
    void validate() const;
};

Matrix marshal_basic(const GraphInput& g);
Matrix marshal_position_invariant(const GraphInput& g);
Matrix marshal(const InModel& m, const GraphInput& g);

// E = f_R applied column-wise to B.
Matrix relational_pass(const InModel& m, const Matrix& b, MlpCache* cache = nullptr);
// C from the graph and the summed effects per receiver.
Matrix aggregate(const InModel& m, const GraphInput& g, const Matrix& effects);
// P = f_O applied column-wise to C.
Matrix object_pass(const InModel& m, const Matrix& c, MlpCache* cache = nullptr);

// Everything one forward pass produces, kept for the backward pass.
struct InForward {
    Matrix b, e, c, p;
    Matrix p_bar, q;
    bool with_abstract = false;
    MlpCache fr_cache, fo_cache, fa_cache;

    // Combined ReLU branch fingerprint across the constituent MLPs.
    std::uint64_t pattern() const;
};

InForward in_forward(const InModel& m, const GraphInput& g, bool with_abstract = false);

// Next-step velocity prediction, (d_p x N_O).
Matrix predict(const InModel& m, const GraphInput& g);
// Abstract scalar head, (d_a x 1). Requires f_a.
Matrix abstract_estimate(const InModel& m, const GraphInput& g);

struct InGradients {
    MlpParams f_r, f_o, f_a; // f_a empty when the model has no abstract head
};

// Reverse pass. `upstream` is dL/dq when the forward ran the abstract
// head, otherwise dL/dP. `l2_effect_factor` folds the gradient of
// factor * sum(E^2) into the relational weights.
InGradients in_backward(const InModel& m, const GraphInput& g, const InForward& fwd,
                        const Matrix& upstream, double l2_effect_factor = 0.0);

} // namespace inphys
