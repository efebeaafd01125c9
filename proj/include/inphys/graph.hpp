#pragma once

#include <span>

#include "inphys/engine.hpp"
#include "inphys/matrix.hpp"

namespace inphys {

// Object state rows (O matrix). The first kDynamicRows are the dynamic
// state; the rest are static attributes.
inline constexpr int kRowX = 0;
inline constexpr int kRowY = 1;
inline constexpr int kRowVx = 2;
inline constexpr int kRowVy = 3;
inline constexpr int kRowInvMass = 4;
inline constexpr int kRowShape = 5; // 0 point, 1 circle, 2 rectangle
inline constexpr int kRowSizeA = 6;
inline constexpr int kRowSizeB = 7;
inline constexpr int kStateRows = 8;
inline constexpr int kDynamicRows = 4;

// Relation attribute rows (R_a matrix): kind one-hot, then parameters.
inline constexpr int kRaGravity = 0;
inline constexpr int kRaSpring = 1;
inline constexpr int kRaCollision = 2;
inline constexpr int kRaSpringConst = 3;
inline constexpr int kRaRestLength = 4;
inline constexpr int kRaRestitution = 5;
inline constexpr int kRelationRows = 6;

// External effect rows (X matrix): gravity acceleration, zero for statics.
inline constexpr int kExternalRows = 2;

// Matrix form of an interaction graph: objects as columns of O and X,
// relations as columns of R_a with one-hot receiver/sender incidence.
struct GraphInput {
    Matrix o;          // kStateRows x N_O
    OneHotColumns r_r; // receiver incidence, N_O rows x N_R columns
    OneHotColumns r_s; // sender incidence
    Matrix r_a;        // kRelationRows x N_R
    Matrix x;          // kExternalRows x N_O

    int n_objects() const { return o.cols; }
    int n_relations() const { return r_a.cols; }
    void validate() const;
};

GraphInput scene_to_graph(const Scene& scene);

// Copies positions and velocities from graph state rows back into the
// scene's entities. Static attributes are left alone.
void apply_graph_state(const Matrix& o, Scene& scene);

// Concatenates independent graphs into one larger graph (block-diagonal
// incidence): object and relation columns are appended with shifted
// indices. Used to batch training samples that share no relations.
GraphInput concat_graphs(std::span<const GraphInput* const> parts);

} // namespace inphys
