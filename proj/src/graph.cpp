#include "inphys/graph.hpp"

#include <string>

namespace inphys {

void GraphInput::validate() const {
    if (o.rows != kStateRows)
        throw shape_error("graph: O must have " + std::to_string(kStateRows) +
                          " rows, got " + shape_str(o));
    if (x.rows != kExternalRows || x.cols != o.cols)
        throw shape_error("graph: X must be " + std::to_string(kExternalRows) + "x" +
                          std::to_string(o.cols) + ", got " + shape_str(x));
    if (r_a.rows != kRelationRows)
        throw shape_error("graph: R_a must have " + std::to_string(kRelationRows) +
                          " rows, got " + shape_str(r_a));
    if (r_r.n_rows != o.cols || r_s.n_rows != o.cols)
        throw shape_error("graph: incidence row count must equal object count");
    if (r_r.n_cols() != r_a.cols || r_s.n_cols() != r_a.cols)
        throw shape_error("graph: incidence column count must equal relation count");
    r_r.validate();
    r_s.validate();
    for (int k = 0; k < r_a.cols; ++k)
        if (r_r.index[static_cast<std::size_t>(k)] == r_s.index[static_cast<std::size_t>(k)])
            throw shape_error("graph: relation " + std::to_string(k) +
                              " has identical sender and receiver");
}

GraphInput scene_to_graph(const Scene& scene) {
    GraphInput g;
    int n = scene.n();
    g.o = Matrix(kStateRows, n);
    g.x = Matrix(kExternalRows, n);
    for (int j = 0; j < n; ++j) {
        const Entity& e = scene.entities[static_cast<std::size_t>(j)];
        g.o(kRowX, j) = e.pos.x;
        g.o(kRowY, j) = e.pos.y;
        g.o(kRowVx, j) = e.vel.x;
        g.o(kRowVy, j) = e.vel.y;
        g.o(kRowInvMass, j) = e.inverse_mass;
        g.o(kRowShape, j) = static_cast<double>(e.shape.kind);
        g.o(kRowSizeA, j) = e.shape.a;
        g.o(kRowSizeB, j) = e.shape.b;
        if (!e.is_static()) {
            g.x(0, j) = scene.gravity.x;
            g.x(1, j) = scene.gravity.y;
        }
    }

    int nr = static_cast<int>(scene.relations.size());
    g.r_a = Matrix(kRelationRows, nr);
    g.r_r.n_rows = n;
    g.r_s.n_rows = n;
    g.r_r.index.reserve(static_cast<std::size_t>(nr));
    g.r_s.index.reserve(static_cast<std::size_t>(nr));
    for (int k = 0; k < nr; ++k) {
        const RelationSpec& rel = scene.relations[static_cast<std::size_t>(k)];
        g.r_r.index.push_back(rel.receiver);
        g.r_s.index.push_back(rel.sender);
        switch (rel.kind) {
            case RelationKind::gravity: g.r_a(kRaGravity, k) = 1.0; break;
            case RelationKind::spring: g.r_a(kRaSpring, k) = 1.0; break;
            case RelationKind::collision: g.r_a(kRaCollision, k) = 1.0; break;
        }
        g.r_a(kRaSpringConst, k) = rel.spring_constant;
        g.r_a(kRaRestLength, k) = rel.rest_length;
        g.r_a(kRaRestitution, k) = rel.restitution;
    }
    g.validate();
    return g;
}

void apply_graph_state(const Matrix& o, Scene& scene) {
    if (o.rows != kStateRows || o.cols != scene.n())
        throw shape_error("apply_graph_state: state is " + shape_str(o) +
                          ", scene has " + std::to_string(scene.n()) + " entities");
    for (int j = 0; j < o.cols; ++j) {
        Entity& e = scene.entities[static_cast<std::size_t>(j)];
        e.pos = {o(kRowX, j), o(kRowY, j)};
        e.vel = {o(kRowVx, j), o(kRowVy, j)};
    }
}

GraphInput concat_graphs(std::span<const GraphInput* const> parts) {
    if (parts.empty()) throw shape_error("concat_graphs: no parts");
    GraphInput out;
    std::vector<const Matrix*> os, xs, ras;
    int objects = 0;
    for (const GraphInput* p : parts) {
        os.push_back(&p->o);
        xs.push_back(&p->x);
        ras.push_back(&p->r_a);
    }
    out.o = hconcat(os);
    out.x = hconcat(xs);
    out.r_a = hconcat(ras);
    out.r_r.n_rows = out.o.cols;
    out.r_s.n_rows = out.o.cols;
    for (const GraphInput* p : parts) {
        for (int idx : p->r_r.index) out.r_r.index.push_back(idx + objects);
        for (int idx : p->r_s.index) out.r_s.index.push_back(idx + objects);
        objects += p->n_objects();
    }
    out.validate();
    return out;
}

} // namespace inphys
