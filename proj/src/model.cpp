#include "inphys/model.hpp"

#include <string>

namespace inphys {

int InModel::marshal_width(MarshalMode mode) {
    switch (mode) {
        case MarshalMode::basic:
            return 2 * kStateRows + kRelationRows;
        case MarshalMode::position_invariant:
            return kDynamicRows + 2 * (kStateRows - kDynamicRows) + kRelationRows;
    }
    throw config_error("marshal_width: unknown mode");
}

int InModel::aggregate_width(AggregateMode mode, int d_e) {
    switch (mode) {
        case AggregateMode::full_state:
            return kStateRows + kExternalRows + d_e;
        case AggregateMode::velocity_only:
            return 2 + (kStateRows - kDynamicRows) + kExternalRows + d_e;
    }
    throw config_error("aggregate_width: unknown mode");
}

void InModel::validate() const {
    f_r.validate();
    f_o.validate();
    if (f_r.input_size() != marshal_width(marshal_mode))
        throw shape_error("model: f_R expects " + std::to_string(f_r.input_size()) +
                          " inputs, marshalling yields " +
                          std::to_string(marshal_width(marshal_mode)));
    if (f_o.input_size() != aggregate_width(aggregate_mode, d_e()))
        throw shape_error("model: f_O expects " + std::to_string(f_o.input_size()) +
                          " inputs, aggregation yields " +
                          std::to_string(aggregate_width(aggregate_mode, d_e())));
    if (f_a) {
        f_a->validate();
        if (f_a->input_size() != d_p())
            throw shape_error("model: f_A expects " + std::to_string(f_a->input_size()) +
                              " inputs, object pass yields " + std::to_string(d_p()));
    }
}

Matrix marshal_basic(const GraphInput& g) {
    g.validate();
    Matrix recv = gather_cols(g.o, g.r_r.index);
    Matrix send = gather_cols(g.o, g.r_s.index);
    return vconcat({&recv, &send, &g.r_a});
}

Matrix marshal_position_invariant(const GraphInput& g) {
    g.validate();
    Matrix recv = gather_cols(g.o, g.r_r.index);
    Matrix send = gather_cols(g.o, g.r_s.index);
    Matrix dyn_diff = sub(take_rows(recv, 0, kDynamicRows),
                          take_rows(send, 0, kDynamicRows));
    Matrix recv_static = take_rows(recv, kDynamicRows, kStateRows);
    Matrix send_static = take_rows(send, kDynamicRows, kStateRows);
    return vconcat({&dyn_diff, &recv_static, &send_static, &g.r_a});
}

Matrix marshal(const InModel& m, const GraphInput& g) {
    switch (m.marshal_mode) {
        case MarshalMode::basic: return marshal_basic(g);
        case MarshalMode::position_invariant: return marshal_position_invariant(g);
    }
    throw config_error("marshal: unknown mode");
}

Matrix relational_pass(const InModel& m, const Matrix& b, MlpCache* cache) {
    if (b.cols == 0) {
        if (cache) *cache = MlpCache{};
        return Matrix(m.d_e(), 0);
    }
    return mlp_forward(m.f_r, b, cache);
}

Matrix aggregate(const InModel& m, const GraphInput& g, const Matrix& effects) {
    if (effects.rows != m.d_e() || effects.cols != g.n_relations())
        throw shape_error("aggregate: effects are " + shape_str(effects) + ", want " +
                          std::to_string(m.d_e()) + "x" +
                          std::to_string(g.n_relations()));
    Matrix ebar(m.d_e(), g.n_objects());
    if (!m.effects_zeroed) scatter_add_cols(ebar, effects, g.r_r.index);
    switch (m.aggregate_mode) {
        case AggregateMode::full_state:
            return vconcat({&g.o, &g.x, &ebar});
        case AggregateMode::velocity_only: {
            Matrix vel = take_rows(g.o, kRowVx, kRowVy + 1);
            Matrix attrs = take_rows(g.o, kDynamicRows, kStateRows);
            return vconcat({&vel, &attrs, &g.x, &ebar});
        }
    }
    throw config_error("aggregate: unknown mode");
}

Matrix object_pass(const InModel& m, const Matrix& c, MlpCache* cache) {
    return mlp_forward(m.f_o, c, cache);
}

std::uint64_t InForward::pattern() const {
    std::uint64_t h = fr_cache.relu_pattern;
    h = splitmix64(h ^ fo_cache.relu_pattern);
    h = splitmix64(h ^ fa_cache.relu_pattern);
    return h;
}

InForward in_forward(const InModel& m, const GraphInput& g, bool with_abstract) {
    m.validate();
    g.validate();
    InForward fwd;
    fwd.with_abstract = with_abstract;
    if (m.effects_zeroed) {
        // Dynamics-only ablation: f_R never runs, effects are a 0-matrix.
        fwd.e = Matrix(m.d_e(), g.n_relations());
    } else {
        fwd.b = marshal(m, g);
        fwd.e = relational_pass(m, fwd.b, &fwd.fr_cache);
    }
    fwd.c = aggregate(m, g, fwd.e);
    fwd.p = object_pass(m, fwd.c, &fwd.fo_cache);
    if (with_abstract) {
        if (!m.f_a) throw config_error("in_forward: model has no abstract head");
        fwd.p_bar = col_sum(fwd.p);
        fwd.q = mlp_forward(*m.f_a, fwd.p_bar, &fwd.fa_cache);
    }
    return fwd;
}

Matrix predict(const InModel& m, const GraphInput& g) {
    return in_forward(m, g, false).p;
}

Matrix abstract_estimate(const InModel& m, const GraphInput& g) {
    if (!m.f_a) throw config_error("abstract_estimate: model has no abstract head");
    return in_forward(m, g, true).q;
}

InGradients in_backward(const InModel& m, const GraphInput& g, const InForward& fwd,
                        const Matrix& upstream, double l2_effect_factor) {
    m.validate();
    if (l2_effect_factor < 0.0)
        throw config_error("in_backward: negative effect penalty");

    InGradients grads;
    Matrix dp;
    if (fwd.with_abstract) {
        if (!m.f_a) throw config_error("in_backward: model has no abstract head");
        MlpGradients ga = mlp_backward(*m.f_a, fwd.fa_cache, upstream);
        grads.f_a = std::move(ga.layers);
        // P_bar = sum over columns of P: the adjoint broadcasts.
        dp = Matrix(fwd.p.rows, fwd.p.cols);
        for (int j = 0; j < dp.cols; ++j)
            for (int i = 0; i < dp.rows; ++i) dp(i, j) = ga.d_input(i, 0);
    } else {
        dp = upstream;
    }

    MlpGradients go = mlp_backward(m.f_o, fwd.fo_cache, dp);
    grads.f_o = std::move(go.layers);

    if (m.effects_zeroed || g.n_relations() == 0) {
        grads.f_r = MlpParams::zeros_like(m.f_r);
        return grads;
    }

    // Slice the effect rows out of dC; everything above them is graph
    // input with no parameters behind it.
    int e_start = go.d_input.rows - m.d_e();
    Matrix debar = take_rows(go.d_input, e_start, go.d_input.rows);
    Matrix de = gather_cols(debar, g.r_r.index);
    if (l2_effect_factor > 0.0) l2_penalty_grad(fwd.e, l2_effect_factor, de);
    MlpGradients gr = mlp_backward(m.f_r, fwd.fr_cache, de);
    grads.f_r = std::move(gr.layers);
    return grads;
}

} // namespace inphys
