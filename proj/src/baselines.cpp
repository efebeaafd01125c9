#include "inphys/baselines.hpp"

#include <string>

namespace inphys {

Matrix constant_velocity_prediction(const GraphInput& g) {
    g.validate();
    return take_rows(g.o, kRowVx, kRowVy + 1);
}

Matrix flatten_graph(const GraphInput& g) {
    g.validate();
    Matrix out(kStateRows * g.n_objects() + kExternalRows * g.n_objects() +
                   kRelationRows * g.n_relations(),
               1);
    int at = 0;
    for (int j = 0; j < g.o.cols; ++j)
        for (int i = 0; i < g.o.rows; ++i) out(at++, 0) = g.o(i, j);
    for (int j = 0; j < g.x.cols; ++j)
        for (int i = 0; i < g.x.rows; ++i) out(at++, 0) = g.x(i, j);
    for (int j = 0; j < g.r_a.cols; ++j)
        for (int i = 0; i < g.r_a.rows; ++i) out(at++, 0) = g.r_a(i, j);
    return out;
}

MlpBaseline MlpBaseline::create(int n_objects, int n_relations, int out_rows,
                                int out_cols, const std::vector<int>& hidden,
                                Rng& rng) {
    if (n_objects <= 0 || n_relations < 0)
        throw config_error("mlp baseline: bad graph size");
    if (out_rows <= 0 || out_cols <= 0)
        throw config_error("mlp baseline: bad output shape");
    MlpBaseline m;
    m.n_objects = n_objects;
    m.n_relations = n_relations;
    m.out_rows = out_rows;
    m.out_cols = out_cols;
    int input = (kStateRows + kExternalRows) * n_objects + kRelationRows * n_relations;
    m.net = MlpParams::create(input, hidden, out_rows * out_cols, rng);
    return m;
}

void MlpBaseline::validate() const {
    net.validate();
    if (net.output_size() != out_rows * out_cols)
        throw shape_error("mlp baseline: network output does not match out shape");
}

Matrix mlp_baseline_predict(const MlpBaseline& m, const GraphInput& g,
                            MlpCache* cache) {
    m.validate();
    if (g.n_objects() != m.n_objects || g.n_relations() != m.n_relations)
        throw artifact_error("mlp baseline: trained for " +
                             std::to_string(m.n_objects) + " objects / " +
                             std::to_string(m.n_relations) + " relations, graph has " +
                             std::to_string(g.n_objects()) + " / " +
                             std::to_string(g.n_relations()));
    Matrix y = mlp_forward(m.net, flatten_graph(g), cache);
    return unflatten_output(y, m.out_rows, m.out_cols);
}

Matrix unflatten_output(const Matrix& column, int out_rows, int out_cols) {
    if (column.cols != 1 || column.rows != out_rows * out_cols)
        throw shape_error("unflatten_output: column is " + shape_str(column) +
                          ", want " + std::to_string(out_rows * out_cols) + "x1");
    Matrix out(out_rows, out_cols);
    for (int j = 0; j < out_cols; ++j)
        for (int i = 0; i < out_rows; ++i) out(i, j) = column(j * out_rows + i, 0);
    return out;
}

} // namespace inphys
