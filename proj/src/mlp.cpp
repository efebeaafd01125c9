#include "inphys/mlp.hpp"

#include <cmath>

namespace inphys {

std::size_t MlpParams::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

void MlpParams::validate() const {
    if (layers.empty()) throw config_error("mlp: needs at least one layer");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.w.rows <= 0 || l.w.cols <= 0)
            throw config_error("mlp: layer " + std::to_string(i) + " has empty weights");
        if (l.b.rows != l.w.rows || l.b.cols != 1)
            throw shape_error("mlp: layer " + std::to_string(i) + " bias is " +
                              shape_str(l.b) + ", want " + std::to_string(l.w.rows) + "x1");
        if (i > 0 && l.w.cols != layers[i - 1].w.rows)
            throw shape_error("mlp: layer " + std::to_string(i) +
                              " input width does not chain");
    }
}

MlpParams MlpParams::create(int input, const std::vector<int>& hidden, int output,
                            Rng& rng) {
    if (input <= 0 || output <= 0)
        throw config_error("mlp: input and output sizes must be positive");
    for (int h : hidden)
        if (h <= 0) throw config_error("mlp: hidden widths must be positive");

    std::vector<int> widths;
    widths.push_back(input);
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(output);

    MlpParams p;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        int fan_in = widths[i], fan_out = widths[i + 1];
        MlpLayer l;
        l.w = Matrix(fan_out, fan_in);
        double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& v : l.w.data) v = rng.uniform(-limit, limit);
        l.b = Matrix(fan_out, 1);
        p.layers.push_back(std::move(l));
    }
    return p;
}

MlpParams MlpParams::zeros_like(const MlpParams& p) {
    MlpParams z;
    for (const auto& l : p.layers)
        z.layers.push_back({Matrix(l.w.rows, l.w.cols), Matrix(l.b.rows, 1)});
    return z;
}

std::vector<Matrix*> MlpParams::param_list() {
    std::vector<Matrix*> out;
    for (auto& l : layers) {
        out.push_back(&l.w);
        out.push_back(&l.b);
    }
    return out;
}

std::vector<const Matrix*> MlpParams::param_list() const {
    std::vector<const Matrix*> out;
    for (const auto& l : layers) {
        out.push_back(&l.w);
        out.push_back(&l.b);
    }
    return out;
}

bool MlpCache::matches(const MlpParams& p) const {
    if (batch <= 0) return false;
    if (inputs.size() != p.layers.size() || pre.size() != p.layers.size()) return false;
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        if (inputs[i].rows != p.layers[i].w.cols || inputs[i].cols != batch) return false;
        if (pre[i].rows != p.layers[i].w.rows || pre[i].cols != batch) return false;
    }
    return true;
}

std::uint64_t hash_sign_pattern(std::uint64_t h, const Matrix& pre) {
    for (double v : pre.data) {
        h ^= v > 0.0 ? 0x9eull : 0x31ull;
        h *= 1099511628211ull; // FNV-1a prime
    }
    return h;
}

Matrix mlp_forward(const MlpParams& p, const Matrix& input, MlpCache* cache) {
    p.validate();
    if (input.rows != p.input_size())
        throw shape_error("mlp_forward: input is " + shape_str(input) + ", want " +
                          std::to_string(p.input_size()) + " rows");
    if (cache) {
        cache->inputs.clear();
        cache->pre.clear();
        cache->relu_pattern = 1469598103934665603ull; // FNV offset basis
        cache->batch = input.cols;
    }

    Matrix act = input;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        Matrix z = matmul(p.layers[l].w, act);
        add_col_in_place(z, p.layers[l].b);
        bool hidden = l + 1 < p.layers.size();
        if (cache) {
            cache->inputs.push_back(std::move(act));
            if (hidden) cache->relu_pattern = hash_sign_pattern(cache->relu_pattern, z);
            cache->pre.push_back(z); // keep a copy; `z` becomes the next activation
        }
        if (hidden)
            for (double& v : z.data) v = v > 0.0 ? v : 0.0;
        act = std::move(z);
    }
    INPHYS_CHECK_FINITE(act);
    return act;
}

MlpGradients mlp_backward(const MlpParams& p, const MlpCache& cache,
                          const Matrix& upstream) {
    p.validate();
    if (!cache.matches(p))
        throw contract_error("mlp_backward: cache is stale or from another network");
    if (upstream.rows != p.output_size() || upstream.cols != cache.batch)
        throw shape_error("mlp_backward: upstream is " + shape_str(upstream) +
                          ", want " + std::to_string(p.output_size()) + "x" +
                          std::to_string(cache.batch));

    MlpGradients g;
    g.layers = MlpParams::zeros_like(p);
    Matrix delta = upstream;
    for (int l = static_cast<int>(p.layers.size()) - 1; l >= 0; --l) {
        bool hidden = l + 1 < static_cast<int>(p.layers.size());
        if (hidden) {
            const Matrix& z = cache.pre[static_cast<std::size_t>(l)];
            for (std::size_t i = 0; i < delta.data.size(); ++i)
                if (!(z.data[i] > 0.0)) delta.data[i] = 0.0;
        }
        g.layers.layers[static_cast<std::size_t>(l)].w =
            matmul_abt(delta, cache.inputs[static_cast<std::size_t>(l)]);
        g.layers.layers[static_cast<std::size_t>(l)].b = col_sum(delta);
        delta = matmul_atb(p.layers[static_cast<std::size_t>(l)].w, delta);
    }
    g.d_input = std::move(delta);
    return g;
}

std::pair<double, Matrix> mse_loss(const Matrix& pred, const Matrix& target) {
    if (!pred.same_shape(target))
        throw shape_error("mse_loss: prediction " + shape_str(pred) +
                          " vs target " + shape_str(target));
    if (pred.size() == 0) throw data_error("mse_loss: empty matrices");
    double count = static_cast<double>(pred.size());
    Matrix grad(pred.rows, pred.cols);
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        double d = pred.data[i] - target.data[i];
        loss += d * d;
        grad.data[i] = 2.0 * d / count;
    }
    return {loss / count, std::move(grad)};
}

double l2_penalty(const Matrix& m, double factor) {
    if (factor < 0.0) throw config_error("l2_penalty: negative factor");
    return factor * sum_squares(m);
}

void l2_penalty_grad(const Matrix& m, double factor, Matrix& grad) {
    if (factor < 0.0) throw config_error("l2_penalty: negative factor");
    add_scaled_in_place(grad, m, 2.0 * factor);
}

} // namespace inphys
