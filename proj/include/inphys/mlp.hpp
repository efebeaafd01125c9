#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "inphys/matrix.hpp"
#include "inphys/rng.hpp"

namespace inphys {

// One dense layer: weights are (out x in), bias (out x 1).
struct MlpLayer {
    Matrix w;
    Matrix b;
};

// Multilayer perceptron with ReLU hidden activations and a linear
// output layer. The struct also doubles as the gradient carrier.
struct MlpParams {
    std::vector<MlpLayer> layers;

    int input_size() const { return layers.empty() ? 0 : layers.front().w.cols; }
    int output_size() const { return layers.empty() ? 0 : layers.back().w.rows; }
    std::size_t param_count() const;
    void validate() const;

    // Glorot-uniform weights, zero biases.
    static MlpParams create(int input, const std::vector<int>& hidden, int output,
                            Rng& rng);
    // Same layer shapes, all zeros. Used for gradient accumulators.
    static MlpParams zeros_like(const MlpParams& p);

    // Pointers to every parameter matrix in a fixed order (w0, b0, w1, ...).
    std::vector<Matrix*> param_list();
    std::vector<const Matrix*> param_list() const;
};

// Activations recorded by a forward pass, consumed by the backward pass.
struct MlpCache {
    std::vector<Matrix> inputs; // activation fed into each layer
    std::vector<Matrix> pre;    // pre-activation of each layer
    std::uint64_t relu_pattern = 0;
    int batch = 0;

    bool matches(const MlpParams& p) const;
};

// Mixes the sign pattern of hidden pre-activations into a running hash.
// Two evaluations share a hash iff every ReLU took the same branch, which
// is what the gradient checker needs to detect kink crossings.
std::uint64_t hash_sign_pattern(std::uint64_t h, const Matrix& pre);

// Input is (input_size x batch); returns (output_size x batch).
Matrix mlp_forward(const MlpParams& p, const Matrix& input, MlpCache* cache = nullptr);

struct MlpGradients {
    MlpParams layers; // dL/dW, dL/db with the same shapes as the parameters
    Matrix d_input;   // dL/d(input), (input_size x batch)
};

// `upstream` is dL/d(output), (output_size x batch).
MlpGradients mlp_backward(const MlpParams& p, const MlpCache& cache,
                          const Matrix& upstream);

// Mean squared error over all entries; gradient is 2 (pred - target) / count.
std::pair<double, Matrix> mse_loss(const Matrix& pred, const Matrix& target);

// L2 penalty: factor * sum of squared entries.
double l2_penalty(const Matrix& m, double factor);
// Accumulates the penalty gradient 2 * factor * m into grad.
void l2_penalty_grad(const Matrix& m, double factor, Matrix& grad);

} // namespace inphys
