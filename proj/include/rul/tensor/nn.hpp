#pragma once

// Layers shared by the Stage-1 classifier and ST-MAN. Weights are stored
// [in, out] so a layer is x @ W + b on the last axis.

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "rul/tensor/tensor.hpp"

namespace rul::nn {

using Rng = std::mt19937_64;

/// Leaf parameter with values drawn from U(-bound, bound).
Tensor uniform(Shape shape, double bound, Rng& rng);

struct Linear {
    Tensor weight;  // [in, out]
    Tensor bias;    // [out], undefined when constructed without bias

    Linear() = default;
    Linear(std::size_t in, std::size_t out, Rng& rng, bool with_bias = true);

    std::size_t in_features() const { return weight.dim(0); }
    std::size_t out_features() const { return weight.dim(1); }
    Tensor forward(const Tensor& x) const;
    void collect(ParameterList& out, const std::string& prefix) const;
};

/// Normalizes over the last axis, then applies a learned affine map.
struct LayerNorm {
    Tensor gamma;
    Tensor beta;
    double eps = 1e-5;

    LayerNorm() = default;
    explicit LayerNorm(std::size_t features);

    Tensor forward(const Tensor& x) const;
    void collect(ParameterList& out, const std::string& prefix) const;
};

struct LstmState {
    Tensor h;  // [B, hidden]
    Tensor c;  // [B, hidden]
};

/// One LSTM cell update from precomputed input-side gate pre-activations
/// (x W_ih + b, shape [B, 4*hidden], gate order i, f, g, o). An undefined
/// `prev.h` means a zero initial state.
LstmState lstm_cell(const Tensor& input_gates, const LstmState& prev, const Tensor& w_hh);

struct LstmLayer {
    Tensor w_ih;  // [in, 4h]
    Tensor w_hh;  // [h, 4h]
    Tensor bias;  // [4h]

    LstmLayer() = default;
    LstmLayer(std::size_t in, std::size_t hidden, Rng& rng);

    std::size_t hidden() const { return w_hh.dim(0); }
    /// x is time-major [T, B, in]; returns every hidden state, [T, B, hidden].
    Tensor forward(const Tensor& x) const;
    void collect(ParameterList& out, const std::string& prefix) const;
};

struct Lstm {
    std::vector<LstmLayer> layers;

    Lstm() = default;
    Lstm(std::size_t in, std::size_t hidden, std::size_t num_layers, Rng& rng);

    Tensor forward(const Tensor& x) const;
    void collect(ParameterList& out, const std::string& prefix) const;
};

/// Parameter count of an LSTM layer (single bias vector).
constexpr std::size_t lstm_layer_params(std::size_t in, std::size_t hidden) {
    return 4 * hidden * (in + hidden) + 4 * hidden;
}

}  // namespace rul::nn
