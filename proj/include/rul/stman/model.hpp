#pragma once

// Stage 2: ST-MAN regressor. Per-window pipeline, x is [n_f, n_w]:
//   1. depthwise conv lifts each channel to d_model features over time
//   2. per time step, a pre-LN transformer block attends across the n_f
//      channel tokens (attention + GELU FFN x2, both residual)
//   3. a linear layer fuses the n_f * d_model features into d_fuse
//   4. an LSTM runs over the n_w fused steps
//   5. temporal attention, query from the last hidden state h_T:
//      alpha = softmax_t((h_T W_q) . (h_t W_k) / sqrt(d_h)), g = sum alpha_t h_t
//   6. z = h_T + lambda * g, lambda a trainable scalar starting at 0
//   7. output = sigmoid(z W_out + b_out), the RUL fraction in (0, 1)

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "rul/data/norm.hpp"
#include "rul/data/windows.hpp"
#include "rul/tensor/nn.hpp"

namespace rul::stman {

struct StManConfig {
    std::size_t n_features = 7;
    std::size_t n_window = 50;
    std::size_t k = 3;  // conv kernel size
    std::size_t d_model = 8;
    std::size_t n_heads = 2;
    std::size_t d_fuse = 16;
    std::size_t d_h = 32;

    /// Throws UsageError (zero sizes, d_model not divisible by n_heads).
    void validate() const;
    nlohmann::json to_json() const;
    static StManConfig from_json(const nlohmann::json& j);
};

struct TransformerBlock {
    nn::LayerNorm ln1, ln2;
    nn::Linear wq, wk, wv, wo;  // wk has no bias: it cancels in the softmax
    nn::Linear ff1, ff2;        // d_model -> 2 d_model -> d_model, GELU between
    std::size_t heads = 1;

    TransformerBlock() = default;
    TransformerBlock(std::size_t d_model, std::size_t heads, nn::Rng& rng);

    /// tokens [G, n_tokens, d_model] -> same shape.
    Tensor forward(const Tensor& tokens) const;
    void collect(ParameterList& out, const std::string& prefix) const;
};

class StManModel {
public:
    StManModel(const StManConfig& config, std::uint64_t seed);

    const StManConfig& config() const { return config_; }

    /// x is [B, n_f, n_w]; returns predictions [B]. When `alpha` is given it
    /// receives the temporal attention weights [B, 1, n_w].
    Tensor forward(const Tensor& x, Tensor* alpha = nullptr) const;

    /// Same network with the temporal-attention branch cut: sigmoid(FC(h_T)).
    Tensor forward_without_attention(const Tensor& x) const;

    /// Batched no-grad predictions for normalized windows.
    std::vector<double> predict(std::span<const data::WindowSample> windows, std::size_t batch = 256) const;

    ParameterList parameters() const;

    // Exposed for invariant tests and complexity accounting.
    Tensor conv_kernels;  // [n_f * d_model, k]
    Tensor conv_bias;     // [n_f * d_model, 1]
    TransformerBlock block;
    nn::Linear fusion;  // n_f * d_model -> d_fuse
    nn::LstmLayer lstm;
    Tensor att_wq;  // [d_h, d_h]
    Tensor att_wk;  // [d_h, d_h]
    Tensor lambda;  // [1]
    nn::Linear out;

    data::NormStats norm;

    void save(const std::filesystem::path& path) const;
    static StManModel load(const std::filesystem::path& path);

private:
    /// Stages 1-4: hidden states [B, n_w, d_h].
    Tensor encode(const Tensor& x) const;

    StManConfig config_;
};

}  // namespace rul::stman
