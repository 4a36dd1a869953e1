#include "rul/tensor/nn.hpp"

#include <cmath>

#include "rul/error.hpp"
#include "rul/tensor/ops.hpp"

namespace rul::nn {

Tensor uniform(Shape shape, double bound, Rng& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> values(numel_of(shape));
    for (auto& v : values) v = dist(rng);
    return Tensor::from(std::move(shape), std::move(values), true);
}

// ----------------------------------------------------------------------------

Linear::Linear(std::size_t in, std::size_t out, Rng& rng, bool with_bias) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    weight = uniform({in, out}, bound, rng);
    if (with_bias) bias = uniform({out}, bound, rng);
}

Tensor Linear::forward(const Tensor& x) const {
    auto y = ops::matmul(x, weight);
    return bias.defined() ? ops::add(y, bias) : y;
}

void Linear::collect(ParameterList& out, const std::string& prefix) const {
    out.push_back({prefix + ".weight", weight});
    if (bias.defined()) out.push_back({prefix + ".bias", bias});
}

// ----------------------------------------------------------------------------

LayerNorm::LayerNorm(std::size_t features)
    : gamma(Tensor::full({features}, 1.0, true)), beta(Tensor::zeros({features}, true)) {}

Tensor LayerNorm::forward(const Tensor& x) const {
    const std::size_t last = x.rank() - 1;
    auto centered = ops::sub(x, ops::mean(x, last, true));
    auto var = ops::mean(ops::square(centered), last, true);
    auto normed = ops::div(centered, ops::sqrt(ops::add_scalar(var, eps)));
    return ops::add(ops::mul(normed, gamma), beta);
}

void LayerNorm::collect(ParameterList& out, const std::string& prefix) const {
    out.push_back({prefix + ".gamma", gamma});
    out.push_back({prefix + ".beta", beta});
}

// ----------------------------------------------------------------------------

LstmState lstm_cell(const Tensor& input_gates, const LstmState& prev, const Tensor& w_hh) {
    const std::size_t hidden = w_hh.dim(0);
    if (input_gates.rank() != 2 || input_gates.dim(1) != 4 * hidden) {
        throw ShapeError("lstm_cell: gate pre-activations " + shape_str(input_gates.shape()) +
                         " do not match recurrent weights " + shape_str(w_hh.shape()));
    }
    const bool zero_state = !prev.h.defined();
    auto gates = zero_state ? input_gates : ops::add(input_gates, ops::matmul(prev.h, w_hh));
    auto i = ops::sigmoid(ops::slice(gates, 1, 0, hidden));
    auto f = ops::sigmoid(ops::slice(gates, 1, hidden, hidden));
    auto g = ops::tanh(ops::slice(gates, 1, 2 * hidden, hidden));
    auto o = ops::sigmoid(ops::slice(gates, 1, 3 * hidden, hidden));
    auto c = zero_state ? ops::mul(i, g) : ops::add(ops::mul(f, prev.c), ops::mul(i, g));
    auto h = ops::mul(o, ops::tanh(c));
    return {h, c};
}

LstmLayer::LstmLayer(std::size_t in, std::size_t hidden, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    w_ih = uniform({in, 4 * hidden}, bound, rng);
    w_hh = uniform({hidden, 4 * hidden}, bound, rng);
    bias = uniform({4 * hidden}, bound, rng);
    // Forget-gate bias starts at 1 so early gradients flow through the cell state.
    auto b = bias.mutable_data();
    for (std::size_t j = hidden; j < 2 * hidden; ++j) b[j] += 1.0;
}

Tensor LstmLayer::forward(const Tensor& x) const {
    if (x.rank() != 3 || x.dim(2) != w_ih.dim(0)) {
        throw ShapeError("lstm: input " + shape_str(x.shape()) + " incompatible with w_ih " + shape_str(w_ih.shape()));
    }
    return ops::lstm_recurrence(ops::add(ops::matmul(x, w_ih), bias), w_hh);
}

void LstmLayer::collect(ParameterList& out, const std::string& prefix) const {
    out.push_back({prefix + ".w_ih", w_ih});
    out.push_back({prefix + ".w_hh", w_hh});
    out.push_back({prefix + ".bias", bias});
}

Lstm::Lstm(std::size_t in, std::size_t hidden, std::size_t num_layers, Rng& rng) {
    for (std::size_t l = 0; l < num_layers; ++l) layers.emplace_back(l == 0 ? in : hidden, hidden, rng);
}

Tensor Lstm::forward(const Tensor& x) const {
    Tensor y = x;
    for (const auto& layer : layers) y = layer.forward(y);
    return y;
}

void Lstm::collect(ParameterList& out, const std::string& prefix) const {
    for (std::size_t l = 0; l < layers.size(); ++l) layers[l].collect(out, prefix + ".layer" + std::to_string(l));
}

}  // namespace rul::nn
