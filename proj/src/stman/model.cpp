#include "rul/stman/model.hpp"

#include <algorithm>
#include <cmath>

#include "rul/error.hpp"
#include "rul/tensor/checkpoint.hpp"
#include "rul/tensor/ops.hpp"
#include "rul/window_batch.hpp"

namespace rul::stman {

using namespace rul::ops;

namespace {
constexpr const char* kKind = "stman";
}

void StManConfig::validate() const {
    if (n_features == 0 || n_window == 0 || k == 0 || d_model == 0 || n_heads == 0 || d_fuse == 0 || d_h == 0) {
        throw UsageError("stman config: every size must be positive");
    }
    if (d_model % n_heads != 0) {
        throw UsageError("stman config: d_model (" + std::to_string(d_model) + ") must be divisible by n_heads (" +
                         std::to_string(n_heads) + ")");
    }
}

nlohmann::json StManConfig::to_json() const {
    return {{"n_features", n_features}, {"n_window", n_window}, {"k", k},    {"d_model", d_model},
            {"n_heads", n_heads},       {"d_fuse", d_fuse},     {"d_h", d_h}};
}

StManConfig StManConfig::from_json(const nlohmann::json& j) {
    StManConfig c;
    c.n_features = j.value("n_features", c.n_features);
    c.n_window = j.value("n_window", c.n_window);
    c.k = j.value("k", c.k);
    c.d_model = j.value("d_model", c.d_model);
    c.n_heads = j.value("n_heads", c.n_heads);
    c.d_fuse = j.value("d_fuse", c.d_fuse);
    c.d_h = j.value("d_h", c.d_h);
    c.validate();
    return c;
}

// ----------------------------------------------------------------------------

TransformerBlock::TransformerBlock(std::size_t d_model, std::size_t heads_, nn::Rng& rng)
    : ln1(d_model),
      ln2(d_model),
      wq(d_model, d_model, rng),
      wk(d_model, d_model, rng, false),
      wv(d_model, d_model, rng),
      wo(d_model, d_model, rng),
      ff1(d_model, 2 * d_model, rng),
      ff2(2 * d_model, d_model, rng),
      heads(heads_) {}

Tensor TransformerBlock::forward(const Tensor& tokens) const {
    const std::size_t groups = tokens.dim(0), n = tokens.dim(1), d = tokens.dim(2);
    const std::size_t dh = d / heads;
    auto split = [&](const Tensor& t) {
        return reshape(permute(reshape(t, {groups, n, heads, dh}), {0, 2, 1, 3}), {groups * heads, n, dh});
    };
    auto u = ln1.forward(tokens);
    auto q = split(wq.forward(u));
    auto k = split(wk.forward(u));
    auto v = split(wv.forward(u));
    auto weights = softmax(scale(matmul(q, transpose(k, 1, 2)), 1.0 / std::sqrt(static_cast<double>(dh))), 2);
    auto ctx = reshape(permute(reshape(matmul(weights, v), {groups, heads, n, dh}), {0, 2, 1, 3}), {groups, n, d});
    auto x1 = add(tokens, wo.forward(ctx));
    return add(x1, ff2.forward(gelu(ff1.forward(ln2.forward(x1)))));
}

void TransformerBlock::collect(ParameterList& out, const std::string& prefix) const {
    ln1.collect(out, prefix + ".ln1");
    wq.collect(out, prefix + ".wq");
    wk.collect(out, prefix + ".wk");
    wv.collect(out, prefix + ".wv");
    wo.collect(out, prefix + ".wo");
    ln2.collect(out, prefix + ".ln2");
    ff1.collect(out, prefix + ".ff1");
    ff2.collect(out, prefix + ".ff2");
}

// ----------------------------------------------------------------------------

StManModel::StManModel(const StManConfig& config, std::uint64_t seed) : config_(config) {
    config.validate();
    nn::Rng rng(seed);
    const std::size_t lifted = config.n_features * config.d_model;
    const double conv_bound = 1.0 / std::sqrt(static_cast<double>(config.k));
    conv_kernels = nn::uniform({lifted, config.k}, conv_bound, rng);
    conv_bias = nn::uniform({lifted, 1}, conv_bound, rng);
    block = TransformerBlock(config.d_model, config.n_heads, rng);
    fusion = nn::Linear(lifted, config.d_fuse, rng);
    lstm = nn::LstmLayer(config.d_fuse, config.d_h, rng);
    const double att_bound = 1.0 / std::sqrt(static_cast<double>(config.d_h));
    att_wq = nn::uniform({config.d_h, config.d_h}, att_bound, rng);
    att_wk = nn::uniform({config.d_h, config.d_h}, att_bound, rng);
    lambda = Tensor::zeros({1}, true);
    out = nn::Linear(config.d_h, 1, rng);
}

Tensor StManModel::encode(const Tensor& x) const {
    const auto& c = config_;
    if (x.rank() != 3 || x.dim(1) != c.n_features || x.dim(2) != c.n_window) {
        throw ShapeError("stman_forward: input " + shape_str(x.shape()) + " does not match [B, " +
                         std::to_string(c.n_features) + ", " + std::to_string(c.n_window) + "]");
    }
    const std::size_t batch = x.dim(0);
    auto lifted = add(conv1d_depthwise(x, conv_kernels), conv_bias);  // [B, n_f*d, n_w]
    auto tokens = reshape(permute(reshape(lifted, {batch, c.n_features, c.d_model, c.n_window}), {0, 3, 1, 2}),
                          {batch * c.n_window, c.n_features, c.d_model});
    auto mixed = block.forward(tokens);
    auto fused = fusion.forward(reshape(mixed, {batch, c.n_window, c.n_features * c.d_model}));
    auto hidden = lstm.forward(permute(fused, {1, 0, 2}));  // [n_w, B, d_h]
    return permute(hidden, {1, 0, 2});
}

Tensor StManModel::forward(const Tensor& x, Tensor* alpha) const {
    const auto& c = config_;
    auto hs = encode(x);
    const std::size_t batch = x.dim(0);
    auto last = slice(hs, 1, c.n_window - 1, 1);  // [B, 1, d_h]
    auto query = matmul(last, att_wq);
    auto keys = matmul(hs, att_wk);
    auto weights =
        softmax(scale(matmul(query, transpose(keys, 1, 2)), 1.0 / std::sqrt(static_cast<double>(c.d_h))), 2);
    if (alpha) *alpha = weights;
    auto context = matmul(weights, hs);  // [B, 1, d_h]
    auto z = add(last, mul(context, lambda));
    return reshape(sigmoid(out.forward(z)), {batch});
}

Tensor StManModel::forward_without_attention(const Tensor& x) const {
    auto hs = encode(x);
    auto last = slice(hs, 1, config_.n_window - 1, 1);
    return reshape(sigmoid(out.forward(last)), {x.dim(0)});
}

std::vector<double> StManModel::predict(std::span<const data::WindowSample> windows, std::size_t batch) const {
    NoGradGuard guard;
    std::vector<double> result;
    result.reserve(windows.size());
    const auto all = iota_indices(windows.size());
    for (std::size_t start = 0; start < windows.size(); start += batch) {
        const std::size_t len = std::min(batch, windows.size() - start);
        auto x =
            channel_major_batch(windows, std::span(all).subspan(start, len), config_.n_features, config_.n_window);
        auto y = forward(x);
        result.insert(result.end(), y.data().begin(), y.data().end());
    }
    return result;
}

ParameterList StManModel::parameters() const {
    ParameterList p;
    p.push_back({"stman.conv.kernels", conv_kernels});
    p.push_back({"stman.conv.bias", conv_bias});
    block.collect(p, "stman.block");
    fusion.collect(p, "stman.fusion");
    lstm.collect(p, "stman.lstm");
    p.push_back({"stman.attention.wq", att_wq});
    p.push_back({"stman.attention.wk", att_wk});
    p.push_back({"stman.lambda", lambda});
    out.collect(p, "stman.out");
    return p;
}

void StManModel::save(const std::filesystem::path& path) const {
    write_checkpoint(path, {kKind, config_.to_json(), norm.to_json(), params_to_json(parameters())});
}

StManModel StManModel::load(const std::filesystem::path& path) {
    auto ckpt = read_checkpoint(path);
    if (ckpt.kind != kKind) {
        throw DataError(path.string() + ": checkpoint kind '" + ckpt.kind + "', expected '" + kKind + "'");
    }
    StManModel model(StManConfig::from_json(ckpt.config), 0);
    params_from_json(ckpt.params, model.parameters());
    if (!ckpt.norm.is_null()) model.norm = data::NormStats::from_json(ckpt.norm);
    return model;
}

}  // namespace rul::stman
