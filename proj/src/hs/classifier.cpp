#include "rul/hs/classifier.hpp"

#include <algorithm>

#include "rul/error.hpp"
#include "rul/tensor/checkpoint.hpp"
#include "rul/tensor/ops.hpp"
#include "rul/window_batch.hpp"

namespace rul::hs {

namespace {
constexpr const char* kKind = "hs-classifier";
constexpr double kProbEps = 1e-7;
}  // namespace

nlohmann::json HsConfig::to_json() const {
    return {{"n_features", n_features},
            {"n_window", n_window},
            {"hidden", hidden},
            {"modules", modules},
            {"layers_per_module", layers_per_module}};
}

HsConfig HsConfig::from_json(const nlohmann::json& j) {
    HsConfig c;
    c.n_features = j.value("n_features", c.n_features);
    c.n_window = j.value("n_window", c.n_window);
    c.hidden = j.value("hidden", c.hidden);
    c.modules = j.value("modules", c.modules);
    c.layers_per_module = j.value("layers_per_module", c.layers_per_module);
    return c;
}

HsClassifier::HsClassifier(const HsConfig& config, std::uint64_t seed) : config_(config) {
    if (config.n_features == 0 || config.n_window == 0 || config.hidden == 0 || config.modules == 0 ||
        config.layers_per_module == 0) {
        throw UsageError("hs classifier: every size in the config must be positive");
    }
    nn::Rng rng(seed);
    for (std::size_t m = 0; m < config.modules; ++m) {
        lstms_.emplace_back(m == 0 ? config.n_features : config.hidden, config.hidden, config.layers_per_module, rng);
    }
    head_ = nn::Linear(config.hidden, 1, rng);
}

Tensor HsClassifier::forward(const Tensor& x) const {
    if (x.rank() != 3 || x.dim(0) != config_.n_window || x.dim(2) != config_.n_features) {
        throw ShapeError("hs_forward: input " + shape_str(x.shape()) + " does not match [" +
                         std::to_string(config_.n_window) + ", B, " + std::to_string(config_.n_features) + "]");
    }
    Tensor h = x;
    for (const auto& lstm : lstms_) h = lstm.forward(h);
    const std::size_t batch = x.dim(1);
    auto last = ops::reshape(ops::slice(h, 0, config_.n_window - 1, 1), {batch, config_.hidden});
    return ops::reshape(ops::sigmoid(head_.forward(last)), {batch});
}

std::vector<double> HsClassifier::predict(std::span<const data::WindowSample> windows, std::size_t batch) const {
    NoGradGuard guard;
    std::vector<double> out;
    out.reserve(windows.size());
    const auto all = iota_indices(windows.size());
    for (std::size_t start = 0; start < windows.size(); start += batch) {
        const std::size_t len = std::min(batch, windows.size() - start);
        auto x = time_major_batch(windows, std::span(all).subspan(start, len), config_.n_features, config_.n_window);
        auto p = forward(x);
        out.insert(out.end(), p.data().begin(), p.data().end());
    }
    return out;
}

ParameterList HsClassifier::parameters() const {
    ParameterList out;
    for (std::size_t m = 0; m < lstms_.size(); ++m) lstms_[m].collect(out, "hs.lstm" + std::to_string(m));
    head_.collect(out, "hs.head");
    return out;
}

void HsClassifier::save(const std::filesystem::path& path) const {
    write_checkpoint(path, {kKind, config_.to_json(), norm.to_json(), params_to_json(parameters())});
}

HsClassifier HsClassifier::load(const std::filesystem::path& path) {
    auto ckpt = read_checkpoint(path);
    if (ckpt.kind != kKind) {
        throw DataError(path.string() + ": checkpoint kind '" + ckpt.kind + "', expected '" + kKind + "'");
    }
    HsClassifier model(HsConfig::from_json(ckpt.config), 0);
    params_from_json(ckpt.params, model.parameters());
    if (!ckpt.norm.is_null()) model.norm = data::NormStats::from_json(ckpt.norm);
    return model;
}

Tensor bce_loss(const Tensor& pred, const Tensor& labels) {
    if (pred.shape() != labels.shape()) {
        throw ShapeError("bce_loss: pred " + shape_str(pred.shape()) + " vs labels " + shape_str(labels.shape()));
    }
    auto p = ops::clamp(pred, kProbEps, 1.0 - kProbEps);
    auto pos = ops::mul(labels, ops::log(p));
    auto neg = ops::mul(ops::add_scalar(ops::neg(labels), 1.0), ops::log(ops::add_scalar(ops::neg(p), 1.0)));
    return ops::neg(ops::mean(ops::add(pos, neg)));
}

}  // namespace rul::hs
