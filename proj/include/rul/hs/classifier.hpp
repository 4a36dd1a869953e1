#pragma once

// Stage 1: health-state classifier. Two LSTM modules of four layers each
// run one after the other over the window; the last hidden state goes
// through a linear layer and a sigmoid to give P(unhealthy).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "rul/data/norm.hpp"
#include "rul/data/windows.hpp"
#include "rul/tensor/nn.hpp"
#include "rul/tensor/trainer.hpp"

namespace rul::hs {

struct HsConfig {
    std::size_t n_features = 7;
    std::size_t n_window = 50;
    std::size_t hidden = 32;
    std::size_t modules = 2;
    std::size_t layers_per_module = 4;

    nlohmann::json to_json() const;
    static HsConfig from_json(const nlohmann::json& j);
};

class HsClassifier {
public:
    HsClassifier(const HsConfig& config, std::uint64_t seed);

    const HsConfig& config() const { return config_; }

    /// x is time-major [n_w, B, n_f]; returns probabilities [B].
    Tensor forward(const Tensor& x) const;

    /// P(unhealthy) for each window, batched, without recording a graph.
    /// Windows must already be normalized.
    std::vector<double> predict(std::span<const data::WindowSample> windows, std::size_t batch = 256) const;

    ParameterList parameters() const;

    data::NormStats norm;  // stats the inputs were normalized with

    void save(const std::filesystem::path& path) const;
    static HsClassifier load(const std::filesystem::path& path);

private:
    HsConfig config_;
    std::vector<nn::Lstm> lstms_;
    nn::Linear head_;
};

/// Mean binary cross-entropy, pred clamped to [1e-7, 1 - 1e-7].
Tensor bce_loss(const Tensor& pred, const Tensor& labels);

struct HsTrainOptions {
    TrainOptions train;
    /// Resample each epoch so healthy and unhealthy windows are drawn equally often.
    bool balance_classes = true;
};

/// Fits on windows carrying hs_label; `val` may be empty (no early stopping).
/// Throws TrainingError on an empty or single-class training set.
TrainHistory train_hs(HsClassifier& model, std::span<const data::WindowSample> train,
                      std::span<const data::WindowSample> val, const HsTrainOptions& options,
                      const std::function<void(const EpochStats&)>& on_epoch = {});

/// Fraction of labeled windows classified correctly at the 0.5 cutoff.
double hs_accuracy(const HsClassifier& model, std::span<const data::WindowSample> windows);

}  // namespace rul::hs
