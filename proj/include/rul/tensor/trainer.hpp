#pragma once

// Mini-batch training loop with Adam and patience-based early stopping.
// Shared by the Stage-1 classifier and the ST-MAN regressor.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "rul/tensor/adam.hpp"
#include "rul/tensor/tensor.hpp"

namespace rul {

struct TrainOptions {
    std::size_t epochs = 100;
    std::size_t batch_size = 8;
    std::size_t patience = 20;
    AdamConfig adam;
    std::uint64_t seed = 0;
};

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    std::optional<double> val_loss;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;  // epoch whose weights were kept
    bool early_stopped = false;
};

nlohmann::json to_json(const TrainHistory& history);

/// Sample order for one epoch; may subsample or repeat indices.
using EpochPlan = std::function<std::vector<std::size_t>(std::size_t epoch, std::mt19937_64& rng)>;
/// Mean loss over the given samples, with graph attached.
using BatchLoss = std::function<Tensor(std::span<const std::size_t> batch)>;
/// Validation loss evaluated without recording a graph.
using Validator = std::function<double()>;

/// Plan that visits every index in [0, n) once per epoch in shuffled order.
EpochPlan shuffled_plan(std::size_t n);

/// Runs the loop. With a validator, the weights of the best validation epoch
/// are restored on exit and training stops after `patience` epochs without
/// improvement. Throws TrainingError on a non-finite loss.
TrainHistory fit(const ParameterList& params, const EpochPlan& plan, const BatchLoss& batch_loss,
                 const Validator& validator, const TrainOptions& options,
                 const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace rul
