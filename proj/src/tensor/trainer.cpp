#include "rul/tensor/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rul/error.hpp"

namespace rul {

nlohmann::json to_json(const TrainHistory& history) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : history.epochs) {
        epochs.push_back({{"epoch", e.epoch},
                          {"train_loss", e.train_loss},
                          {"val_loss", e.val_loss ? nlohmann::json(*e.val_loss) : nlohmann::json()}});
    }
    return {{"epochs", epochs}, {"best_epoch", history.best_epoch}, {"early_stopped", history.early_stopped}};
}

EpochPlan shuffled_plan(std::size_t n) {
    return [n](std::size_t, std::mt19937_64& rng) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        return order;
    };
}

namespace {

std::vector<std::vector<double>> snapshot(const ParameterList& params) {
    std::vector<std::vector<double>> out;
    out.reserve(params.size());
    for (const auto& p : params) out.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
    return out;
}

void restore(const ParameterList& params, const std::vector<std::vector<double>>& values) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto t = params[i].tensor;
        std::copy(values[i].begin(), values[i].end(), t.mutable_data().begin());
    }
}

}  // namespace

TrainHistory fit(const ParameterList& params, const EpochPlan& plan, const BatchLoss& batch_loss,
                 const Validator& validator, const TrainOptions& options,
                 const std::function<void(const EpochStats&)>& on_epoch) {
    if (options.batch_size == 0) throw TrainingError("batch size must be positive");
    std::mt19937_64 rng(options.seed);
    Adam adam(options.adam);
    TrainHistory history;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best_weights;
    std::size_t since_best = 0;

    for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
        const auto order = plan(epoch, rng);
        if (order.empty()) throw TrainingError("epoch plan produced no samples");
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
            const std::size_t len = std::min(options.batch_size, order.size() - start);
            std::span<const std::size_t> batch(order.data() + start, len);
            zero_grad(params);
            auto loss = batch_loss(batch);
            const double value = loss.item();
            if (!std::isfinite(value)) {
                throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch));
            }
            backward(loss);
            adam.step(params);
            total += value * static_cast<double>(len);
        }

        EpochStats stats{epoch, total / static_cast<double>(order.size()), std::nullopt};
        if (validator) {
            const double val = validator();
            stats.val_loss = val;
            if (val < best_val) {
                best_val = val;
                best_weights = snapshot(params);
                history.best_epoch = epoch;
                since_best = 0;
            } else {
                ++since_best;
            }
        } else {
            history.best_epoch = epoch;
        }
        history.epochs.push_back(stats);
        if (on_epoch) on_epoch(stats);
        if (validator && since_best >= options.patience) {
            history.early_stopped = epoch < options.epochs;
            break;
        }
    }
    if (validator && !best_weights.empty()) restore(params, best_weights);
    zero_grad(params);
    return history;
}

}  // namespace rul
