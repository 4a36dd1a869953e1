#include <algorithm>
#include <cmath>

#include "rul/error.hpp"
#include "rul/hs/classifier.hpp"
#include "rul/tensor/ops.hpp"
#include "rul/window_batch.hpp"

namespace rul::hs {

namespace {

struct ClassIndex {
    std::vector<std::size_t> healthy;
    std::vector<std::size_t> unhealthy;
};

ClassIndex index_labels(std::span<const data::WindowSample> windows, const char* what) {
    ClassIndex idx;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (!windows[i].hs_label) {
            throw TrainingError(std::string("train_hs: ") + what + " window " + windows[i].cell_id + "@" +
                                std::to_string(windows[i].end_cycle) + " has no health-state label");
        }
        (*windows[i].hs_label == 0 ? idx.healthy : idx.unhealthy).push_back(i);
    }
    return idx;
}

Tensor label_tensor(std::span<const data::WindowSample> windows, std::span<const std::size_t> idx) {
    std::vector<double> y;
    y.reserve(idx.size());
    for (auto i : idx) y.push_back(static_cast<double>(*windows[i].hs_label));
    return Tensor::from({idx.size()}, std::move(y));
}

/// Equal draws from both classes; each class is cycled in a fresh shuffle.
EpochPlan balanced_plan(ClassIndex idx) {
    return [idx = std::move(idx)](std::size_t, std::mt19937_64& rng) {
        const std::size_t total = idx.healthy.size() + idx.unhealthy.size();
        auto draw = [&](std::vector<std::size_t> pool, std::size_t count) {
            std::vector<std::size_t> out;
            out.reserve(count);
            while (out.size() < count) {
                std::shuffle(pool.begin(), pool.end(), rng);
                for (std::size_t k = 0; k < pool.size() && out.size() < count; ++k) out.push_back(pool[k]);
            }
            return out;
        };
        auto order = draw(idx.healthy, total / 2);
        auto tail = draw(idx.unhealthy, total - total / 2);
        order.insert(order.end(), tail.begin(), tail.end());
        std::shuffle(order.begin(), order.end(), rng);
        return order;
    };
}

}  // namespace

TrainHistory train_hs(HsClassifier& model, std::span<const data::WindowSample> train,
                      std::span<const data::WindowSample> val, const HsTrainOptions& options,
                      const std::function<void(const EpochStats&)>& on_epoch) {
    if (train.empty()) throw TrainingError("train_hs: no labeled training windows");
    auto idx = index_labels(train, "training");
    if (idx.healthy.empty() || idx.unhealthy.empty()) {
        throw TrainingError(std::string("train_hs: training windows are all ") +
                            (idx.healthy.empty() ? "unhealthy" : "healthy") + "; need both classes");
    }
    const auto& cfg = model.config();
    const auto params = model.parameters();

    BatchLoss batch_loss = [&](std::span<const std::size_t> batch) {
        auto x = time_major_batch(train, batch, cfg.n_features, cfg.n_window);
        return bce_loss(model.forward(x), label_tensor(train, batch));
    };

    Validator validator;
    if (!val.empty()) {
        auto vidx = index_labels(val, "validation");
        // Class-balanced BCE so the larger unhealthy tail does not dominate.
        validator = [&model, val, vidx] {
            const auto probs = model.predict(val);
            auto class_mean = [&](const std::vector<std::size_t>& ids, bool positive) {
                if (ids.empty()) return 0.0;
                double s = 0.0;
                for (auto i : ids) {
                    const double p = std::clamp(probs[i], 1e-7, 1.0 - 1e-7);
                    s -= positive ? std::log(p) : std::log(1.0 - p);
                }
                return s / static_cast<double>(ids.size());
            };
            const int classes = int(!vidx.healthy.empty()) + int(!vidx.unhealthy.empty());
            return (class_mean(vidx.healthy, false) + class_mean(vidx.unhealthy, true)) / classes;
        };
    }

    EpochPlan plan = options.balance_classes ? balanced_plan(std::move(idx)) : shuffled_plan(train.size());
    return fit(params, plan, batch_loss, validator, options.train, on_epoch);
}

double hs_accuracy(const HsClassifier& model, std::span<const data::WindowSample> windows) {
    if (windows.empty()) throw DataError("hs_accuracy: no windows");
    const auto probs = model.predict(windows);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (!windows[i].hs_label) throw DataError("hs_accuracy: unlabeled window");
        correct += (probs[i] >= 0.5 ? 1 : 0) == *windows[i].hs_label;
    }
    return static_cast<double>(correct) / static_cast<double>(windows.size());
}

}  // namespace rul::hs
