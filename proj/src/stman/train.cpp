#include "rul/stman/train.hpp"

#include <cmath>

#include "rul/error.hpp"
#include "rul/window_batch.hpp"

namespace rul::stman {

TrainHistory train_rul(StManModel& model, std::span<const data::WindowSample> train,
                       std::span<const data::WindowSample> val, const RulTrainOptions& options,
                       const std::function<void(const EpochStats&)>& on_epoch) {
    if (train.empty()) throw TrainingError("train_rul: no post-FPC training windows");
    auto check_labels = [](std::span<const data::WindowSample> ws, const char* what) {
        for (const auto& w : ws) {
            if (!w.rul_label) {
                throw TrainingError(std::string("train_rul: ") + what + " window " + w.cell_id + "@" +
                                    std::to_string(w.end_cycle) + " has no RUL label");
            }
        }
    };
    check_labels(train, "training");
    check_labels(val, "validation");

    const auto& cfg = model.config();
    BatchLoss batch_loss = [&](std::span<const std::size_t> batch) {
        auto x = channel_major_batch(train, batch, cfg.n_features, cfg.n_window);
        std::vector<double> y;
        y.reserve(batch.size());
        for (auto i : batch) y.push_back(*train[i].rul_label);
        return rul_loss(model.forward(x), Tensor::from({batch.size()}, std::move(y)), options.mape_floor);
    };

    Validator validator;
    if (!val.empty()) {
        validator = [&model, val] {
            const auto preds = model.predict(val);
            double s = 0.0;
            for (std::size_t i = 0; i < val.size(); ++i) s += std::abs(preds[i] - *val[i].rul_label);
            return s / static_cast<double>(val.size());
        };
    }
    return fit(model.parameters(), shuffled_plan(train.size()), batch_loss, validator, options.train, on_epoch);
}

double rul_to_cycles(double rul_pct, int cycle, int fpc) {
    if (cycle <= fpc) {
        throw DataError("rul_to_cycles: cycle " + std::to_string(cycle) + " is not after the FPC " +
                        std::to_string(fpc));
    }
    if (!(rul_pct >= 0.0 && rul_pct < 1.0)) {
        throw DataError("rul_to_cycles: RUL fraction " + std::to_string(rul_pct) + " outside [0, 1)");
    }
    return rul_pct * static_cast<double>(cycle - fpc) / (1.0 - rul_pct);
}

}  // namespace rul::stman
