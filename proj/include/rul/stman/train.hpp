#pragma once

#include <functional>
#include <span>

#include "rul/data/windows.hpp"
#include "rul/stman/loss.hpp"
#include "rul/stman/model.hpp"
#include "rul/tensor/trainer.hpp"

namespace rul::stman {

struct RulTrainOptions {
    TrainOptions train;
    double mape_floor = kMapeFloor;
};

/// Fits on windows carrying rul_label (post-FPC windows of training cells).
/// Early stopping tracks validation MAE when `val` is non-empty.
/// Throws TrainingError when there are no labeled windows.
TrainHistory train_rul(StManModel& model, std::span<const data::WindowSample> train,
                       std::span<const data::WindowSample> val, const RulTrainOptions& options,
                       const std::function<void(const EpochStats&)>& on_epoch = {});

/// Remaining cycles implied by an RUL fraction at cycle j for a cell whose
/// FPC is `fpc`: y (j - fpc) / (1 - y). Inverse of the RUL label.
/// Requires j > fpc and 0 <= y < 1.
double rul_to_cycles(double rul_pct, int cycle, int fpc);

}  // namespace rul::stman
