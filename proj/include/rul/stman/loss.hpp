#pragma once

#include "rul/tensor/tensor.hpp"

namespace rul::stman {

inline constexpr double kMapeFloor = 1e-6;

/// L = MAE + RMSE + MAPE over the batch (all batch means). The MAPE term
/// divides by max(y, mape_floor) because the label reaches 0 at EOL.
/// preds and labels are [B]; throws on an empty batch or shape mismatch.
Tensor rul_loss(const Tensor& preds, const Tensor& labels, double mape_floor = kMapeFloor);

}  // namespace rul::stman
