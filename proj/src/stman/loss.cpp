#include "rul/stman/loss.hpp"

#include "rul/error.hpp"
#include "rul/tensor/ops.hpp"

namespace rul::stman {

Tensor rul_loss(const Tensor& preds, const Tensor& labels, double mape_floor) {
    if (preds.numel() == 0) throw TrainingError("rul_loss: empty batch");
    if (preds.shape() != labels.shape()) {
        throw ShapeError("rul_loss: preds " + shape_str(preds.shape()) + " vs labels " + shape_str(labels.shape()));
    }
    std::vector<double> denom(labels.data().begin(), labels.data().end());
    for (auto& v : denom) v = std::max(v, mape_floor);
    auto err = ops::sub(preds, labels);
    auto abs_err = ops::abs(err);
    auto mae = ops::mean(abs_err);
    auto rmse = ops::sqrt(ops::mean(ops::square(err)));
    auto mape = ops::mean(ops::div(abs_err, Tensor::from(labels.shape(), std::move(denom))));
    return ops::add(ops::add(mae, rmse), mape);
}

}  // namespace rul::stman
