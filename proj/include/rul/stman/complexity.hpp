#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "rul/stman/model.hpp"

namespace rul::stman {

/// Trainable scalar count, total and per stage.
struct ParameterCount {
    std::size_t total = 0;
    std::map<std::string, std::size_t> by_stage;
};

ParameterCount count_parameters(const StManModel& model);

/// FLOPs of one single-window forward pass: every multiply-add inside the
/// conv, linear, attention and LSTM products counts as 2. Elementwise
/// activations, norms and softmax are not counted.
std::size_t estimate_flops(const StManConfig& config);

nlohmann::json complexity_json(const StManModel& model);

}  // namespace rul::stman
