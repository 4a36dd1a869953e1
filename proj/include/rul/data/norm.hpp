#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "rul/data/cell.hpp"
#include "rul/data/windows.hpp"

namespace rul::data {

inline constexpr double kStdFloor = 1e-8;

/// Per-feature z-score statistics. Fit on training-fold cells only.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> std;

    nlohmann::json to_json() const;
    static NormStats from_json(const nlohmann::json& j);
};

/// Mean and population standard deviation over every cycle of every cell,
/// std floored at kStdFloor.
NormStats fit_norm(std::span<const CellSeries> cells);

CellSeries apply_norm(const CellSeries& cell, const NormStats& stats);
WindowSample apply_norm(const WindowSample& window, const NormStats& stats);

}  // namespace rul::data
