#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rul/data/cell.hpp"
#include "rul/data/labels.hpp"

namespace rul::data {

/// n_f x n_w slice covering cycles [end_cycle - n_w + 1, end_cycle].
/// matrix is feature-major: matrix[f * n_window + t].
struct WindowSample {
    std::string cell_id;
    int end_cycle = 0;
    std::size_t n_features = 0;
    std::size_t n_window = 0;
    std::vector<double> matrix;
    std::optional<int> hs_label;
    std::optional<double> rul_label;

    int start_cycle() const { return end_cycle - static_cast<int>(n_window) + 1; }
    double at(std::size_t feature, std::size_t t) const { return matrix[feature * n_window + t]; }
};

/// One window per end cycle j = n_w, n_w + step, ... <= eol. Labels, when
/// given, are taken from the end cycle. Throws DataError if eol < n_w.
std::vector<WindowSample> make_windows(const CellSeries& cell, std::size_t n_window, std::size_t step,
                                       const CycleLabels& labels = {});

/// Single window ending at `end_cycle`.
WindowSample window_at(const CellSeries& cell, std::size_t n_window, int end_cycle);

}  // namespace rul::data
