#include "rul/data/windows.hpp"

#include "rul/error.hpp"

namespace rul::data {

WindowSample window_at(const CellSeries& cell, std::size_t n_window, int end_cycle) {
    const int n_w = static_cast<int>(n_window);
    if (end_cycle < n_w || end_cycle > cell.eol()) {
        throw DataError("window ending at cycle " + std::to_string(end_cycle) + " out of range for cell '" +
                        cell.cell_id + "' (eol " + std::to_string(cell.eol()) + ", window " + std::to_string(n_w) + ")");
    }
    const std::size_t nf = cell.n_features();
    WindowSample w{cell.cell_id, end_cycle, nf, n_window, std::vector<double>(nf * n_window), {}, {}};
    const int start = end_cycle - n_w + 1;
    for (std::size_t t = 0; t < n_window; ++t) {
        const auto& row = cell.cycles[static_cast<std::size_t>(start - 1) + t];
        for (std::size_t f = 0; f < nf; ++f) w.matrix[f * n_window + t] = row[f];
    }
    return w;
}

std::vector<WindowSample> make_windows(const CellSeries& cell, std::size_t n_window, std::size_t step,
                                       const CycleLabels& labels) {
    if (n_window == 0 || step == 0) throw UsageError("make_windows: window size and step must be positive");
    if (cell.eol() < static_cast<int>(n_window)) {
        throw DataError("cell '" + cell.cell_id + "' has " + std::to_string(cell.eol()) +
                        " cycles, shorter than the window size " + std::to_string(n_window));
    }
    const auto eol = static_cast<std::size_t>(cell.eol());
    if ((!labels.hs.empty() && labels.hs.size() != eol) || (!labels.rul.empty() && labels.rul.size() != eol)) {
        throw DataError("make_windows: label vectors for cell '" + cell.cell_id + "' do not cover its cycles");
    }
    std::vector<WindowSample> out;
    out.reserve((eol - n_window) / step + 1);
    for (std::size_t j = n_window; j <= eol; j += step) {
        auto w = window_at(cell, n_window, static_cast<int>(j));
        if (!labels.hs.empty()) w.hs_label = labels.hs[j - 1];
        if (!labels.rul.empty()) w.rul_label = labels.rul[j - 1];
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace rul::data
