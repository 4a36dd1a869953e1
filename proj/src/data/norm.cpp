#include "rul/data/norm.hpp"

#include <algorithm>
#include <cmath>

#include "rul/error.hpp"

namespace rul::data {

nlohmann::json NormStats::to_json() const { return {{"mean", mean}, {"std", std}}; }

NormStats NormStats::from_json(const nlohmann::json& j) {
    NormStats s{j.at("mean").get<std::vector<double>>(), j.at("std").get<std::vector<double>>()};
    if (s.mean.size() != s.std.size()) throw DataError("norm stats: mean/std length mismatch");
    return s;
}

NormStats fit_norm(std::span<const CellSeries> cells) {
    if (cells.empty() || cells.front().cycles.empty()) throw DataError("fit_norm: no training cells");
    const std::size_t nf = cells.front().n_features();
    // Shifting by the first sample makes the mean of a constant feature exact.
    const auto& origin = cells.front().cycles.front();
    std::vector<double> shifted_sum(nf, 0.0), sq(nf, 0.0);
    std::size_t count = 0;
    for (const auto& cell : cells) {
        if (cell.n_features() != nf) throw DataError("fit_norm: cell '" + cell.cell_id + "' has a different feature count");
        for (const auto& row : cell.cycles) {
            for (std::size_t f = 0; f < nf; ++f) shifted_sum[f] += row[f] - origin[f];
            ++count;
        }
    }
    NormStats stats{std::vector<double>(nf), std::vector<double>(nf)};
    for (std::size_t f = 0; f < nf; ++f) stats.mean[f] = origin[f] + shifted_sum[f] / static_cast<double>(count);
    for (const auto& cell : cells) {
        for (const auto& row : cell.cycles) {
            for (std::size_t f = 0; f < nf; ++f) {
                const double d = row[f] - stats.mean[f];
                sq[f] += d * d;
            }
        }
    }
    for (std::size_t f = 0; f < nf; ++f) {
        stats.std[f] = std::max(kStdFloor, std::sqrt(sq[f] / static_cast<double>(count)));
    }
    return stats;
}

CellSeries apply_norm(const CellSeries& cell, const NormStats& stats) {
    if (cell.n_features() != stats.mean.size()) {
        throw DataError("apply_norm: cell '" + cell.cell_id + "' has " + std::to_string(cell.n_features()) +
                        " features, stats have " + std::to_string(stats.mean.size()));
    }
    CellSeries out = cell;
    for (auto& row : out.cycles) {
        for (std::size_t f = 0; f < row.size(); ++f) row[f] = (row[f] - stats.mean[f]) / stats.std[f];
    }
    return out;
}

WindowSample apply_norm(const WindowSample& window, const NormStats& stats) {
    if (window.n_features != stats.mean.size()) throw DataError("apply_norm: window feature count mismatch");
    WindowSample out = window;
    for (std::size_t f = 0; f < window.n_features; ++f) {
        for (std::size_t t = 0; t < window.n_window; ++t) {
            auto& v = out.matrix[f * window.n_window + t];
            v = (v - stats.mean[f]) / stats.std[f];
        }
    }
    return out;
}

}  // namespace rul::data
