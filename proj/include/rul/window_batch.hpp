#pragma once

// Packing window samples into model input tensors. Header-only so both
// stage libraries can use it without a dependency between them.

#include <span>
#include <vector>

#include "rul/data/windows.hpp"
#include "rul/error.hpp"
#include "rul/tensor/tensor.hpp"

namespace rul {

namespace detail {
inline void check_window(const data::WindowSample& w, std::size_t n_f, std::size_t n_w) {
    if (w.n_features != n_f || w.n_window != n_w) {
        throw ShapeError("window " + w.cell_id + "@" + std::to_string(w.end_cycle) + " is " +
                         std::to_string(w.n_features) + "x" + std::to_string(w.n_window) + ", model expects " +
                         std::to_string(n_f) + "x" + std::to_string(n_w));
    }
}
}  // namespace detail

/// [B, n_f, n_w] from the selected windows.
inline Tensor channel_major_batch(std::span<const data::WindowSample> windows, std::span<const std::size_t> idx,
                                  std::size_t n_f, std::size_t n_w) {
    std::vector<double> values;
    values.reserve(idx.size() * n_f * n_w);
    for (auto i : idx) {
        const auto& w = windows[i];
        detail::check_window(w, n_f, n_w);
        values.insert(values.end(), w.matrix.begin(), w.matrix.end());
    }
    return Tensor::from({idx.size(), n_f, n_w}, std::move(values));
}

/// [n_w, B, n_f] (time-major, as the LSTM layers take it).
inline Tensor time_major_batch(std::span<const data::WindowSample> windows, std::span<const std::size_t> idx,
                               std::size_t n_f, std::size_t n_w) {
    const std::size_t batch = idx.size();
    std::vector<double> values(n_w * batch * n_f);
    for (std::size_t b = 0; b < batch; ++b) {
        const auto& w = windows[idx[b]];
        detail::check_window(w, n_f, n_w);
        for (std::size_t f = 0; f < n_f; ++f) {
            for (std::size_t t = 0; t < n_w; ++t) values[(t * batch + b) * n_f + f] = w.matrix[f * n_w + t];
        }
    }
    return Tensor::from({n_w, batch, n_f}, std::move(values));
}

inline std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

}  // namespace rul
