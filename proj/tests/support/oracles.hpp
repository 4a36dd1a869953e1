#pragma once

// Independent reference computations used to check the library. None of
// these call into the code paths they verify.

#include <cmath>
#include <optional>
#include <vector>

namespace rul::testing {

/// Argmax of discrete curvature of the normalized curve y_j = q_j / q0,
/// x_j = j / eol, using central finite differences on interior cycles.
inline int brute_force_knee(const std::vector<double>& q, double q0) {
    const int eol = static_cast<int>(q.size());
    const double dx = 1.0 / eol;
    int best = 2;
    double best_k = -1.0;
    for (int j = 2; j < eol; ++j) {
        const double ym = q[static_cast<std::size_t>(j - 2)] / q0;
        const double y0 = q[static_cast<std::size_t>(j - 1)] / q0;
        const double yp = q[static_cast<std::size_t>(j)] / q0;
        const double d1 = (yp - ym) / (2 * dx);
        const double d2 = (yp - 2 * y0 + ym) / (dx * dx);
        const double k = std::abs(d2) / std::pow(1 + d1 * d1, 1.5);
        if (k > best_k) {
            best_k = k;
            best = j;
        }
    }
    return best;
}

/// Literal FPC definition: scan every end index, check the whole run.
/// probs[i] belongs to cycle first_cycle + i.
inline std::optional<int> brute_force_fpc(const std::vector<double>& probs, int first_cycle, int required,
                                          double threshold, double mct_cycle) {
    const int n = static_cast<int>(probs.size());
    for (int end = 0; end < n; ++end) {
        const int start = end - required + 1;
        if (start < 0) continue;
        bool all = true;
        for (int i = start; i <= end; ++i) all = all && probs[static_cast<std::size_t>(i)] >= threshold;
        if (all && static_cast<double>(first_cycle + start) > mct_cycle) return first_cycle + end;
    }
    return std::nullopt;
}

inline double oracle_mae(const std::vector<double>& p, const std::vector<double>& y) {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - y[i]);
    return s / static_cast<double>(p.size());
}

inline double oracle_mse(const std::vector<double>& p, const std::vector<double>& y) {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - y[i]) * (p[i] - y[i]);
    return s / static_cast<double>(p.size());
}

inline double oracle_mape(const std::vector<double>& p, const std::vector<double>& y, double floor) {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - y[i]) / std::max(y[i], floor);
    return s / static_cast<double>(p.size());
}

}  // namespace rul::testing
