#pragma once

#include <span>
#include <vector>

#include <json.hpp>

namespace rul::harness {

/// Labels below this are left out of MAPE (the RUL label reaches 0 at EOL).
inline constexpr double kMapeExcludeBelow = 0.01;

/// Mean absolute error. Throws DataError on empty or unequal inputs.
double metric_mae(std::span<const double> preds, std::span<const double> labels);
/// Mean squared error.
double metric_mse(std::span<const double> preds, std::span<const double> labels);
/// Mean of |p - y| / y in percent over points with y >= exclude_below.
/// Throws DataError when no point survives the exclusion.
double metric_mape(std::span<const double> preds, std::span<const double> labels,
                   double exclude_below = kMapeExcludeBelow);

struct Metrics {
    double mae = 0.0;
    double mse = 0.0;
    double mape_pct = 0.0;
    std::size_t n_points = 0;
    std::size_t n_mape_points = 0;

    nlohmann::json to_json() const;
};

Metrics compute_metrics(std::span<const double> preds, std::span<const double> labels,
                        double exclude_below = kMapeExcludeBelow);

/// Mean and population standard deviation of fold-level values.
struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd mean_std(std::span<const double> values);

}  // namespace rul::harness
