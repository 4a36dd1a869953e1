#include "rul/harness/metrics.hpp"

#include <cmath>
#include <string>

#include "rul/error.hpp"

namespace rul::harness {

namespace {

void check_inputs(std::span<const double> preds, std::span<const double> labels, const char* name) {
    if (preds.empty()) throw DataError(std::string(name) + ": empty input");
    if (preds.size() != labels.size()) {
        throw DataError(std::string(name) + ": " + std::to_string(preds.size()) + " predictions vs " +
                        std::to_string(labels.size()) + " labels");
    }
}

}  // namespace

double metric_mae(std::span<const double> preds, std::span<const double> labels) {
    check_inputs(preds, labels, "metric_mae");
    double s = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) s += std::abs(preds[i] - labels[i]);
    return s / static_cast<double>(preds.size());
}

double metric_mse(std::span<const double> preds, std::span<const double> labels) {
    check_inputs(preds, labels, "metric_mse");
    double s = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) s += (preds[i] - labels[i]) * (preds[i] - labels[i]);
    return s / static_cast<double>(preds.size());
}

namespace {

std::pair<double, std::size_t> mape_sum(std::span<const double> preds, std::span<const double> labels,
                                        double exclude_below) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (labels[i] < exclude_below) continue;
        s += std::abs(preds[i] - labels[i]) / labels[i];
        ++n;
    }
    return {s, n};
}

}  // namespace

double metric_mape(std::span<const double> preds, std::span<const double> labels, double exclude_below) {
    check_inputs(preds, labels, "metric_mape");
    const auto [s, n] = mape_sum(preds, labels, exclude_below);
    if (n == 0) throw DataError("metric_mape: every label is below " + std::to_string(exclude_below));
    return 100.0 * s / static_cast<double>(n);
}

nlohmann::json Metrics::to_json() const {
    return {{"mae", mae}, {"mse", mse}, {"mape_pct", mape_pct}, {"n_points", n_points}, {"n_mape_points", n_mape_points}};
}

Metrics compute_metrics(std::span<const double> preds, std::span<const double> labels, double exclude_below) {
    Metrics m;
    m.mae = metric_mae(preds, labels);
    m.mse = metric_mse(preds, labels);
    m.mape_pct = metric_mape(preds, labels, exclude_below);
    m.n_points = preds.size();
    m.n_mape_points = mape_sum(preds, labels, exclude_below).second;
    return m;
}

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) throw DataError("mean_std: no values");
    MeanStd r;
    for (double v : values) r.mean += v;
    r.mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(values.size()));
    return r;
}

}  // namespace rul::harness
