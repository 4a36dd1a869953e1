#pragma once

// First prediction cycle (FPC): the end of the first run of
// `consecutive_required` unhealthy classifications whose first cycle lies
// past the minimum cycle threshold (MCT = mct_fraction * reference EOL).

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rul/data/cell.hpp"
#include "rul/hs/classifier.hpp"

namespace rul::hs {

struct TriggerConfig {
    int consecutive_required = 5;
    double unhealthy_threshold = 0.5;
    double mct_fraction = 0.10;

    /// Throws UsageError when out of range.
    void validate() const;
    nlohmann::json to_json() const;
    static TriggerConfig from_json(const nlohmann::json& j);
};

/// Probabilities for consecutive cycles first_cycle, first_cycle + 1, ...
struct CycleProbabilities {
    int first_cycle = 0;
    std::vector<double> values;

    int last_cycle() const { return first_cycle + static_cast<int>(values.size()) - 1; }
    double at(int cycle) const { return values[static_cast<std::size_t>(cycle - first_cycle)]; }
};

struct FpcResult {
    std::string cell_id;
    int fpc_cycle = 0;
    std::vector<int> trigger_cycles;  // the run that fired, ending at fpc_cycle
    CycleProbabilities probabilities;
};

/// Scans for the first qualifying run. Returns nullopt when nothing fires.
std::optional<FpcResult> decide_fpc(const CycleProbabilities& probs, double eol_reference,
                                    const TriggerConfig& trigger);

/// Per-cycle P(unhealthy) from the window ending at each cycle n_w..EOL.
/// Normalizes the cell with the model's stats.
CycleProbabilities cell_probabilities(const HsClassifier& model, const data::CellSeries& cell);

/// 100 * q(fpc) / q(1) on discharge capacity.
double fpc_capacity_pct(const data::CellSeries& cell, int fpc);

/// One entry of fpc-report.json.
struct FpcRecord {
    std::string cell_id;
    std::optional<int> fpc_cycle;
    std::optional<double> fpc_capacity_pct;
    int eol = 0;

    bool triggered() const { return fpc_cycle.has_value(); }
    nlohmann::json to_json() const;
};

/// Runs the classifier over the cell and applies the trigger with the cell's
/// own EOL as reference unless `eol_reference` is given.
std::pair<FpcRecord, std::optional<FpcResult>> detect_fpc(const HsClassifier& model, const data::CellSeries& cell,
                                                          const TriggerConfig& trigger,
                                                          std::optional<double> eol_reference = std::nullopt);

/// {"format": "rul-fpc-report", "version": 1, "trigger": {...}, "cells": [...]}
nlohmann::json fpc_report_json(const std::vector<FpcRecord>& records, const TriggerConfig& trigger);

}  // namespace rul::hs
