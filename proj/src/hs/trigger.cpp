#include "rul/hs/trigger.hpp"

#include "rul/data/norm.hpp"
#include "rul/data/windows.hpp"
#include "rul/error.hpp"

namespace rul::hs {

void TriggerConfig::validate() const {
    if (consecutive_required < 1) throw UsageError("trigger.consecutive_required must be >= 1");
    if (!(unhealthy_threshold > 0.0 && unhealthy_threshold < 1.0)) {
        throw UsageError("trigger.unhealthy_threshold must be in (0, 1)");
    }
    if (!(mct_fraction >= 0.0 && mct_fraction < 1.0)) throw UsageError("trigger.mct_fraction must be in [0, 1)");
}

nlohmann::json TriggerConfig::to_json() const {
    return {{"consecutive_required", consecutive_required},
            {"unhealthy_threshold", unhealthy_threshold},
            {"mct_fraction", mct_fraction}};
}

TriggerConfig TriggerConfig::from_json(const nlohmann::json& j) {
    TriggerConfig t;
    t.consecutive_required = j.value("consecutive_required", t.consecutive_required);
    t.unhealthy_threshold = j.value("unhealthy_threshold", t.unhealthy_threshold);
    t.mct_fraction = j.value("mct_fraction", t.mct_fraction);
    t.validate();
    return t;
}

std::optional<FpcResult> decide_fpc(const CycleProbabilities& probs, double eol_reference,
                                    const TriggerConfig& trigger) {
    trigger.validate();
    const double mct_cycle = trigger.mct_fraction * eol_reference;
    int run = 0;
    for (std::size_t i = 0; i < probs.values.size(); ++i) {
        run = probs.values[i] >= trigger.unhealthy_threshold ? run + 1 : 0;
        if (run < trigger.consecutive_required) continue;
        const int end = probs.first_cycle + static_cast<int>(i);
        const int start = end - trigger.consecutive_required + 1;
        if (static_cast<double>(start) <= mct_cycle) continue;
        FpcResult result;
        result.fpc_cycle = end;
        for (int c = start; c <= end; ++c) result.trigger_cycles.push_back(c);
        result.probabilities = probs;
        return result;
    }
    return std::nullopt;
}

CycleProbabilities cell_probabilities(const HsClassifier& model, const data::CellSeries& cell) {
    const auto& cfg = model.config();
    if (cell.n_features() != cfg.n_features) {
        throw DataError("cell '" + cell.cell_id + "' has " + std::to_string(cell.n_features()) +
                        " features but the classifier was trained on " + std::to_string(cfg.n_features));
    }
    const auto normed = model.norm.mean.empty() ? cell : data::apply_norm(cell, model.norm);
    const auto windows = data::make_windows(normed, cfg.n_window, 1);
    return {static_cast<int>(cfg.n_window), model.predict(windows)};
}

double fpc_capacity_pct(const data::CellSeries& cell, int fpc) {
    if (fpc < 1 || fpc > cell.eol()) {
        throw DataError("fpc " + std::to_string(fpc) + " outside cell '" + cell.cell_id + "' (1.." +
                        std::to_string(cell.eol()) + ")");
    }
    const auto& names = data::feature_names(cell.schema);
    std::size_t col = 0;
    while (col < names.size() && names[col] != "discharge_capacity") ++col;
    return 100.0 * cell.value(fpc, col) / cell.value(1, col);
}

nlohmann::json FpcRecord::to_json() const {
    nlohmann::json j{{"cell_id", cell_id}, {"triggered", triggered()}, {"eol", eol}};
    j["fpc_cycle"] = fpc_cycle ? nlohmann::json(*fpc_cycle) : nlohmann::json(nullptr);
    j["fpc_capacity_pct"] = fpc_capacity_pct ? nlohmann::json(*fpc_capacity_pct) : nlohmann::json(nullptr);
    return j;
}

std::pair<FpcRecord, std::optional<FpcResult>> detect_fpc(const HsClassifier& model, const data::CellSeries& cell,
                                                          const TriggerConfig& trigger,
                                                          std::optional<double> eol_reference) {
    const auto probs = cell_probabilities(model, cell);
    auto result = decide_fpc(probs, eol_reference.value_or(static_cast<double>(cell.eol())), trigger);
    FpcRecord record{cell.cell_id, std::nullopt, std::nullopt, cell.eol()};
    if (result) {
        result->cell_id = cell.cell_id;
        record.fpc_cycle = result->fpc_cycle;
        record.fpc_capacity_pct = fpc_capacity_pct(cell, result->fpc_cycle);
    }
    return {record, result};
}

nlohmann::json fpc_report_json(const std::vector<FpcRecord>& records, const TriggerConfig& trigger) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& r : records) cells.push_back(r.to_json());
    return {{"format", "rul-fpc-report"}, {"version", 1}, {"trigger", trigger.to_json()}, {"cells", cells}};
}

}  // namespace rul::hs
