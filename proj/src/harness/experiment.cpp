#include "rul/harness/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "rul/data/labels.hpp"
#include "rul/data/manifest.hpp"
#include "rul/data/norm.hpp"
#include "rul/data/windows.hpp"
#include "rul/error.hpp"
#include "rul/hs/classifier.hpp"
#include "rul/hs/trigger.hpp"
#include "rul/stman/complexity.hpp"
#include "rul/stman/model.hpp"
#include "rul/stman/train.hpp"

namespace rul::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Stage : std::uint64_t { kValSplit = 1, kHsInit, kHsTrain, kRulInit, kRulTrain };

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// Works for windows and cells alike.
template <class Range>
std::set<std::string> cell_ids_of(const Range& items) {
    std::set<std::string> ids;
    for (const auto& w : items) ids.insert(w.cell_id);
    return ids;
}

json optional_json(const auto& v) { return v ? json(*v) : json(nullptr); }

std::string epoch_line(std::size_t fold, const char* stage, const EpochStats& s) {
    std::string line = "fold " + std::to_string(fold) + " " + stage + " epoch " + std::to_string(s.epoch) +
                       " train_loss " + fmt(s.train_loss, "%.6g");
    if (s.val_loss) line += " val_loss " + fmt(*s.val_loss, "%.6g");
    return line;
}

}  // namespace

// ----------------------------------------------------------------------------

RunLog::RunLog(const fs::path& file, std::ostream* echo) : echo_(echo) {
    if (!file.empty()) {
        file_.open(file);
        if (!file_) throw DataError("cannot write log " + file.string());
    }
}

void RunLog::line(const std::string& text) {
    if (file_.is_open()) file_ << text << '\n' << std::flush;
    if (echo_) *echo_ << text << '\n' << std::flush;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ a) ^ b);
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

// ----------------------------------------------------------------------------

std::vector<std::string> Dataset::ids() const {
    std::vector<std::string> out;
    for (const auto& c : cells) out.push_back(c.cell_id);
    return out;
}

const data::CellSeries& Dataset::cell(const std::string& id) const {
    for (const auto& c : cells) {
        if (c.cell_id == id) return c;
    }
    throw DataError("unknown cell '" + id + "'");
}

Dataset load_dataset(const ExperimentConfig& config) {
    if (!fs::exists(config.manifest)) throw DataError("manifest not found: " + config.manifest.string());
    Dataset d;
    d.cells = data::load_dataset(config.manifest, config.schema);
    for (const auto& e : data::read_manifest(config.manifest)) {
        if (e.knee_cycle) d.knees[e.cell_id] = *e.knee_cycle;
    }
    const std::size_t nf = d.cells.front().n_features();
    for (const auto& c : d.cells) {
        if (c.n_features() != nf) {
            throw DataError("cell " + c.cell_id + " has " + std::to_string(c.n_features()) + " features, " +
                            d.cells.front().cell_id + " has " + std::to_string(nf));
        }
        if (c.eol() < static_cast<int>(config.n_window)) {
            throw DataError("cell " + c.cell_id + " has " + std::to_string(c.eol()) + " cycles, fewer than n_w = " +
                            std::to_string(config.n_window));
        }
    }
    return d;
}

// ----------------------------------------------------------------------------

std::vector<data::WindowSample> labeled_hs_windows(const data::CellSeries& normed, const ExperimentConfig& config) {
    data::CycleLabels labels{data::label_hs(normed.eol(), config.hs_label_fraction), {}};
    std::vector<data::WindowSample> out;
    for (auto& w : data::make_windows(normed, config.n_window, config.step, labels)) {
        if (w.hs_label) out.push_back(std::move(w));
    }
    return out;
}

std::vector<data::WindowSample> post_fpc_windows(const data::CellSeries& normed, int fpc,
                                                 const ExperimentConfig& config) {
    std::vector<data::WindowSample> out;
    if (fpc >= normed.eol()) return out;
    data::CycleLabels labels{{}, data::label_rul(normed.eol(), fpc)};
    for (auto& w : data::make_windows(normed, config.n_window, config.step, labels)) {
        if (w.rul_label) out.push_back(std::move(w));
    }
    return out;
}

hs::HsTrainOptions hs_train_options(const ExperimentConfig& config, std::uint64_t seed) {
    hs::HsTrainOptions o;
    o.train = {config.hs_epoch_count(), config.batch_size, config.patience, config.optimizer, seed};
    o.balance_classes = config.balance_hs_classes;
    return o;
}

stman::RulTrainOptions rul_train_options(const ExperimentConfig& config, std::uint64_t seed) {
    stman::RulTrainOptions o;
    o.train = {config.rul_epoch_count(), config.batch_size, config.patience, config.optimizer, seed};
    o.mape_floor = config.mape_floor;
    return o;
}

std::pair<std::vector<std::string>, std::vector<std::string>> validation_split(const ExperimentConfig& config,
                                                                               const std::vector<std::string>& ids,
                                                                               std::uint64_t seed) {
    if (config.val_fraction <= 0.0) return {ids, {}};
    return data::split_validation(ids, config.val_fraction, seed);
}

// ----------------------------------------------------------------------------

json CellFpc::to_json() const {
    return {{"cell_id", cell_id},
            {"split", split},
            {"eol", eol},
            {"triggered", fpc_cycle.has_value()},
            {"fpc_cycle", optional_json(fpc_cycle)},
            {"fpc_capacity_pct", optional_json(fpc_capacity_pct)},
            {"knee_cycle", optional_json(knee_cycle)}};
}

json LeakageCheck::to_json() const {
    return {{"stage", stage}, {"train_cells", train_cells}, {"test_cells", test_cells}, {"disjoint", true}};
}

LeakageCheck check_disjoint(const std::string& stage, const std::set<std::string>& train_ids,
                            const std::set<std::string>& test_ids) {
    for (const auto& id : train_ids) {
        if (test_ids.count(id)) throw Error("leakage at stage '" + stage + "': test cell " + id + " used in training");
    }
    return {stage, train_ids.size(), test_ids.size()};
}

json FoldReport::to_json(double mape_exclude_below) const {
    json fpc_json = json::array();
    for (const auto& f : fpcs) fpc_json.push_back(f.to_json());
    json leak_json = json::array();
    for (const auto& l : leakage) leak_json.push_back(l.to_json());
    json cell_metrics = json::array();
    for (const auto& p : predictions) {
        json m{{"cell_id", p.cell_id},
               {"fpc_cycle", p.fpc},
               {"n_points", p.preds.size()},
               {"mae", metric_mae(p.preds, p.labels)},
               {"mse", metric_mse(p.preds, p.labels)},
               {"mape_pct", nullptr}};
        try {
            m["mape_pct"] = metric_mape(p.preds, p.labels, mape_exclude_below);
        } catch (const DataError&) {
            // every label of this cell is below the exclusion threshold
        }
        cell_metrics.push_back(std::move(m));
    }
    return {{"fold", fold.index},
            {"train_ids", fold.train_ids},
            {"test_ids", fold.test_ids},
            {"fit_ids", fit_ids},
            {"val_ids", val_ids},
            {"stage1",
             {{"train_windows", hs_train_windows},
              {"test_windows", hs_test_windows},
              {"test_accuracy", optional_json(hs_accuracy)},
              {"history", rul::to_json(hs_history)}}},
            {"fpc", fpc_json},
            {"untriggered_test_cells", untriggered_test_cells},
            {"unused_train_cells", unused_train_cells},
            {"stage2",
             {{"train_windows", rul_train_windows},
              {"val_windows", rul_val_windows},
              {"history", rul::to_json(rul_history)}}},
            {"metrics", metrics ? metrics->to_json() : json(nullptr)},
            {"cell_metrics", cell_metrics},
            {"leakage", leak_json}};
}

// ----------------------------------------------------------------------------

FoldReport run_fold(const ExperimentConfig& config, const Dataset& dataset, const data::Fold& fold,
                    const fs::path& fold_dir, RunLog& log) {
    config.validate();
    if (fold.train_ids.empty() || fold.test_ids.empty()) throw UsageError("run_fold: fold has an empty side");
    if (!fold_dir.empty()) fs::create_directories(fold_dir);
    const std::size_t fi = fold.index;
    const std::size_t nf = dataset.cells.front().n_features();

    FoldReport report;
    report.fold = fold;
    const std::set<std::string> test_set(fold.test_ids.begin(), fold.test_ids.end());
    report.leakage.push_back(
        check_disjoint("split", std::set<std::string>(fold.train_ids.begin(), fold.train_ids.end()), test_set));

    std::tie(report.fit_ids, report.val_ids) =
        validation_split(config, fold.train_ids, derive_seed(config.seed, fi, kValSplit));
    std::map<std::string, std::string> split_of;
    for (const auto& id : report.fit_ids) split_of[id] = "train";
    for (const auto& id : report.val_ids) split_of[id] = "val";
    for (const auto& id : fold.test_ids) split_of[id] = "test";
    report.leakage.push_back(check_disjoint(
        "validation_split", std::set<std::string>(report.val_ids.begin(), report.val_ids.end()), test_set));
    if (!fold_dir.empty()) {
        write_json(fold_dir / "fold.json", {{"format", "rul-fold"}, {"version", 1}, {"fold", fold.to_json()},
                                            {"fit_ids", report.fit_ids}, {"val_ids", report.val_ids}});
    }

    // Normalization from the training side of the fold only.
    std::vector<data::CellSeries> norm_cells;
    for (const auto& id : fold.train_ids) norm_cells.push_back(dataset.cell(id));
    report.leakage.push_back(check_disjoint("normalization", cell_ids_of(norm_cells), test_set));
    const auto norm = data::fit_norm(norm_cells);
    std::map<std::string, data::CellSeries> normed;
    for (const auto& c : dataset.cells) normed.emplace(c.cell_id, data::apply_norm(c, norm));

    // Stage 1.
    auto hs_windows = [&](const std::vector<std::string>& ids) {
        std::vector<data::WindowSample> out;
        for (const auto& id : ids) {
            auto ws = labeled_hs_windows(normed.at(id), config);
            out.insert(out.end(), std::make_move_iterator(ws.begin()), std::make_move_iterator(ws.end()));
        }
        return out;
    };
    const auto hs_train = hs_windows(report.fit_ids);
    const auto hs_val = hs_windows(report.val_ids);
    const auto hs_test = hs_windows(fold.test_ids);
    report.leakage.push_back(check_disjoint("stage1_train", cell_ids_of(hs_train), test_set));
    report.leakage.push_back(check_disjoint("stage1_validation", cell_ids_of(hs_val), test_set));
    report.hs_train_windows = hs_train.size();
    report.hs_test_windows = hs_test.size();

    hs::HsClassifier classifier(resolved_hs_config(config, nf), derive_seed(config.seed, fi, kHsInit));
    classifier.norm = norm;
    const auto hs_opts = hs_train_options(config, derive_seed(config.seed, fi, kHsTrain));
    log.line("fold " + std::to_string(fi) + " stage1: " + std::to_string(hs_train.size()) + " train windows, " +
             std::to_string(hs_val.size()) + " validation windows");
    report.hs_history = hs::train_hs(classifier, hs_train, hs_val, hs_opts,
                                     [&](const EpochStats& s) { log.line(epoch_line(fi, "stage1", s)); });
    if (!hs_test.empty()) report.hs_accuracy = hs::hs_accuracy(classifier, hs_test);
    log.line("fold " + std::to_string(fi) + " stage1 test accuracy " +
             (report.hs_accuracy ? fmt(*report.hs_accuracy, "%.4f") : std::string("n/a")));

    // FPC for every cell, from the Stage-1 model.
    std::vector<hs::FpcRecord> records;
    std::map<std::string, int> fpc_of;
    for (const auto& c : dataset.cells) {
        auto [record, result] = hs::detect_fpc(classifier, c, config.trigger);
        CellFpc f{c.cell_id, split_of.count(c.cell_id) ? split_of[c.cell_id] : "unused", c.eol(), record.fpc_cycle,
                  record.fpc_capacity_pct, std::nullopt};
        if (auto it = dataset.knees.find(c.cell_id); it != dataset.knees.end()) f.knee_cycle = it->second;
        if (record.fpc_cycle) fpc_of[c.cell_id] = *record.fpc_cycle;
        report.fpcs.push_back(std::move(f));
        records.push_back(std::move(record));
    }
    for (const auto& id : fold.test_ids) {
        if (!fpc_of.count(id)) report.untriggered_test_cells.push_back(id);
    }
    if (!fold_dir.empty()) write_json(fold_dir / "fpc-report.json", hs::fpc_report_json(records, config.trigger));

    // Stage 2 windows: end cycle at or after the FPC, labeled from it.
    auto rul_windows = [&](const std::string& id) {
        auto it = fpc_of.find(id);
        if (it == fpc_of.end()) return std::vector<data::WindowSample>{};
        return post_fpc_windows(normed.at(id), it->second, config);
    };
    std::vector<data::WindowSample> rul_train, rul_val;
    for (const auto& id : report.fit_ids) {
        auto ws = rul_windows(id);
        if (ws.empty()) report.unused_train_cells.push_back(id);
        rul_train.insert(rul_train.end(), std::make_move_iterator(ws.begin()), std::make_move_iterator(ws.end()));
    }
    for (const auto& id : report.val_ids) {
        auto ws = rul_windows(id);
        if (ws.empty()) report.unused_train_cells.push_back(id);
        rul_val.insert(rul_val.end(), std::make_move_iterator(ws.begin()), std::make_move_iterator(ws.end()));
    }
    report.leakage.push_back(check_disjoint("stage2_train", cell_ids_of(rul_train), test_set));
    report.leakage.push_back(check_disjoint("stage2_validation", cell_ids_of(rul_val), test_set));
    report.rul_train_windows = rul_train.size();
    report.rul_val_windows = rul_val.size();

    stman::StManModel regressor(resolved_stman_config(config, nf), derive_seed(config.seed, fi, kRulInit));
    regressor.norm = norm;
    const auto rul_opts = rul_train_options(config, derive_seed(config.seed, fi, kRulTrain));
    log.line("fold " + std::to_string(fi) + " stage2: " + std::to_string(rul_train.size()) + " train windows, " +
             std::to_string(rul_val.size()) + " validation windows");
    report.rul_history = stman::train_rul(regressor, rul_train, rul_val, rul_opts,
                                          [&](const EpochStats& s) { log.line(epoch_line(fi, "stage2", s)); });

    // Evaluation on the triggered test cells.
    std::vector<double> all_preds, all_labels;
    for (const auto& id : fold.test_ids) {
        auto ws = rul_windows(id);
        if (ws.empty()) continue;
        CellPredictions p;
        p.cell_id = id;
        p.fpc = fpc_of.at(id);
        p.preds = regressor.predict(ws);
        for (const auto& w : ws) {
            p.cycles.push_back(w.end_cycle);
            p.labels.push_back(*w.rul_label);
        }
        all_preds.insert(all_preds.end(), p.preds.begin(), p.preds.end());
        all_labels.insert(all_labels.end(), p.labels.begin(), p.labels.end());
        report.predictions.push_back(std::move(p));
    }
    if (!all_preds.empty()) {
        report.metrics = compute_metrics(all_preds, all_labels, config.mape_exclude_below);
        log.line("fold " + std::to_string(fi) + " test MAE " + fmt(report.metrics->mae, "%.4f") + " MSE " +
                 fmt(report.metrics->mse, "%.5f") + " MAPE " + fmt(report.metrics->mape_pct, "%.2f") + "%");
    } else {
        log.line("fold " + std::to_string(fi) + ": no triggered test cell, no metrics");
    }

    if (!fold_dir.empty()) {
        classifier.save(fold_dir / "hs-model.json");
        regressor.save(fold_dir / "stman-model.json");
        write_json(fold_dir / "hs-history.json", rul::to_json(report.hs_history));
        write_json(fold_dir / "rul-history.json", rul::to_json(report.rul_history));
        write_predictions_csv(fold_dir / "predictions.csv", report.predictions);
        write_json(fold_dir / "fold-report.json", report.to_json(config.mape_exclude_below));
    }
    return report;
}

// ----------------------------------------------------------------------------

MeanStd ExperimentReport::aggregate(const std::string& metric) const {
    std::vector<double> values;
    for (const auto& f : folds) {
        if (metric == "hs_accuracy") {
            if (f.hs_accuracy) values.push_back(*f.hs_accuracy);
        } else if (f.metrics) {
            if (metric == "mae") values.push_back(f.metrics->mae);
            else if (metric == "mse") values.push_back(f.metrics->mse);
            else if (metric == "mape_pct") values.push_back(f.metrics->mape_pct);
            else throw UsageError("unknown metric '" + metric + "'");
        }
    }
    if (values.empty()) return {std::nan(""), std::nan("")};
    return mean_std(values);
}

json ExperimentReport::to_json() const {
    auto ms = [&](const char* metric) -> json {
        const auto r = aggregate(metric);
        if (std::isnan(r.mean)) return nullptr;
        return {{"mean", r.mean}, {"std", r.std}};
    };
    std::size_t test_cells = 0, untriggered = 0, with_metrics = 0, knee_cells = 0, knee_hits = 0;
    std::vector<double> capacity;
    for (const auto& f : folds) {
        test_cells += f.fold.test_ids.size();
        untriggered += f.untriggered_test_cells.size();
        with_metrics += f.metrics.has_value();
        for (const auto& c : f.fpcs) {
            if (c.split != "test") continue;
            if (c.fpc_capacity_pct) capacity.push_back(*c.fpc_capacity_pct);
            if (c.knee_cycle) {
                ++knee_cells;
                if (c.fpc_cycle && std::abs(*c.fpc_cycle - *c.knee_cycle) <= 0.1 * c.eol) ++knee_hits;
            }
        }
    }
    json fold_json = json::array();
    for (const auto& f : folds) fold_json.push_back(f.to_json(config.mape_exclude_below));
    json capacity_json = nullptr;
    if (!capacity.empty()) {
        const auto r = mean_std(capacity);
        capacity_json = {{"mean", r.mean}, {"std", r.std}, {"cells", capacity.size()}};
    }
    json knee_json = nullptr;
    if (knee_cells) knee_json = {{"test_cells", knee_cells}, {"within_10pct_eol", knee_hits}};
    return {{"format", "rul-report"},
            {"version", 1},
            {"config", config.to_json()},
            {"complexity", complexity},
            {"evaluation",
             {{"mape_exclude_below", config.mape_exclude_below},
              {"mape_units", "percent"},
              {"aggregate", "mean and population std over folds with metrics"},
              {"pooling", "fold metrics pool every post-FPC window of the fold's triggered test cells"}}},
            {"aggregate",
             {{"folds", folds.size()},
              {"folds_with_metrics", with_metrics},
              {"mae", ms("mae")},
              {"mse", ms("mse")},
              {"mape_pct", ms("mape_pct")},
              {"hs_accuracy", ms("hs_accuracy")},
              {"test_cells", test_cells},
              {"untriggered_test_cells", untriggered},
              {"fpc_capacity_pct_test", capacity_json},
              {"fpc_vs_knee", knee_json}}},
            {"folds", fold_json}};
}

std::vector<data::Fold> experiment_folds(const ExperimentConfig& config, const Dataset& dataset) {
    auto folds = data::kfold_split(dataset.ids(), config.k, config.seed);
    if (config.max_folds) folds.resize(*config.max_folds);
    return folds;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const fs::path& out_dir, std::ostream* echo) {
    config.validate();
    const auto dataset = load_dataset(config);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_json(out_dir / "config.json", config.to_json());
    }
    RunLog log(out_dir.empty() ? fs::path{} : out_dir / "run.log", echo);

    ExperimentReport report;
    report.config = config;
    {
        const stman::StManModel probe(resolved_stman_config(config, dataset.cells.front().n_features()), 0);
        const hs::HsClassifier hs_probe(resolved_hs_config(config, dataset.cells.front().n_features()), 0);
        std::size_t hs_params = 0;
        for (const auto& p : hs_probe.parameters()) hs_params += p.tensor.numel();
        report.complexity = stman::complexity_json(probe);
        report.complexity["hs_classifier_parameters"] = hs_params;
    }

    json timing = {{"format", "rul-timing"}, {"version", 1}, {"folds", json::array()}};
    const auto t_start = std::chrono::steady_clock::now();
    const auto folds = experiment_folds(config, dataset);
    log.line("experiment: " + std::to_string(dataset.cells.size()) + " cells, " + std::to_string(folds.size()) +
             " folds");
    for (const auto& fold : folds) {
        const auto t0 = std::chrono::steady_clock::now();
        const fs::path fold_dir = out_dir.empty() ? fs::path{} : out_dir / ("fold-" + std::to_string(fold.index));
        report.folds.push_back(run_fold(config, dataset, fold, fold_dir, log));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        timing["folds"].push_back({{"fold", fold.index}, {"seconds", secs}});
        log.line("fold " + std::to_string(fold.index) + " done in " + fmt(secs, "%.1f") + " s");
    }
    timing["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    log.line(summary_row(report));
    if (!out_dir.empty()) {
        write_json(out_dir / "report.json", report.to_json());
        write_json(out_dir / "timing.json", timing);
    }
    return report;
}

std::string summary_row(const ExperimentReport& report) {
    auto cell = [&](const char* metric, const char* spec, double scale, const char* unit) {
        const auto r = report.aggregate(metric);
        if (std::isnan(r.mean)) return std::string("n/a");
        return fmt(r.mean * scale, spec) + unit + " ± " + fmt(r.std * scale, spec) + unit;
    };
    std::size_t test_cells = 0, untriggered = 0;
    for (const auto& f : report.folds) {
        test_cells += f.fold.test_ids.size();
        untriggered += f.untriggered_test_cells.size();
    }
    return "MAE " + cell("mae", "%.4f", 1.0, "") + " | MSE " + cell("mse", "%.4f", 1.0, "") + " | MAPE " +
           cell("mape_pct", "%.2f", 1.0, "%") + " | folds " + std::to_string(report.folds.size()) +
           " | untriggered " + std::to_string(untriggered) + "/" + std::to_string(test_cells);
}

// ----------------------------------------------------------------------------

void write_predictions_csv(const fs::path& path, const std::vector<CellPredictions>& cells) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "cell_id,cycle,fpc,rul_pct_pred,rul_pct_label,remaining_cycles_pred\n";
    for (const auto& c : cells) {
        for (std::size_t i = 0; i < c.cycles.size(); ++i) {
            out << c.cell_id << ',' << c.cycles[i] << ',' << c.fpc << ',' << fmt(c.preds[i]) << ','
                << fmt(c.labels[i]) << ',';
            if (c.cycles[i] > c.fpc) out << fmt(stman::rul_to_cycles(c.preds[i], c.cycles[i], c.fpc));
            out << '\n';
        }
    }
}

std::vector<CellPredictions> read_predictions_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "cell_id,cycle,fpc,rul_pct_pred,rul_pct_label,remaining_cycles_pred") {
        throw ParseError(path.string(), 0, "unexpected header");
    }
    std::vector<CellPredictions> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (f.size() < 5) throw ParseError(path.string(), row, "expected 6 fields");
        try {
            if (out.empty() || out.back().cell_id != f[0]) {
                out.push_back({});
                out.back().cell_id = f[0];
                out.back().fpc = std::stoi(f[2]);
            }
            out.back().cycles.push_back(std::stoi(f[1]));
            out.back().preds.push_back(std::stod(f[3]));
            out.back().labels.push_back(std::stod(f[4]));
        } catch (const std::logic_error&) {
            throw ParseError(path.string(), row, "non-numeric field");
        }
    }
    return out;
}

}  // namespace rul::harness
