#pragma once

// Cross-validated experiment: per fold, Stage 1 on the training cells'
// labeled head/tail windows, FPCs for every cell from that model, Stage 2 on
// the training cells' post-FPC windows, metrics on the test cells'.
//
// Output layout under out_dir:
//   config.json            resolved ExperimentConfig
//   run.log                per-epoch losses and progress
//   report.json            ExperimentReport (deterministic under a fixed seed)
//   timing.json            wall-clock seconds per fold (kept out of report.json)
//   fold-<i>/fold.json, hs-model.json, stman-model.json, hs-history.json,
//            rul-history.json, fpc-report.json, predictions.csv, fold-report.json

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rul/data/cell.hpp"
#include "rul/data/folds.hpp"
#include "rul/harness/config.hpp"
#include "rul/harness/metrics.hpp"
#include "rul/hs/classifier.hpp"
#include "rul/stman/train.hpp"
#include "rul/tensor/trainer.hpp"

namespace rul::harness {

/// Writes each line to the log file (if open) and to `echo` (if set).
class RunLog {
public:
    RunLog() = default;
    explicit RunLog(const std::filesystem::path& file, std::ostream* echo = nullptr);
    void line(const std::string& text);

private:
    std::ofstream file_;
    std::ostream* echo_ = nullptr;
};

struct Dataset {
    std::vector<data::CellSeries> cells;
    std::map<std::string, int> knees;  // ground truth, synthetic manifests only

    std::vector<std::string> ids() const;
    const data::CellSeries& cell(const std::string& id) const;
};

/// Loads the manifest named by the config. Throws DataError when cells
/// disagree on feature count or a cell is shorter than n_w.
Dataset load_dataset(const ExperimentConfig& config);

/// Labeled head/tail windows of a normalized cell.
std::vector<data::WindowSample> labeled_hs_windows(const data::CellSeries& normed, const ExperimentConfig& config);
/// Windows ending at or after `fpc`, labeled with RUL from it. Empty when
/// fpc >= EOL.
std::vector<data::WindowSample> post_fpc_windows(const data::CellSeries& normed, int fpc,
                                                 const ExperimentConfig& config);

hs::HsTrainOptions hs_train_options(const ExperimentConfig& config, std::uint64_t seed);
stman::RulTrainOptions rul_train_options(const ExperimentConfig& config, std::uint64_t seed);

/// Cells minus a validation hold-out of val_fraction. Returns {fit, val}.
std::pair<std::vector<std::string>, std::vector<std::string>> validation_split(const ExperimentConfig& config,
                                                                               const std::vector<std::string>& ids,
                                                                               std::uint64_t seed);

struct CellFpc {
    std::string cell_id;
    std::string split;  // "train", "val" or "test"
    int eol = 0;
    std::optional<int> fpc_cycle;
    std::optional<double> fpc_capacity_pct;
    std::optional<int> knee_cycle;

    nlohmann::json to_json() const;
};

struct CellPredictions {
    std::string cell_id;
    int fpc = 0;
    std::vector<int> cycles;
    std::vector<double> preds;
    std::vector<double> labels;
};

struct LeakageCheck {
    std::string stage;
    std::size_t train_cells = 0;
    std::size_t test_cells = 0;

    nlohmann::json to_json() const;
};

/// Asserts the two id sets share no cell. Throws Error naming the stage and
/// the first shared cell; returns the record otherwise.
LeakageCheck check_disjoint(const std::string& stage, const std::set<std::string>& train_ids,
                            const std::set<std::string>& test_ids);

struct FoldReport {
    data::Fold fold;
    std::vector<std::string> fit_ids;  // training cells minus validation
    std::vector<std::string> val_ids;
    std::size_t hs_train_windows = 0;
    std::size_t hs_test_windows = 0;
    std::optional<double> hs_accuracy;  // on labeled test windows
    TrainHistory hs_history;
    std::vector<CellFpc> fpcs;  // every cell of the corpus
    std::vector<std::string> untriggered_test_cells;
    std::vector<std::string> unused_train_cells;  // no usable FPC, no Stage-2 windows
    std::size_t rul_train_windows = 0;
    std::size_t rul_val_windows = 0;
    TrainHistory rul_history;
    std::vector<CellPredictions> predictions;  // triggered test cells
    std::optional<Metrics> metrics;            // pooled over test windows
    std::vector<LeakageCheck> leakage;

    nlohmann::json to_json(double mape_exclude_below) const;
};

/// Runs one fold; artifacts go to `fold_dir` unless it is empty.
FoldReport run_fold(const ExperimentConfig& config, const Dataset& dataset, const data::Fold& fold,
                    const std::filesystem::path& fold_dir, RunLog& log);

struct ExperimentReport {
    ExperimentConfig config;
    nlohmann::json complexity;
    std::vector<FoldReport> folds;

    /// Mean +- population std over folds with metrics.
    MeanStd aggregate(const std::string& metric) const;
    nlohmann::json to_json() const;
};

/// Folds of the configured k-fold split, truncated to max_folds.
std::vector<data::Fold> experiment_folds(const ExperimentConfig& config, const Dataset& dataset);

/// Runs every fold and writes the layout above when out_dir is non-empty.
ExperimentReport run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                std::ostream* echo = nullptr);

/// "MAE 0.0275 ± 0.0046 | MSE ... | MAPE ...% ± ...%" plus trigger counts.
std::string summary_row(const ExperimentReport& report);

/// Per-window predictions, one row per post-FPC window of each cell:
/// cell_id,cycle,fpc,rul_pct_pred,rul_pct_label,remaining_cycles_pred
/// remaining_cycles_pred is empty at the FPC itself.
void write_predictions_csv(const std::filesystem::path& path, const std::vector<CellPredictions>& cells);
std::vector<CellPredictions> read_predictions_csv(const std::filesystem::path& path);

/// Writes `j` as indented JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// SplitMix64 of (seed, a, b): independent per-fold, per-stage seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

}  // namespace rul::harness
