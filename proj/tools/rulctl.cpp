// rulctl: command-line front end for the two-stage RUL pipeline.
//
// Precedence for every setting: built-in default < --config file < flags.
// Exit codes: 0 ok, 2 usage, 3 data, 4 training, 1 anything else.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "rul/data/cell.hpp"
#include "rul/data/folds.hpp"
#include "rul/data/manifest.hpp"
#include "rul/data/norm.hpp"
#include "rul/data/synth.hpp"
#include "rul/error.hpp"
#include "rul/harness/config.hpp"
#include "rul/harness/experiment.hpp"
#include "rul/harness/metrics.hpp"
#include "rul/hs/classifier.hpp"
#include "rul/hs/trigger.hpp"
#include "rul/stman/model.hpp"
#include "rul/stman/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rul;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out_dir = ".";
};

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

fs::path prepare_out_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec || !fs::is_directory(p)) throw DataError("cannot create output directory " + p.string());
    // Probe writability up front so the error names the directory.
    const auto probe = p / ".rulctl-write-test";
    {
        std::ofstream out(probe);
        if (!out) throw DataError("output directory " + p.string() + " is not writable");
    }
    fs::remove(probe);
    return p;
}

void write_run_config(const fs::path& out, const std::string& command, const json& options,
                      const json& experiment = nullptr) {
    harness::write_json(out / "run-config.json", {{"format", "rul-run-config"},
                                                  {"version", 1},
                                                  {"command", command},
                                                  {"options", options},
                                                  {"experiment", experiment}});
}

// ---------------------------------------------------------------------------
// synth-gen

struct SynthArgs {
    std::size_t cells = 20;
    int eol_min = 400;
    int eol_max = 800;
    double exponent_min = 4.0;
    double exponent_max = 8.0;
    double capacity_spread = 0.0;
    std::string prefix = "synth";
    std::string out;
};

data::SynthSpec synth_spec_from_json(const json& j) {
    static const std::set<std::string> known{"n_cells",        "eol_min",          "eol_max",
                                             "exponent_min",   "exponent_max",     "nominal_capacity", "capacity_spread",
                                             "capacity_noise", "resistance_noise", "temperature_noise",
                                             "time_noise",     "seed",             "id_prefix"};
    if (!j.is_object()) throw UsageError("synth config: expected an object");
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw UsageError("synth config." + key + ": unknown key");
    }
    data::SynthSpec s;
    try {
        s.n_cells = j.value("n_cells", s.n_cells);
        s.eol_min = j.value("eol_min", s.eol_min);
        s.eol_max = j.value("eol_max", s.eol_max);
        s.exponent_min = j.value("exponent_min", s.exponent_min);
        s.exponent_max = j.value("exponent_max", s.exponent_max);
        s.nominal_capacity = j.value("nominal_capacity", s.nominal_capacity);
        s.capacity_spread = j.value("capacity_spread", s.capacity_spread);
        s.capacity_noise = j.value("capacity_noise", s.capacity_noise);
        s.resistance_noise = j.value("resistance_noise", s.resistance_noise);
        s.temperature_noise = j.value("temperature_noise", s.temperature_noise);
        s.time_noise = j.value("time_noise", s.time_noise);
        s.seed = j.value("seed", s.seed);
        s.id_prefix = j.value("id_prefix", s.id_prefix);
    } catch (const json::exception& e) {
        throw UsageError(std::string("synth config: ") + e.what());
    }
    return s;
}

json synth_spec_json(const data::SynthSpec& s) {
    return {{"n_cells", s.n_cells},
            {"eol_min", s.eol_min},
            {"eol_max", s.eol_max},
            {"exponent_min", s.exponent_min},
            {"exponent_max", s.exponent_max},
            {"nominal_capacity", s.nominal_capacity},
            {"capacity_spread", s.capacity_spread},
            {"capacity_noise", s.capacity_noise},
            {"resistance_noise", s.resistance_noise},
            {"temperature_noise", s.temperature_noise},
            {"time_noise", s.time_noise},
            {"seed", s.seed},
            {"id_prefix", s.id_prefix}};
}

int cmd_synth_gen(const Globals& g, const SynthArgs& a, const CLI::App& sub) {
    data::SynthSpec spec = g.config.empty() ? data::SynthSpec{} : synth_spec_from_json(read_json_file(g.config));
    if (sub.count("--cells")) spec.n_cells = a.cells;
    if (sub.count("--eol-min")) spec.eol_min = a.eol_min;
    if (sub.count("--eol-max")) spec.eol_max = a.eol_max;
    if (sub.count("--exponent-min")) spec.exponent_min = a.exponent_min;
    if (sub.count("--exponent-max")) spec.exponent_max = a.exponent_max;
    if (sub.count("--capacity-spread")) spec.capacity_spread = a.capacity_spread;
    if (sub.count("--prefix")) spec.id_prefix = a.prefix;
    if (g.seed) spec.seed = *g.seed;
    spec.validate();

    const auto out = prepare_out_dir(a.out.empty() ? g.out_dir : a.out);
    const auto cells = data::generate_synthetic(spec);
    data::write_synthetic_corpus(out, cells);
    write_run_config(out, "synth-gen", synth_spec_json(spec));
    std::cout << "wrote " << cells.size() << " cells to " << (out / "cells").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// Experiment-config commands

struct ExperimentArgs {
    std::string manifest;
    std::optional<std::size_t> k, epochs, hs_epochs, rul_epochs, max_folds, batch;
    std::optional<double> lr;
    std::string fold;  // fold.json for train-hs / train-rul / evaluate
};

void add_experiment_flags(CLI::App* sub, ExperimentArgs& a) {
    sub->add_option("--manifest", a.manifest, "Dataset manifest (overrides the config)");
    sub->add_option("--k", a.k, "Number of folds");
    sub->add_option("--epochs", a.epochs, "Epochs for both stages");
    sub->add_option("--hs-epochs", a.hs_epochs, "Stage-1 epochs");
    sub->add_option("--rul-epochs", a.rul_epochs, "Stage-2 epochs");
    sub->add_option("--max-folds", a.max_folds, "Run only the first folds");
    sub->add_option("--batch-size", a.batch, "Mini-batch size");
    sub->add_option("--lr", a.lr, "Adam learning rate");
}

harness::ExperimentConfig resolve_experiment(const Globals& g, const ExperimentArgs& a) {
    harness::ExperimentConfig c;
    if (!g.config.empty()) {
        c = harness::ExperimentConfig::from_json(read_json_file(g.config), fs::path(g.config).parent_path());
    }
    if (!a.manifest.empty()) c.manifest = a.manifest;
    if (a.k) c.k = *a.k;
    if (a.epochs) c.epochs = *a.epochs;
    if (a.hs_epochs) c.hs_epochs = *a.hs_epochs;
    if (a.rul_epochs) c.rul_epochs = *a.rul_epochs;
    if (a.max_folds) c.max_folds = *a.max_folds;
    if (a.batch) c.batch_size = *a.batch;
    if (a.lr) c.optimizer.lr = *a.lr;
    if (g.seed) c.seed = *g.seed;
    if (c.manifest.empty()) throw UsageError("no dataset manifest: pass --manifest or set \"manifest\" in --config");
    c.validate();
    return c;
}

/// Fold from --fold, or every cell on the training side with an empty test side.
data::Fold resolve_fold(const ExperimentArgs& a, const harness::Dataset& dataset) {
    if (a.fold.empty()) return {0, dataset.ids(), {}, 0};
    json j = read_json_file(a.fold);
    const json& f = j.contains("fold") ? j["fold"] : j;
    try {
        auto fold = data::Fold::from_json(f);
        for (const auto* ids : {&fold.train_ids, &fold.test_ids}) {
            for (const auto& id : *ids) dataset.cell(id);
        }
        return fold;
    } catch (const json::exception& e) {
        throw ParseError(a.fold, 0, e.what());
    }
}

std::map<std::string, data::CellSeries> normalize_all(const harness::Dataset& dataset, const data::NormStats& norm,
                                                      const std::vector<std::string>& ids) {
    std::map<std::string, data::CellSeries> out;
    for (const auto& id : ids) out.emplace(id, data::apply_norm(dataset.cell(id), norm));
    return out;
}

int cmd_train_hs(const Globals& g, const ExperimentArgs& a) {
    const auto config = resolve_experiment(g, a);
    const auto out = prepare_out_dir(g.out_dir);
    write_run_config(out, "train-hs", {{"fold", a.fold}}, config.to_json());
    harness::RunLog log(out / "train-hs.log", &std::cout);

    const auto dataset = harness::load_dataset(config);
    const auto fold = resolve_fold(a, dataset);
    const auto [fit_ids, val_ids] = harness::validation_split(config, fold.train_ids, harness::derive_seed(config.seed, 0, 1));
    std::vector<data::CellSeries> norm_cells;
    for (const auto& id : fold.train_ids) norm_cells.push_back(dataset.cell(id));
    const auto norm = data::fit_norm(norm_cells);
    const auto normed = normalize_all(dataset, norm, fold.train_ids);

    std::vector<data::WindowSample> train, val;
    for (const auto& id : fit_ids) {
        auto ws = harness::labeled_hs_windows(normed.at(id), config);
        train.insert(train.end(), ws.begin(), ws.end());
    }
    for (const auto& id : val_ids) {
        auto ws = harness::labeled_hs_windows(normed.at(id), config);
        val.insert(val.end(), ws.begin(), ws.end());
    }
    hs::HsClassifier model(harness::resolved_hs_config(config, dataset.cells.front().n_features()),
                           harness::derive_seed(config.seed, 0, 2));
    model.norm = norm;
    log.line("train-hs: " + std::to_string(train.size()) + " train windows, " + std::to_string(val.size()) +
             " validation windows");
    const auto history = hs::train_hs(model, train, val, harness::hs_train_options(config, harness::derive_seed(config.seed, 0, 3)),
                                      [&](const EpochStats& s) {
                                          log.line("epoch " + std::to_string(s.epoch) + " train_loss " +
                                                   std::to_string(s.train_loss) +
                                                   (s.val_loss ? " val_loss " + std::to_string(*s.val_loss) : ""));
                                      });
    model.save(out / "hs-model.json");
    harness::write_json(out / "hs-history.json", to_json(history));
    log.line("saved " + (out / "hs-model.json").string());
    return 0;
}

struct DetectArgs {
    std::string model;
    std::string cell;
    std::string schema = "MIT7";
    std::string cell_id;
    std::optional<double> eol_ref;
    int consecutive = 5;
    double threshold = 0.5;
    double mct = 0.10;
};

int cmd_detect_fpc(const Globals& g, const DetectArgs& a, const CLI::App& sub) {
    hs::TriggerConfig trigger;
    if (!g.config.empty()) {
        const auto c = harness::ExperimentConfig::from_json(read_json_file(g.config), fs::path(g.config).parent_path());
        trigger = c.trigger;
    }
    if (sub.count("--consecutive")) trigger.consecutive_required = a.consecutive;
    if (sub.count("--threshold")) trigger.unhealthy_threshold = a.threshold;
    if (sub.count("--mct")) trigger.mct_fraction = a.mct;
    trigger.validate();

    const auto out = prepare_out_dir(g.out_dir);
    const auto model = hs::HsClassifier::load(a.model);
    const auto schema = data::parse_schema(a.schema);
    auto cell = data::load_cell(a.cell, schema, a.cell_id.empty() ? fs::path(a.cell).stem().string() : a.cell_id);
    cell.validate();
    write_run_config(out, "detect-fpc",
                     {{"model", a.model},
                      {"cell", a.cell},
                      {"schema", a.schema},
                      {"cell_id", cell.cell_id},
                      {"eol_reference", a.eol_ref ? json(*a.eol_ref) : json(nullptr)},
                      {"trigger", trigger.to_json()}});

    auto [record, result] = hs::detect_fpc(model, cell, trigger, a.eol_ref);
    json report = hs::fpc_report_json({record}, trigger);
    const auto probs = result ? result->probabilities : hs::cell_probabilities(model, cell);
    report["cells"][0]["trace"] = {{"first_cycle", probs.first_cycle},
                                   {"probabilities", probs.values},
                                   {"trigger_cycles", result ? json(result->trigger_cycles) : json::array()}};
    harness::write_json(out / "fpc-report.json", report);
    std::cout << cell.cell_id << ": "
              << (record.fpc_cycle ? "FPC at cycle " + std::to_string(*record.fpc_cycle) + " (" +
                                         std::to_string(*record.fpc_capacity_pct) + "% capacity)"
                                   : std::string("not triggered"))
              << "\n";
    return 0;
}

struct ModelArgs {
    std::string hs_model;
    std::string rul_model;
};

/// FPCs from the Stage-1 checkpoint for the given cells.
std::pair<std::vector<hs::FpcRecord>, std::map<std::string, int>> detect_all(const hs::HsClassifier& model,
                                                                             const harness::Dataset& dataset,
                                                                             const std::vector<std::string>& ids,
                                                                             const hs::TriggerConfig& trigger) {
    std::vector<hs::FpcRecord> records;
    std::map<std::string, int> fpc;
    for (const auto& id : ids) {
        auto [record, result] = hs::detect_fpc(model, dataset.cell(id), trigger);
        if (record.fpc_cycle) fpc[id] = *record.fpc_cycle;
        records.push_back(std::move(record));
    }
    return {records, fpc};
}

int cmd_train_rul(const Globals& g, const ExperimentArgs& a, const ModelArgs& m) {
    const auto config = resolve_experiment(g, a);
    const auto out = prepare_out_dir(g.out_dir);
    write_run_config(out, "train-rul", {{"fold", a.fold}, {"hs_model", m.hs_model}}, config.to_json());
    harness::RunLog log(out / "train-rul.log", &std::cout);

    const auto dataset = harness::load_dataset(config);
    const auto fold = resolve_fold(a, dataset);
    const auto classifier = hs::HsClassifier::load(m.hs_model);
    const auto [fit_ids, val_ids] = harness::validation_split(config, fold.train_ids, harness::derive_seed(config.seed, 0, 1));
    const auto [records, fpc] = detect_all(classifier, dataset, fold.train_ids, config.trigger);
    harness::write_json(out / "fpc-report.json", hs::fpc_report_json(records, config.trigger));

    const auto& norm = classifier.norm;
    const auto normed = normalize_all(dataset, norm, fold.train_ids);
    auto gather = [&](const std::vector<std::string>& ids) {
        std::vector<data::WindowSample> ws;
        for (const auto& id : ids) {
            if (!fpc.count(id)) continue;
            auto part = harness::post_fpc_windows(normed.at(id), fpc.at(id), config);
            ws.insert(ws.end(), part.begin(), part.end());
        }
        return ws;
    };
    const auto train = gather(fit_ids);
    const auto val = gather(val_ids);
    stman::StManModel model(harness::resolved_stman_config(config, dataset.cells.front().n_features()),
                            harness::derive_seed(config.seed, 0, 4));
    model.norm = norm;
    log.line("train-rul: " + std::to_string(train.size()) + " train windows, " + std::to_string(val.size()) +
             " validation windows");
    const auto history = stman::train_rul(model, train, val, harness::rul_train_options(config, harness::derive_seed(config.seed, 0, 5)),
                                          [&](const EpochStats& s) {
                                              log.line("epoch " + std::to_string(s.epoch) + " train_loss " +
                                                       std::to_string(s.train_loss) +
                                                       (s.val_loss ? " val_mae " + std::to_string(*s.val_loss) : ""));
                                          });
    model.save(out / "stman-model.json");
    harness::write_json(out / "rul-history.json", to_json(history));
    log.line("saved " + (out / "stman-model.json").string());
    return 0;
}

int cmd_evaluate(const Globals& g, const ExperimentArgs& a, const ModelArgs& m) {
    const auto config = resolve_experiment(g, a);
    const auto out = prepare_out_dir(g.out_dir);
    write_run_config(out, "evaluate", {{"fold", a.fold}, {"hs_model", m.hs_model}, {"rul_model", m.rul_model}},
                     config.to_json());

    const auto dataset = harness::load_dataset(config);
    auto fold = resolve_fold(a, dataset);
    const auto& test_ids = a.fold.empty() ? fold.train_ids : fold.test_ids;
    const auto classifier = hs::HsClassifier::load(m.hs_model);
    const auto regressor = stman::StManModel::load(m.rul_model);
    const auto [records, fpc] = detect_all(classifier, dataset, test_ids, config.trigger);
    harness::write_json(out / "fpc-report.json", hs::fpc_report_json(records, config.trigger));

    const auto normed = normalize_all(dataset, regressor.norm, test_ids);
    std::vector<harness::CellPredictions> preds;
    std::vector<double> all_p, all_y;
    json untriggered = json::array();
    for (const auto& id : test_ids) {
        if (!fpc.count(id)) {
            untriggered.push_back(id);
            continue;
        }
        const auto ws = harness::post_fpc_windows(normed.at(id), fpc.at(id), config);
        if (ws.empty()) continue;
        harness::CellPredictions p{id, fpc.at(id), {}, regressor.predict(ws), {}};
        for (const auto& w : ws) {
            p.cycles.push_back(w.end_cycle);
            p.labels.push_back(*w.rul_label);
        }
        all_p.insert(all_p.end(), p.preds.begin(), p.preds.end());
        all_y.insert(all_y.end(), p.labels.begin(), p.labels.end());
        preds.push_back(std::move(p));
    }
    harness::write_predictions_csv(out / "predictions.csv", preds);
    json metrics = nullptr;
    if (!all_p.empty()) metrics = harness::compute_metrics(all_p, all_y, config.mape_exclude_below).to_json();
    harness::write_json(out / "metrics.json", {{"format", "rul-metrics"},
                                               {"version", 1},
                                               {"mape_exclude_below", config.mape_exclude_below},
                                               {"cells", test_ids},
                                               {"untriggered_cells", untriggered},
                                               {"metrics", metrics}});
    if (metrics.is_null()) {
        std::cout << "no triggered cell; no metrics\n";
    } else {
        std::cout << "MAE " << metrics["mae"].get<double>() << " | MSE " << metrics["mse"].get<double>() << " | MAPE "
                  << metrics["mape_pct"].get<double>() << "% | untriggered " << untriggered.size() << "/"
                  << test_ids.size() << "\n";
    }
    return 0;
}

int cmd_run_cv(const Globals& g, const ExperimentArgs& a) {
    const auto config = resolve_experiment(g, a);
    const auto out = prepare_out_dir(g.out_dir);
    write_run_config(out, "run-cv", json::object(), config.to_json());
    const auto report = harness::run_experiment(config, out, &std::cerr);
    std::cout << harness::summary_row(report) << "\n";
    return 0;
}

// Prints the Table-3 style row, recomputing mean/std from the per-fold values.
int cmd_report(const Globals& g, const std::string& report_path) {
    const fs::path path = report_path.empty() ? fs::path(g.out_dir) / "report.json" : fs::path(report_path);
    const json j = read_json_file(path);
    if (j.value("format", "") != "rul-report") throw DataError(path.string() + ": not a rul-report file");
    try {
        std::vector<double> mae, mse, mape;
        for (const auto& f : j.at("folds")) {
            const auto& m = f.at("metrics");
            std::cout << "fold " << f.at("fold").get<int>() << ": ";
            if (m.is_null()) {
                std::cout << "no metrics\n";
                continue;
            }
            mae.push_back(m.at("mae").get<double>());
            mse.push_back(m.at("mse").get<double>());
            mape.push_back(m.at("mape_pct").get<double>());
            std::cout << "MAE " << mae.back() << " MSE " << mse.back() << " MAPE " << mape.back() << "% ("
                      << f.at("untriggered_test_cells").size() << " untriggered)\n";
        }
        if (mae.empty()) {
            std::cout << "no fold produced metrics\n";
            return 0;
        }
        auto row = [](const char* name, const std::vector<double>& v, int digits, const char* unit) {
            const auto r = harness::mean_std(v);
            char buf[128];
            std::snprintf(buf, sizeof buf, "%s %.*f%s ± %.*f%s", name, digits, r.mean, unit, digits, r.std, unit);
            return std::string(buf);
        };
        std::cout << row("MAE", mae, 4, "") << " | " << row("MSE", mse, 4, "") << " | " << row("MAPE", mape, 2, "%")
                  << "\n";
        const auto& c = j.at("complexity");
        std::cout << "ST-MAN parameters " << c.at("parameters").get<std::size_t>() << ", FLOPs/window "
                  << c.at("flops_per_window").get<std::size_t>() << "\n";
    } catch (const json::exception& e) {
        throw ParseError(path.string(), 0, e.what());
    }
    return 0;
}

int exit_code(const char* kind, const std::string& message, int code) {
    std::cerr << "rulctl: " << kind << " error: " << message << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage battery RUL pipeline: health-state classifier, FPC trigger, ST-MAN regressor"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Random seed (overrides the config)");
    app.add_option("--config", g.config, "Config file (JSON)");
    app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth-gen", "Generate a synthetic corpus with known knees");
    synth_cmd->add_option("--cells", synth.cells, "Number of cells")->capture_default_str();
    synth_cmd->add_option("--eol-min", synth.eol_min, "Shortest life in cycles")->capture_default_str();
    synth_cmd->add_option("--eol-max", synth.eol_max, "Longest life in cycles")->capture_default_str();
    synth_cmd->add_option("--exponent-min", synth.exponent_min, "Fade exponent lower bound")->capture_default_str();
    synth_cmd->add_option("--exponent-max", synth.exponent_max, "Fade exponent upper bound")->capture_default_str();
    synth_cmd->add_option("--capacity-spread", synth.capacity_spread,
                          "Per-cell initial capacity spread, fraction of nominal")
        ->capture_default_str();
    synth_cmd->add_option("--prefix", synth.prefix, "Cell id prefix")->capture_default_str();
    synth_cmd->add_option("--out", synth.out, "Dataset directory (defaults to --out-dir)");

    ExperimentArgs hs_args;
    auto* train_hs_cmd = app.add_subcommand("train-hs", "Train the Stage-1 health-state classifier");
    add_experiment_flags(train_hs_cmd, hs_args);
    train_hs_cmd->add_option("--fold", hs_args.fold, "fold.json; train on its training cells");

    DetectArgs detect;
    auto* detect_cmd = app.add_subcommand("detect-fpc", "Locate the first prediction cycle of one cell");
    detect_cmd->add_option("--model", detect.model, "Stage-1 checkpoint")->required();
    detect_cmd->add_option("--cell", detect.cell, "Cell CSV")->required();
    detect_cmd->add_option("--schema", detect.schema, "MIT7, HUST5 or SYNTH")->capture_default_str();
    detect_cmd->add_option("--cell-id", detect.cell_id, "Id for the report (defaults to the file stem)");
    detect_cmd->add_option("--eol-ref", detect.eol_ref, "Reference life for the MCT (defaults to the cell's EOL)");
    detect_cmd->add_option("--consecutive", detect.consecutive, "Unhealthy run length")->capture_default_str();
    detect_cmd->add_option("--threshold", detect.threshold, "Unhealthy probability cutoff")->capture_default_str();
    detect_cmd->add_option("--mct", detect.mct, "Minimum cycle threshold, fraction of EOL")->capture_default_str();

    ExperimentArgs rul_args;
    ModelArgs rul_models;
    auto* train_rul_cmd = app.add_subcommand("train-rul", "Train the Stage-2 ST-MAN regressor");
    add_experiment_flags(train_rul_cmd, rul_args);
    train_rul_cmd->add_option("--fold", rul_args.fold, "fold.json; train on its training cells");
    train_rul_cmd->add_option("--hs-model", rul_models.hs_model, "Stage-1 checkpoint for the FPCs")->required();

    ExperimentArgs eval_args;
    ModelArgs eval_models;
    auto* eval_cmd = app.add_subcommand("evaluate", "Predict and score post-FPC windows");
    add_experiment_flags(eval_cmd, eval_args);
    eval_cmd->add_option("--fold", eval_args.fold, "fold.json; evaluate its test cells (default: every cell)");
    eval_cmd->add_option("--hs-model", eval_models.hs_model, "Stage-1 checkpoint")->required();
    eval_cmd->add_option("--rul-model", eval_models.rul_model, "Stage-2 checkpoint")->required();

    ExperimentArgs cv_args;
    auto* cv_cmd = app.add_subcommand("run-cv", "Run the k-fold cross-validated experiment");
    add_experiment_flags(cv_cmd, cv_args);

    std::string report_path;
    auto* report_cmd = app.add_subcommand("report", "Summarize a report.json");
    report_cmd->add_option("--report", report_path, "Report file (default: <out-dir>/report.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*synth_cmd) return cmd_synth_gen(g, synth, *synth_cmd);
        if (*train_hs_cmd) return cmd_train_hs(g, hs_args);
        if (*detect_cmd) return cmd_detect_fpc(g, detect, *detect_cmd);
        if (*train_rul_cmd) return cmd_train_rul(g, rul_args, rul_models);
        if (*eval_cmd) return cmd_evaluate(g, eval_args, eval_models);
        if (*cv_cmd) return cmd_run_cv(g, cv_args);
        if (*report_cmd) return cmd_report(g, report_path);
    } catch (const UsageError& e) {
        return exit_code("usage", e.what(), 2);
    } catch (const DataError& e) {
        return exit_code("data", e.what(), 3);
    } catch (const ShapeError& e) {
        return exit_code("data", e.what(), 3);
    } catch (const TrainingError& e) {
        return exit_code("training", e.what(), 4);
    } catch (const std::exception& e) {
        return exit_code("internal", e.what(), 1);
    }
    return 2;
}
