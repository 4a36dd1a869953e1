#pragma once

// Experiment configuration. On disk:
//   {"format": "rul-experiment-config", "version": 1,
//    "manifest": "data/manifest.json", "schema": null,
//    "window": {"n_w": 50, "step": 1},
//    "labels": {"p": 0.1},
//    "trigger": {"consecutive_required": 5, "unhealthy_threshold": 0.5, "mct_fraction": 0.1},
//    "hs_model": {"hidden": 32, "modules": 2, "layers_per_module": 4},
//    "stman": {"k": 3, "d_model": 8, "n_heads": 2, "d_fuse": 16, "d_h": 32},
//    "optimizer": {"lr": 1e-4, "beta1": 0.9, "beta2": 0.99, "eps": 1e-8},
//    "training": {"batch_size": 8, "epochs": 100, "patience": 20, "hs_epochs": null,
//                 "rul_epochs": null, "val_fraction": 0.1, "balance_hs_classes": true,
//                 "mape_floor": 0.01},
//    "cv": {"k": 5, "max_folds": null},
//    "evaluation": {"mape_exclude_below": 0.01},
//    "seed": 0}
// Every key is optional except "manifest"; unknown keys are rejected.
// n_features comes from the data and n_w from "window", so the two model
// sections carry architecture sizes only.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "rul/data/cell.hpp"
#include "rul/hs/classifier.hpp"
#include "rul/hs/trigger.hpp"
#include "rul/stman/model.hpp"
#include "rul/tensor/adam.hpp"

namespace rul::harness {

struct ExperimentConfig {
    std::filesystem::path manifest;
    std::optional<data::Schema> schema;  // overrides the manifest's per-cell schema

    std::size_t n_window = 50;
    std::size_t step = 1;
    double hs_label_fraction = 0.10;  // p

    hs::TriggerConfig trigger;
    hs::HsConfig hs_model;
    stman::StManConfig stman;
    AdamConfig optimizer;

    std::size_t batch_size = 8;
    std::size_t epochs = 100;
    std::size_t patience = 20;
    std::optional<std::size_t> hs_epochs;   // per-stage override of `epochs`
    std::optional<std::size_t> rul_epochs;
    double val_fraction = 0.1;  // training cells held out for early stopping
    bool balance_hs_classes = true;
    double mape_floor = 0.01;  // denominator floor in the Stage-2 training loss

    std::size_t k = 5;
    std::optional<std::size_t> max_folds;  // run only the first folds
    double mape_exclude_below = 0.01;
    std::uint64_t seed = 0;

    std::size_t hs_epoch_count() const { return hs_epochs.value_or(epochs); }
    std::size_t rul_epoch_count() const { return rul_epochs.value_or(epochs); }

    /// Throws UsageError naming the offending field path.
    void validate() const;
    nlohmann::json to_json() const;
    /// Strict parse; relative manifest paths resolve against `base_dir`.
    /// Throws UsageError with the field path on a type error or unknown key.
    static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    /// Reads and parses a config file. Throws DataError when unreadable.
    static ExperimentConfig load(const std::filesystem::path& path);
};

/// Model configs with n_features / n_window filled in.
hs::HsConfig resolved_hs_config(const ExperimentConfig& config, std::size_t n_features);
stman::StManConfig resolved_stman_config(const ExperimentConfig& config, std::size_t n_features);

}  // namespace rul::harness
