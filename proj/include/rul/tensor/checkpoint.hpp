#pragma once

// Parameter checkpoints.
//
// File layout (JSON, UTF-8):
//   {
//     "format": "rul-checkpoint",
//     "version": 1,
//     "kind": "<model kind>",          e.g. "hs-classifier", "stman"
//     "config": { ... },                model hyperparameters
//     "norm": { ... },                  normalization stats (may be null)
//     "params": { "<name>": { "shape": [d0, d1, ...], "data": [v0, v1, ...] }, ... }
//   }
// "data" is row-major; doubles are written with round-trip precision.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "rul/tensor/tensor.hpp"

namespace rul {

inline constexpr const char* kCheckpointFormat = "rul-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    std::string kind;
    nlohmann::json config;
    nlohmann::json norm;
    nlohmann::json params;
};

nlohmann::json params_to_json(const ParameterList& params);

/// Copies values into `params`. Every parameter must be present with the
/// same shape; extra entries are rejected.
void params_from_json(const nlohmann::json& j, const ParameterList& params);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace rul
