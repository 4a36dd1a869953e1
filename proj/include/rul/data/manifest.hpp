#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rul/data/cell.hpp"

namespace rul::data {

// Dataset manifest (JSON):
//   {"format": "rul-manifest", "version": 1,
//    "cells": [{"cell_id": "...", "path": "cells/a.csv", "schema": "MIT7"}, ...]}
// Synthetic corpora add "knee_cycle" per cell (ground truth, optional).
// A bare array of cell entries is also accepted. Relative paths resolve
// against the manifest's directory.

struct ManifestEntry {
    std::string cell_id;
    std::filesystem::path path;
    Schema schema = Schema::mit7;
    std::optional<int> knee_cycle;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

/// Loads every cell (HUST5 features built) in manifest order. A non-empty
/// `schema_override` replaces each entry's schema.
std::vector<CellSeries> load_dataset(const std::filesystem::path& manifest_path,
                                     std::optional<Schema> schema_override = std::nullopt);

}  // namespace rul::data
