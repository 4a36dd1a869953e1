#include "rul/data/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "rul/error.hpp"

namespace rul::data {

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), 0, e.what());
    }
    const nlohmann::json& cells = j.is_array() ? j : j.at("cells");
    std::vector<ManifestEntry> out;
    std::set<std::string> seen;
    const auto base = path.parent_path();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        try {
            ManifestEntry e{c.at("cell_id").get<std::string>(), c.at("path").get<std::string>(),
                            parse_schema(c.at("schema").get<std::string>()), std::nullopt};
            if (e.path.is_relative()) e.path = base / e.path;
            if (c.contains("knee_cycle") && !c["knee_cycle"].is_null()) e.knee_cycle = c["knee_cycle"].get<int>();
            if (!seen.insert(e.cell_id).second) throw DataError("duplicate cell_id '" + e.cell_id + "'");
            out.push_back(std::move(e));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string(), i + 1, std::string("cells[") + std::to_string(i) + "]: " + e.what());
        }
    }
    if (out.empty()) throw DataError("manifest " + path.string() + " lists no cells");
    return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json c{{"cell_id", e.cell_id}, {"path", e.path.generic_string()}, {"schema", to_string(e.schema)}};
        if (e.knee_cycle) c["knee_cycle"] = *e.knee_cycle;
        cells.push_back(std::move(c));
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest " + path.string());
    out << nlohmann::json{{"format", "rul-manifest"}, {"version", 1}, {"cells", cells}}.dump(2) << '\n';
}

std::vector<CellSeries> load_dataset(const std::filesystem::path& manifest_path,
                                     std::optional<Schema> schema_override) {
    std::vector<CellSeries> cells;
    for (const auto& e : read_manifest(manifest_path)) {
        auto cell = load_cell(e.path, schema_override.value_or(e.schema), e.cell_id);
        cell.validate();
        cells.push_back(std::move(cell));
    }
    return cells;
}

}  // namespace rul::data
