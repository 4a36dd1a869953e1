#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rul::data {

/// Column layout of a cell record.
///   mit7:      discharge_capacity, internal_resistance, charge_capacity,
///              temp_avg, temp_min, temp_max, charge_time
///   hust_base: charge_voltage, discharge_capacity, charge_capacity (as read)
///   hust5:     hust_base + delta_v10, delta_q10 (after build_hust_features)
///   synth:     same columns as mit7, produced by the generator
enum class Schema { mit7, hust_base, hust5, synth };

std::string_view to_string(Schema schema);
/// Accepts "MIT7", "HUST5", "SYNTH" (case-insensitive).
Schema parse_schema(std::string_view text);
const std::vector<std::string>& feature_names(Schema schema);

/// One cell's per-cycle record. cycles[i] holds the features of cycle i + 1;
/// the observed end of life is the number of cycles.
struct CellSeries {
    std::string cell_id;
    Schema schema = Schema::mit7;
    std::vector<std::vector<double>> cycles;

    int eol() const { return static_cast<int>(cycles.size()); }
    std::size_t n_features() const { return cycles.empty() ? 0 : cycles.front().size(); }
    double value(int cycle, std::size_t feature) const { return cycles[static_cast<std::size_t>(cycle - 1)][feature]; }
    /// Throws DataError if the record breaks a CellSeries invariant.
    void validate() const;
};

/// Reads `cycle,<feature columns>` CSV. For HUST5 the three base columns are
/// read and the result has Schema::hust_base; see build_hust_features.
/// Extra columns are ignored. Throws ParseError with the row number on a
/// missing column, a non-numeric value or a gap in the cycle index.
CellSeries load_cell_csv(const std::filesystem::path& path, Schema schema, std::string cell_id = {});

/// load_cell_csv followed by build_hust_features when the schema is HUST5.
CellSeries load_cell(const std::filesystem::path& path, Schema schema, std::string cell_id = {});

void write_cell_csv(const std::filesystem::path& path, const CellSeries& cell);

/// Appends dV = V_i - V_10 and dQ = Q_i - Q_10 (charge voltage, charge capacity).
CellSeries build_hust_features(const CellSeries& base);

}  // namespace rul::data
