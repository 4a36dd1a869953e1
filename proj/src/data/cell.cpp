#include "rul/data/cell.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rul/error.hpp"

namespace rul::data {

namespace {

const std::vector<std::string> kMit7 = {"discharge_capacity", "internal_resistance", "charge_capacity", "temp_avg",
                                        "temp_min",           "temp_max",            "charge_time"};
const std::vector<std::string> kHustBase = {"charge_voltage", "discharge_capacity", "charge_capacity"};
const std::vector<std::string> kHust5 = {"charge_voltage", "discharge_capacity", "charge_capacity", "delta_v10",
                                         "delta_q10"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool parse_double(std::string_view text, double& out) {
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

}  // namespace

std::string_view to_string(Schema schema) {
    switch (schema) {
        case Schema::mit7: return "MIT7";
        case Schema::hust_base: return "HUST_BASE";
        case Schema::hust5: return "HUST5";
        case Schema::synth: return "SYNTH";
    }
    return "?";
}

Schema parse_schema(std::string_view text) {
    std::string upper(text);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    if (upper == "MIT7") return Schema::mit7;
    if (upper == "HUST5") return Schema::hust5;
    if (upper == "SYNTH") return Schema::synth;
    throw DataError("unknown schema '" + std::string(text) + "' (expected MIT7, HUST5 or SYNTH)");
}

const std::vector<std::string>& feature_names(Schema schema) {
    switch (schema) {
        case Schema::mit7:
        case Schema::synth: return kMit7;
        case Schema::hust_base: return kHustBase;
        case Schema::hust5: return kHust5;
    }
    return kMit7;
}

void CellSeries::validate() const {
    if (cycles.empty()) throw DataError("cell '" + cell_id + "' has no cycles");
    const auto expected = feature_names(schema).size();
    for (std::size_t i = 0; i < cycles.size(); ++i) {
        if (cycles[i].size() != expected) {
            throw DataError("cell '" + cell_id + "' cycle " + std::to_string(i + 1) + " has " +
                            std::to_string(cycles[i].size()) + " features, schema " + std::string(to_string(schema)) +
                            " needs " + std::to_string(expected));
        }
    }
}

CellSeries load_cell_csv(const std::filesystem::path& path, Schema schema, std::string cell_id) {
    const std::string where = path.string();
    std::ifstream in(path);
    if (!in) throw DataError("cannot open cell file " + where);
    if (schema == Schema::hust5) schema = Schema::hust_base;
    const auto& wanted = feature_names(schema);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(where, 0, "empty file");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_csv(line);
    auto column_of = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError(where, 0, "missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t cycle_col = column_of("cycle");
    std::vector<std::size_t> cols;
    for (const auto& name : wanted) cols.push_back(column_of(name));

    CellSeries cell;
    cell.cell_id = cell_id.empty() ? path.stem().string() : std::move(cell_id);
    cell.schema = schema;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto fields = split_csv(line);
        if (fields.size() != header.size()) {
            throw ParseError(where, row, "expected " + std::to_string(header.size()) + " fields, found " +
                                             std::to_string(fields.size()));
        }
        double cycle_value = 0.0;
        if (!parse_double(fields[cycle_col], cycle_value) || cycle_value != std::floor(cycle_value)) {
            throw ParseError(where, row, "non-integer cycle '" + std::string(fields[cycle_col]) + "'");
        }
        const auto expected = static_cast<long long>(row);
        const auto cycle = static_cast<long long>(cycle_value);
        if (cycle > expected) throw ParseError(where, row, "gap at cycle " + std::to_string(expected));
        if (cycle < expected) {
            throw ParseError(where, row, "cycle index not increasing (got " + std::to_string(cycle) + ", expected " +
                                             std::to_string(expected) + ")");
        }
        std::vector<double> values(cols.size());
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (!parse_double(fields[cols[k]], values[k])) {
                throw ParseError(where, row,
                                 "non-numeric value '" + std::string(fields[cols[k]]) + "' in column '" + wanted[k] + "'");
            }
        }
        cell.cycles.push_back(std::move(values));
    }
    if (cell.cycles.empty()) throw ParseError(where, 0, "no data rows");
    return cell;
}

CellSeries load_cell(const std::filesystem::path& path, Schema schema, std::string cell_id) {
    auto cell = load_cell_csv(path, schema, std::move(cell_id));
    return schema == Schema::hust5 ? build_hust_features(cell) : cell;
}

void write_cell_csv(const std::filesystem::path& path, const CellSeries& cell) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "cycle";
    for (const auto& name : feature_names(cell.schema)) out << ',' << name;
    out << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < cell.cycles.size(); ++i) {
        out << i + 1;
        for (double v : cell.cycles[i]) out << ',' << v;
        out << '\n';
    }
    if (!out) throw DataError("failed writing " + path.string());
}

CellSeries build_hust_features(const CellSeries& base) {
    if (base.schema != Schema::hust_base) {
        throw DataError("build_hust_features: cell '" + base.cell_id + "' is not a HUST base record");
    }
    if (base.eol() < 10) {
        throw DataError("build_hust_features: cell '" + base.cell_id + "' has " + std::to_string(base.eol()) +
                        " cycles, needs at least 10");
    }
    constexpr std::size_t kVoltage = 0, kChargeCap = 2;
    const double v10 = base.value(10, kVoltage);
    const double q10 = base.value(10, kChargeCap);
    CellSeries out{base.cell_id, Schema::hust5, {}};
    out.cycles.reserve(base.cycles.size());
    for (const auto& c : base.cycles) {
        auto row = c;
        row.push_back(c[kVoltage] - v10);
        row.push_back(c[kChargeCap] - q10);
        out.cycles.push_back(std::move(row));
    }
    return out;
}

}  // namespace rul::data
