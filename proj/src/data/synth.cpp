#include "rul/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <json.hpp>

#include "rul/data/manifest.hpp"
#include "rul/error.hpp"

namespace rul::data {

void SynthSpec::validate() const {
    if (n_cells == 0) throw UsageError("synthetic spec: n_cells must be positive");
    if (eol_min < 200) throw UsageError("synthetic spec: eol_min must be at least 200, got " + std::to_string(eol_min));
    if (eol_max < eol_min) {
        throw UsageError("synthetic spec: eol_max (" + std::to_string(eol_max) + ") is below eol_min (" +
                         std::to_string(eol_min) + ")");
    }
    if (!(exponent_min > 3.0) || exponent_max < exponent_min) {
        throw UsageError("synthetic spec: exponent range must satisfy 3 < min <= max");
    }
    if (!(nominal_capacity > 0.0)) throw UsageError("synthetic spec: nominal capacity must be positive");
    if (!(capacity_spread >= 0.0 && capacity_spread < 0.2)) {
        throw UsageError("synthetic spec: capacity_spread must lie in [0, 0.2)");
    }
    if (capacity_noise < 0 || resistance_noise < 0 || temperature_noise < 0 || time_noise < 0) {
        throw UsageError("synthetic spec: noise levels must be non-negative");
    }
}

double capacity_fraction(double x, double exponent, double fade) { return 1.0 - fade * std::pow(x, exponent); }

double knee_fraction(double exponent, double fade) {
    const double b = exponent;
    const double slope = std::sqrt((b - 2.0) / (2.0 * b - 1.0));
    return std::pow(slope / (fade * b), 1.0 / (b - 1.0));
}

int knee_cycle(int eol, double exponent, double fade) {
    const auto j = static_cast<int>(std::lround(knee_fraction(exponent, fade) * eol));
    return std::clamp(j, 1, eol);
}

std::vector<SynthCell> generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 master(spec.seed);
    std::vector<SynthCell> out;
    out.reserve(spec.n_cells);
    const int width = std::max<int>(3, static_cast<int>(std::to_string(spec.n_cells).size()));

    for (std::size_t i = 0; i < spec.n_cells; ++i) {
        std::mt19937_64 rng(master());
        std::uniform_int_distribution<int> eol_dist(spec.eol_min, spec.eol_max);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);

        const int eol = eol_dist(rng);
        const double b = spec.exponent_min + (spec.exponent_max - spec.exponent_min) * unit(rng);
        const double q0 = spec.nominal_capacity * (1.0 + spec.capacity_spread * (2.0 * unit(rng) - 1.0));
        const double r0 = 0.016 * (0.99 + 0.02 * unit(rng));
        const double t0 = 10.0 * (0.99 + 0.02 * unit(rng));
        const double temp0 = 30.9 + 0.2 * unit(rng);
        const double coulombic = 1.0025 + 0.001 * unit(rng);

        char id[64];
        std::snprintf(id, sizeof id, "%s-%0*zu", spec.id_prefix.c_str(), width, i + 1);
        SynthCell sc{{id, Schema::synth, {}}, knee_cycle(eol, b), b, q0};
        sc.cell.cycles.reserve(static_cast<std::size_t>(eol));

        const double knee_x = knee_fraction(b);
        for (int j = 1; j <= eol; ++j) {
            const double x = static_cast<double>(j) / eol;
            const double shape = std::pow(x, b);  // 0 -> 1, steep after the knee
            const double q_clean = q0 * (1.0 - kFadeAtEol * shape);
            const double after_knee = std::max(0.0, (x - knee_x) / (1.0 - knee_x));  // 0 until the knee, 1 at EOL

            const double discharge = q_clean + spec.capacity_noise * q0 * gauss(rng);
            const double resistance =
                r0 * (1.0 + 0.25 * after_knee) * (1.0 + spec.resistance_noise * gauss(rng));
            const double charge = q_clean * coulombic + spec.capacity_noise * q0 * gauss(rng);
            const double temp_avg = temp0 + spec.temperature_noise * (2.0 * unit(rng) - 1.0);
            const double temp_min = temp_avg - 1.5 - spec.temperature_noise * unit(rng);
            const double temp_max = temp_avg + 3.0 + spec.temperature_noise * unit(rng);
            const double charge_time = t0 * (1.0 + 0.02 * shape) * (1.0 + spec.time_noise * gauss(rng));
            sc.cell.cycles.push_back({discharge, resistance, charge, temp_avg, temp_min, temp_max, charge_time});
        }
        out.push_back(std::move(sc));
    }
    return out;
}

std::filesystem::path write_synthetic_corpus(const std::filesystem::path& dir, const std::vector<SynthCell>& cells) {
    std::filesystem::create_directories(dir / "cells");
    std::vector<ManifestEntry> entries;
    nlohmann::json knees = nlohmann::json::array();
    for (const auto& sc : cells) {
        const std::filesystem::path rel = std::filesystem::path("cells") / (sc.cell.cell_id + ".csv");
        write_cell_csv(dir / rel, sc.cell);
        entries.push_back({sc.cell.cell_id, rel, Schema::synth, sc.knee_cycle});
        knees.push_back({{"cell_id", sc.cell.cell_id},
                         {"eol", sc.cell.eol()},
                         {"knee_cycle", sc.knee_cycle},
                         {"exponent", sc.exponent},
                         {"initial_capacity", sc.initial_capacity}});
    }
    const auto manifest = dir / "manifest.json";
    write_manifest(manifest, entries);
    std::ofstream out(dir / "knees.json");
    out << nlohmann::json{{"format", "rul-synth-knees"}, {"version", 1}, {"cells", knees}}.dump(2) << "\n";
    if (!out) throw DataError("cannot write " + (dir / "knees.json").string());
    return manifest;
}

}  // namespace rul::data
