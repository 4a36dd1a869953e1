#pragma once

// Synthetic capacity-fade corpus with a known knee.
//
// Discharge capacity follows q(j) = q0 * (1 - a * (j / EOL)^b) with a = 0.2,
// so the noise-free curve reaches 80% of q0 exactly at j = EOL. With b > 3
// the fade is flat early and accelerates late. The knee is the maximum of
// the curvature of the normalized curve y(x) = q / q0, x = j / EOL, which has
// the closed form
//     x* = ( sqrt((b - 2) / (2b - 1)) / (a b) )^(1 / (b - 1)).
// For b in [4, 8] that lands near 0.87 EOL, where 88-93% of q0 remains.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rul/data/cell.hpp"

namespace rul::data {

inline constexpr double kFadeAtEol = 0.2;

struct SynthSpec {
    std::size_t n_cells = 20;
    int eol_min = 400;
    int eol_max = 800;
    double exponent_min = 4.0;  // b range; the knee position follows from b
    double exponent_max = 8.0;
    double nominal_capacity = 1.1;   // Ah
    double capacity_spread = 0.0;    // per-cell q0 offset, uniform half-width, fraction of nominal
    double capacity_noise = 0.002;   // Gaussian sigma, fraction of q0
    double resistance_noise = 0.01;  // Gaussian sigma, fraction of r0
    double temperature_noise = 0.5;  // uniform half-width, deg C
    double time_noise = 0.005;       // Gaussian sigma, fraction of t0
    std::uint64_t seed = 0;
    std::string id_prefix = "synth";

    /// Throws UsageError on an inconsistent spec (eol_min < 200, min > max, ...).
    void validate() const;
};

struct SynthCell {
    CellSeries cell;  // Schema::synth, MIT7 column order
    int knee_cycle = 0;
    double exponent = 0.0;
    double initial_capacity = 0.0;  // q0
};

/// Fraction of q0 remaining at life fraction x (noise-free).
double capacity_fraction(double x, double exponent, double fade = kFadeAtEol);
/// Life fraction of maximum curvature of the normalized fade curve.
double knee_fraction(double exponent, double fade = kFadeAtEol);
/// knee_fraction scaled to a cycle index in [1, eol].
int knee_cycle(int eol, double exponent, double fade = kFadeAtEol);

std::vector<SynthCell> generate_synthetic(const SynthSpec& spec);

/// Writes dir/cells/<id>.csv, dir/manifest.json (with knee_cycle) and
/// dir/knees.json. Returns the manifest path.
std::filesystem::path write_synthetic_corpus(const std::filesystem::path& dir, const std::vector<SynthCell>& cells);

}  // namespace rul::data
