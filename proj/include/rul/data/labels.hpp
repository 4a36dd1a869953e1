#pragma once

#include <optional>
#include <vector>

namespace rul::data {

/// Health-state labels indexed by cycle - 1: the first floor(eol*p) cycles
/// are healthy (0), the last floor(eol*p) unhealthy (1), the rest unlabeled.
/// Requires 0 < p < 0.5.
std::vector<std::optional<int>> label_hs(int eol, double p);

/// Number of labeled cycles at each end, floor(eol * p).
int hs_label_count(int eol, double p);

/// RUL percentage labels indexed by cycle - 1: (eol - j) / (eol - fpc) for
/// j >= fpc, empty before. Requires 1 <= fpc < eol.
std::vector<std::optional<double>> label_rul(int eol, int fpc);

/// Per-cycle labels carried into windows by their end cycle.
struct CycleLabels {
    std::vector<std::optional<int>> hs;
    std::vector<std::optional<double>> rul;
};

}  // namespace rul::data
