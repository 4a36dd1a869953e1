#include "rul/data/labels.hpp"

#include <cmath>
#include <string>

#include "rul/error.hpp"

namespace rul::data {

int hs_label_count(int eol, double p) {
    if (!(p > 0.0 && p < 0.5)) throw UsageError("label_hs: p must lie in (0, 0.5), got " + std::to_string(p));
    if (eol < 1) throw DataError("label_hs: eol must be positive");
    // The small tolerance keeps products like 300 * 0.1 from flooring to 29.
    return static_cast<int>(std::floor(static_cast<double>(eol) * p + 1e-9));
}

std::vector<std::optional<int>> label_hs(int eol, double p) {
    const int n = hs_label_count(eol, p);
    std::vector<std::optional<int>> labels(static_cast<std::size_t>(eol));
    for (int j = 1; j <= n; ++j) labels[static_cast<std::size_t>(j - 1)] = 0;
    for (int j = eol - n + 1; j <= eol; ++j) labels[static_cast<std::size_t>(j - 1)] = 1;
    return labels;
}

std::vector<std::optional<double>> label_rul(int eol, int fpc) {
    if (fpc < 1 || fpc >= eol) {
        throw DataError("label_rul: need 1 <= fpc < eol, got fpc=" + std::to_string(fpc) + " eol=" + std::to_string(eol));
    }
    std::vector<std::optional<double>> labels(static_cast<std::size_t>(eol));
    const double span = static_cast<double>(eol - fpc);
    for (int j = fpc; j <= eol; ++j) labels[static_cast<std::size_t>(j - 1)] = static_cast<double>(eol - j) / span;
    return labels;
}

}  // namespace rul::data
