#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace rul::data {

/// Cell-level train/test partition for one cross-validation fold.
struct Fold {
    std::size_t index = 0;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    static Fold from_json(const nlohmann::json& j);
};

/// Shuffles the cells with `seed` and cuts k contiguous test blocks; the first
/// n % k folds get one extra cell. Within a fold both id lists keep the input
/// order. Requires 2 <= k <= ids.size() and unique ids.
std::vector<Fold> kfold_split(const std::vector<std::string>& ids, std::size_t k, std::uint64_t seed);

/// Holds out round(fraction * n) cells (at least one when n >= 2) for early
/// stopping. Returns {train, validation}.
std::pair<std::vector<std::string>, std::vector<std::string>> split_validation(const std::vector<std::string>& ids,
                                                                               double fraction, std::uint64_t seed);

}  // namespace rul::data
