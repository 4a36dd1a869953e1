#include "rul/data/folds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "rul/error.hpp"

namespace rul::data {

nlohmann::json Fold::to_json() const {
    return {{"fold_index", index}, {"train_ids", train_ids}, {"test_ids", test_ids}, {"seed", seed}};
}

Fold Fold::from_json(const nlohmann::json& j) {
    return {j.at("fold_index").get<std::size_t>(), j.at("train_ids").get<std::vector<std::string>>(),
            j.at("test_ids").get<std::vector<std::string>>(), j.at("seed").get<std::uint64_t>()};
}

namespace {

std::vector<std::size_t> shuffled_positions(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

}  // namespace

std::vector<Fold> kfold_split(const std::vector<std::string>& ids, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw UsageError("kfold_split: k must be at least 2");
    if (k > ids.size()) {
        throw UsageError("kfold_split: k=" + std::to_string(k) + " exceeds the number of cells (" +
                         std::to_string(ids.size()) + ")");
    }
    if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size()) {
        throw DataError("kfold_split: duplicate cell ids");
    }
    const auto order = shuffled_positions(ids.size(), seed);
    std::vector<std::size_t> fold_of(ids.size());
    const std::size_t base = ids.size() / k, extra = ids.size() % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) fold_of[order[pos++]] = f;
    }
    std::vector<Fold> folds(k);
    for (std::size_t f = 0; f < k; ++f) {
        folds[f].index = f;
        folds[f].seed = seed;
        for (std::size_t i = 0; i < ids.size(); ++i) (fold_of[i] == f ? folds[f].test_ids : folds[f].train_ids).push_back(ids[i]);
    }
    return folds;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_validation(const std::vector<std::string>& ids,
                                                                               double fraction, std::uint64_t seed) {
    std::size_t n_val = 0;
    if (ids.size() >= 2 && fraction > 0.0) {
        n_val = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(fraction * static_cast<double>(ids.size()))),
                                        1, ids.size() - 1);
    }
    const auto order = shuffled_positions(ids.size(), seed);
    std::vector<bool> held(ids.size(), false);
    for (std::size_t i = 0; i < n_val; ++i) held[order[i]] = true;
    std::pair<std::vector<std::string>, std::vector<std::string>> out;
    for (std::size_t i = 0; i < ids.size(); ++i) (held[i] ? out.second : out.first).push_back(ids[i]);
    return out;
}

}  // namespace rul::data
