#include "rul/stman/complexity.hpp"

namespace rul::stman {

ParameterCount count_parameters(const StManModel& model) {
    ParameterCount count;
    for (const auto& p : model.parameters()) {
        // "stman.<stage>.<rest>"
        const auto first = p.name.find('.');
        const auto second = p.name.find('.', first + 1);
        const std::string stage = p.name.substr(first + 1, second == std::string::npos ? std::string::npos
                                                                                     : second - first - 1);
        count.by_stage[stage] += p.tensor.numel();
        count.total += p.tensor.numel();
    }
    return count;
}

std::size_t estimate_flops(const StManConfig& c) {
    const std::size_t nf = c.n_features, nw = c.n_window, d = c.d_model;
    std::size_t macs = 0;
    macs += nf * d * nw * c.k;                        // depthwise conv
    const std::size_t per_step = 4 * nf * d * d       // q, k, v, o projections
                                 + 2 * nf * nf * d    // scores and weighted values
                                 + 2 * nf * d * 2 * d;  // feed-forward
    macs += nw * per_step;
    macs += nw * nf * d * c.d_fuse;                   // fusion
    macs += nw * 4 * c.d_h * (c.d_fuse + c.d_h);      // LSTM gates
    macs += c.d_h * c.d_h + nw * c.d_h * c.d_h        // query and key projections
            + 2 * nw * c.d_h;                         // scores and context
    macs += c.d_h;                                    // output layer
    return 2 * macs;
}

nlohmann::json complexity_json(const StManModel& model) {
    const auto count = count_parameters(model);
    return {{"parameters", count.total},
            {"parameters_by_stage", count.by_stage},
            {"flops_per_window", estimate_flops(model.config())},
            {"flops_convention", "2 per multiply-add in conv/linear/attention/LSTM products"}};
}

}  // namespace rul::stman
