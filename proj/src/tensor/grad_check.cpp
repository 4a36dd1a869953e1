#include "rul/tensor/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "rul/error.hpp"

namespace rul {

GradCheckResult grad_check(const std::function<Tensor()>& f, const std::vector<Tensor>& inputs, double h) {
    for (auto t : inputs) {
        if (!t.requires_grad()) throw Error("grad_check: every input must require grad");
        t.zero_grad();
    }
    backward(f());

    std::vector<std::vector<double>> analytic;
    analytic.reserve(inputs.size());
    for (const auto& t : inputs) analytic.emplace_back(t.grad().begin(), t.grad().end());

    GradCheckResult result;
    NoGradGuard no_grad;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        auto t = inputs[i];
        auto w = t.mutable_data();
        double diff2 = 0.0, norm2 = 0.0, worst_diff = -1.0;
        std::size_t worst = 0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double saved = w[j];
            w[j] = saved + h;
            const double up = f().item();
            w[j] = saved - h;
            const double down = f().item();
            w[j] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double d = std::abs(analytic[i][j] - numeric);
            diff2 += d * d;
            norm2 += numeric * numeric;
            if (d > worst_diff) {
                worst_diff = d;
                worst = j;
            }
        }
        const double err = std::sqrt(diff2) / std::max(1e-6, std::sqrt(norm2));
        if (err > result.max_rel_error) result = {err, i, worst};
    }
    return result;
}

GradCheckResult grad_check(const std::function<Tensor()>& f, const ParameterList& params, double h) {
    std::vector<Tensor> inputs;
    inputs.reserve(params.size());
    for (const auto& p : params) inputs.push_back(p.tensor);
    return grad_check(f, inputs, h);
}

}  // namespace rul
