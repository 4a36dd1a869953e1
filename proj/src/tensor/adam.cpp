#include "rul/tensor/adam.hpp"

#include <cmath>

#include "rul/error.hpp"

namespace rul {

void Adam::step(const ParameterList& params) {
    for (const auto& p : params) {
        if (!p.tensor.has_grad()) throw TrainingError("adam: parameter '" + p.name + "' has no gradient");
    }
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.emplace_back(p.tensor.numel(), 0.0);
            v_.emplace_back(p.tensor.numel(), 0.0);
        }
    } else if (m_.size() != params.size()) {
        throw TrainingError("adam: parameter list changed size between steps");
    }

    ++step_count_;
    const double t = static_cast<double>(step_count_);
    const double bc1 = 1.0 - std::pow(config_.beta1, t);
    const double bc2 = 1.0 - std::pow(config_.beta2, t);

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto tensor = params[i].tensor;
        auto w = tensor.mutable_data();
        auto g = tensor.grad();
        auto& m = m_[i];
        auto& v = v_[i];
        if (m.size() != w.size()) throw TrainingError("adam: parameter '" + params[i].name + "' changed shape");
        for (std::size_t j = 0; j < w.size(); ++j) {
            m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
            v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            w[j] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
        }
    }
}

}  // namespace rul
