#pragma once

#include <cstdint>
#include <vector>

#include "rul/tensor/tensor.hpp"

namespace rul {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double eps = 1e-8;
};

/// Adam with bias correction. Moment buffers are created lazily on the first
/// step and mirror each parameter's shape; the parameter list must keep the
/// same order across steps.
class Adam {
public:
    explicit Adam(AdamConfig config = {}) : config_(config) {}

    /// Applies one update from the current grads. Grads are left untouched.
    /// Throws TrainingError naming the parameter if a grad is missing.
    void step(const ParameterList& params);

    const AdamConfig& config() const noexcept { return config_; }
    std::int64_t step_count() const noexcept { return step_count_; }
    const std::vector<std::vector<double>>& first_moments() const noexcept { return m_; }
    const std::vector<std::vector<double>>& second_moments() const noexcept { return v_; }

private:
    AdamConfig config_;
    std::int64_t step_count_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace rul
