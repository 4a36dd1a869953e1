#pragma once

#include <functional>
#include <vector>

#include "rul/tensor/tensor.hpp"

namespace rul {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t worst_input = 0;    // index into the input list
    std::size_t worst_element = 0;  // largest absolute difference within it
};

/// Compares reverse-mode gradients of a scalar function against central
/// differences (step h) at the current values of `inputs`. The error of an
/// input tensor is ||analytic - numeric|| / max(1e-6, ||numeric||), 2-norms
/// over its elements; the result holds the worst tensor. Per element, tiny
/// gradients would be judged on truncation and cancellation noise alone.
///
/// `f` must rebuild its graph from `inputs` on every call; the input tensors
/// are perturbed in place and restored before returning.
GradCheckResult grad_check(const std::function<Tensor()>& f, const std::vector<Tensor>& inputs, double h = 1e-4);

/// Same check over every parameter of a model.
GradCheckResult grad_check(const std::function<Tensor()>& f, const ParameterList& params, double h = 1e-4);

}  // namespace rul
