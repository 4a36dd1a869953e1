#pragma once

// Differentiable primitives. All ops return fresh tensors; inputs are never
// mutated. Shape errors throw ShapeError naming the op and the shapes.

#include <cstddef>
#include <vector>

#include "rul/tensor/tensor.hpp"

namespace rul::ops {

// Elementwise binary ops with numpy-style broadcasting.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& x, double s);
Tensor add_scalar(const Tensor& x, double s);
Tensor neg(const Tensor& x);

/// [.., m, k] x [k, n] -> [.., m, n] (leading dims flattened), or batched
/// [g, m, k] x [g, k, n] -> [g, m, n].
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);
Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& order);
Tensor transpose(const Tensor& x, std::size_t axis_a, std::size_t axis_b);

/// Depthwise 1-D convolution over the last (time) axis with "same" zero
/// padding. x is [C, T] or [B, C, T]; kernels is [C*M, K]. Output channel
/// c*M + m reads only input channel c. Cross-correlation convention.
Tensor conv1d_depthwise(const Tensor& x, const Tensor& kernels);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);
/// Exact GELU, x * Phi(x).
Tensor gelu(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
/// Gradient at 0 is taken as 0 (keeps RMSE finite at a perfect fit).
Tensor sqrt(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor square(const Tensor& x);
/// Clamp into [lo, hi]; gradient is zero where the clamp is active.
Tensor clamp(const Tensor& x, double lo, double hi);

Tensor softmax(const Tensor& x, std::size_t axis);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor sum(const Tensor& x, std::size_t axis, bool keepdim = false);
Tensor mean(const Tensor& x, std::size_t axis, bool keepdim = false);

/// Whole-sequence LSTM recurrence as one graph node. gates_x is the
/// input-side pre-activation x W_ih + b, time-major [T, B, 4h] in gate order
/// i, f, g, o; w_hh is [h, 4h]. Zero initial state. Returns h_1..h_T as
/// [T, B, h]. Same math as chaining nn::lstm_cell, far fewer tape nodes.
Tensor lstm_recurrence(const Tensor& gates_x, const Tensor& w_hh);

}  // namespace rul::ops

namespace rul {

inline Tensor operator+(const Tensor& a, const Tensor& b) { return ops::add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return ops::sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return ops::mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return ops::div(a, b); }
inline Tensor operator*(const Tensor& a, double s) { return ops::scale(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return ops::scale(a, s); }

}  // namespace rul
