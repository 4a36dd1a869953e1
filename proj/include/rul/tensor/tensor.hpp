#pragma once

// Dense float64 tensor with tape-based reverse-mode differentiation.
//
// Every op that consumes at least one tensor with requires_grad() records a
// node holding its inputs and a backward closure. backward(loss) walks the
// recorded graph in reverse topological order. Graph lifetime is tied to the
// tensors that reference it; dropping the loss frees the tape.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rul {

using Shape = std::vector<std::size_t>;

std::size_t numel_of(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until needed (leaves allocate eagerly)
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void(Node&)> backward;

    std::vector<double>& ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
        return grad;
    }
};

}  // namespace detail

class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const noexcept { return static_cast<bool>(node_); }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t numel() const;

    std::span<const double> data() const;
    /// Mutable access for optimizers and initializers. Mutating a tensor that
    /// is already part of a recorded graph invalidates that graph.
    std::span<double> mutable_data();
    double item() const;
    double at(std::size_t flat_index) const { return data()[flat_index]; }

    bool requires_grad() const;
    /// Gradient accumulator; empty span if none has been allocated yet.
    std::span<const double> grad() const;
    std::span<double> mutable_grad();
    bool has_grad() const;
    void zero_grad();

    /// Copy of the values with no graph history.
    Tensor detach() const;

    detail::Node* node() const noexcept { return node_.get(); }
    const std::shared_ptr<detail::Node>& node_ptr() const noexcept { return node_; }
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

private:
    std::shared_ptr<detail::Node> node_;
};

/// Reverse pass from a scalar loss. Parameter grads accumulate across calls;
/// intermediate grads are reset at the start of each call.
void backward(const Tensor& loss);

bool grad_mode_enabled() noexcept;

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

struct Parameter {
    std::string name;
    Tensor tensor;
};

using ParameterList = std::vector<Parameter>;

void zero_grad(const ParameterList& params);
std::size_t count_scalars(const ParameterList& params);

namespace detail {

// Builds an op result. Records the graph edge only when grad mode is on and
// some input requires grad; otherwise returns a plain constant.
Tensor make_result(Shape shape, std::vector<double> values, const char* op,
                   std::vector<Tensor> inputs, std::function<void(Node&)> backward_fn);

}  // namespace detail

}  // namespace rul
