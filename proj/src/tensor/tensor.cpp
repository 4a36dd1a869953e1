#include "rul/tensor/tensor.hpp"

#include <unordered_set>

#include "rul/error.hpp"

namespace rul {

namespace {
thread_local bool g_grad_mode = true;
}

std::size_t numel_of(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

bool grad_mode_enabled() noexcept { return g_grad_mode; }

NoGradGuard::NoGradGuard() : previous_(g_grad_mode) { g_grad_mode = false; }
NoGradGuard::~NoGradGuard() { g_grad_mode = previous_; }

// ----------------------------------------------------------------------------
// Tensor
// ----------------------------------------------------------------------------

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    if (numel_of(shape) != values.size()) {
        throw ShapeError("Tensor::from: shape " + shape_str(shape) + " holds " +
                         std::to_string(numel_of(shape)) + " values, got " +
                         std::to_string(values.size()));
    }
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->data = std::move(values);
    node->requires_grad = requires_grad;
    if (requires_grad) node->ensure_grad();
    return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    const auto n = numel_of(shape);
    return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

const Shape& Tensor::shape() const {
    if (!node_) throw Error("use of undefined tensor");
    return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
    const auto& s = shape();
    if (axis >= s.size()) throw ShapeError("dim: axis " + std::to_string(axis) + " out of range for " + shape_str(s));
    return s[axis];
}

std::size_t Tensor::numel() const { return numel_of(shape()); }

std::span<const double> Tensor::data() const {
    if (!node_) throw Error("use of undefined tensor");
    return node_->data;
}

std::span<double> Tensor::mutable_data() {
    if (!node_) throw Error("use of undefined tensor");
    return node_->data;
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item: expected one element, shape " + shape_str(shape()));
    return node_->data[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

std::span<const double> Tensor::grad() const {
    if (!node_) throw Error("use of undefined tensor");
    return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
    if (!node_) throw Error("use of undefined tensor");
    return node_->ensure_grad();
}

bool Tensor::has_grad() const { return node_ && node_->grad.size() == node_->data.size(); }

void Tensor::zero_grad() {
    if (node_ && node_->requires_grad) node_->grad.assign(node_->data.size(), 0.0);
}

Tensor Tensor::detach() const { return from(shape(), node_->data, false); }

// ----------------------------------------------------------------------------
// Graph
// ----------------------------------------------------------------------------

namespace detail {

Tensor make_result(Shape shape, std::vector<double> values, const char* op, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward_fn) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->data = std::move(values);
    node->op = op;
    if (g_grad_mode) {
        bool any = false;
        for (const auto& t : inputs) any = any || t.requires_grad();
        if (any) {
            node->requires_grad = true;
            node->inputs.reserve(inputs.size());
            for (auto& t : inputs) node->inputs.push_back(t.node_ptr());
            node->backward = std::move(backward_fn);
        }
    }
    return Tensor(std::move(node));
}

}  // namespace detail

void backward(const Tensor& loss) {
    if (!loss.defined()) throw Error("backward: undefined loss");
    if (loss.numel() != 1) throw ShapeError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    auto* root = loss.node();
    if (!root->requires_grad) throw Error("backward: loss is not connected to any parameter");

    // Iterative post-order DFS gives a topological order (inputs before users).
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> visited;
    std::vector<std::pair<detail::Node*, std::size_t>> stack{{root, 0}};
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            auto* child = node->inputs[next++].get();
            if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (auto* n : order) {
        if (n->backward) n->grad.assign(n->data.size(), 0.0);
    }
    root->ensure_grad()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backward) (*it)->backward(**it);
    }
}

void zero_grad(const ParameterList& params) {
    for (const auto& p : params) {
        auto t = p.tensor;
        t.zero_grad();
    }
}

std::size_t count_scalars(const ParameterList& params) {
    std::size_t n = 0;
    for (const auto& p : params) n += p.tensor.numel();
    return n;
}

}  // namespace rul
