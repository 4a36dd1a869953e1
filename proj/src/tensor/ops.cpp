#include "rul/tensor/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "rul/error.hpp"

namespace rul::ops {

using detail::Node;

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b, const std::string& why = {}) {
    std::string msg = std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b);
    if (!why.empty()) msg += " (" + why + ")";
    throw ShapeError(msg);
}

[[noreturn]] void axis_fail(const char* op, const Shape& s, std::size_t axis) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for shape " + shape_str(s));
}

// Product of dims in [begin, end).
std::size_t span_prod(const Shape& s, std::size_t begin, std::size_t end) {
    std::size_t n = 1;
    for (std::size_t i = begin; i < end; ++i) n *= s[i];
    return n;
}

Node& input(Node& self, std::size_t i) { return *self.inputs[i]; }

// ----------------------------------------------------------------------------
// Broadcasting
// ----------------------------------------------------------------------------

struct BroadcastPlan {
    enum class Kind { same, suffix_b, suffix_a, general };
    Kind kind = Kind::same;
    Shape out;
    std::size_t na = 0, nb = 0;
    std::vector<std::size_t> stride_a, stride_b;  // per output dim, 0 on broadcast dims
};

Shape strip_leading_ones(const Shape& s) {
    std::size_t i = 0;
    while (i + 1 < s.size() && s[i] == 1) ++i;
    return Shape(s.begin() + static_cast<std::ptrdiff_t>(i), s.end());
}

bool is_suffix(const Shape& small, const Shape& big) {
    auto s = strip_leading_ones(small);
    if (s.size() > big.size()) return false;
    return std::equal(s.rbegin(), s.rend(), big.rbegin());
}

BroadcastPlan plan_broadcast(const char* op, const Shape& a, const Shape& b) {
    BroadcastPlan p;
    p.na = numel_of(a);
    p.nb = numel_of(b);
    const std::size_t rank = std::max(a.size(), b.size());
    p.out.assign(rank, 1);
    Shape pa(rank, 1), pb(rank, 1);
    std::copy(a.begin(), a.end(), pa.begin() + static_cast<std::ptrdiff_t>(rank - a.size()));
    std::copy(b.begin(), b.end(), pb.begin() + static_cast<std::ptrdiff_t>(rank - b.size()));
    for (std::size_t i = 0; i < rank; ++i) {
        if (pa[i] == pb[i] || pb[i] == 1) {
            p.out[i] = pa[i];
        } else if (pa[i] == 1) {
            p.out[i] = pb[i];
        } else {
            shape_fail(op, a, b, "not broadcastable");
        }
    }
    if (a == b) {
        p.kind = BroadcastPlan::Kind::same;
        p.out = a;
        return p;
    }
    if (pa == p.out && is_suffix(b, p.out)) {
        p.kind = BroadcastPlan::Kind::suffix_b;
        return p;
    }
    if (pb == p.out && is_suffix(a, p.out)) {
        p.kind = BroadcastPlan::Kind::suffix_a;
        return p;
    }
    p.kind = BroadcastPlan::Kind::general;
    p.stride_a.assign(rank, 0);
    p.stride_b.assign(rank, 0);
    std::size_t sa = 1, sb = 1;
    for (std::size_t i = rank; i-- > 0;) {
        if (pa[i] != 1) p.stride_a[i] = sa;
        if (pb[i] != 1) p.stride_b[i] = sb;
        sa *= pa[i];
        sb *= pb[i];
    }
    return p;
}

template <class F>
void broadcast_loop(const BroadcastPlan& p, F&& f) {
    const std::size_t n = numel_of(p.out);
    switch (p.kind) {
        case BroadcastPlan::Kind::same:
            for (std::size_t i = 0; i < n; ++i) f(i, i, i);
            return;
        case BroadcastPlan::Kind::suffix_b:
            for (std::size_t i = 0; i < n; ++i) f(i, i, i % p.nb);
            return;
        case BroadcastPlan::Kind::suffix_a:
            for (std::size_t i = 0; i < n; ++i) f(i, i % p.na, i);
            return;
        case BroadcastPlan::Kind::general: {
            const std::size_t rank = p.out.size();
            std::vector<std::size_t> idx(rank, 0);
            std::size_t ia = 0, ib = 0;
            for (std::size_t i = 0; i < n; ++i) {
                f(i, ia, ib);
                for (std::size_t d = rank; d-- > 0;) {
                    ++idx[d];
                    ia += p.stride_a[d];
                    ib += p.stride_b[d];
                    if (idx[d] < p.out[d]) break;
                    ia -= p.stride_a[d] * idx[d];
                    ib -= p.stride_b[d] * idx[d];
                    idx[d] = 0;
                }
            }
            return;
        }
    }
}

// f(a, b) -> value; da(a, b) and db(a, b) are the partial derivatives.
template <class F, class DA, class DB>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, F f, DA da, DB db) {
    auto plan = std::make_shared<BroadcastPlan>(plan_broadcast(op, a.shape(), b.shape()));
    std::vector<double> out(numel_of(plan->out));
    const auto av = a.data();
    const auto bv = b.data();
    broadcast_loop(*plan, [&](std::size_t i, std::size_t ia, std::size_t ib) { out[i] = f(av[ia], bv[ib]); });
    return detail::make_result(plan->out, std::move(out), op, {a, b}, [plan, da, db](Node& self) {
        Node& na = input(self, 0);
        Node& nb = input(self, 1);
        const auto& g = self.grad;
        const auto& x = na.data;
        const auto& y = nb.data;
        if (na.requires_grad) {
            auto& gx = na.ensure_grad();
            broadcast_loop(*plan, [&](std::size_t i, std::size_t ia, std::size_t ib) { gx[ia] += g[i] * da(x[ia], y[ib]); });
        }
        if (nb.requires_grad) {
            auto& gy = nb.ensure_grad();
            broadcast_loop(*plan, [&](std::size_t i, std::size_t ia, std::size_t ib) { gy[ib] += g[i] * db(x[ia], y[ib]); });
        }
    });
}

// f(x) -> y; df(x, y) -> dy/dx.
template <class F, class DF>
Tensor unary(const char* op, const Tensor& x, F f, DF df) {
    const auto xv = x.data();
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
    return detail::make_result(x.shape(), std::move(out), op, {x}, [df](Node& self) {
        Node& nx = input(self, 0);
        auto& gx = nx.ensure_grad();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i] * df(nx.data[i], self.data[i]);
    });
}

// Copies a block of `inner` elements for every outer index between two
// buffers laid out as [outer, src_len, inner] and [outer, dst_len, inner].
struct AxisView {
    std::size_t outer, inner;
};

AxisView axis_view(const Shape& s, std::size_t axis) {
    return {span_prod(s, 0, axis), span_prod(s, axis + 1, s.size())};
}

}  // namespace

// ----------------------------------------------------------------------------
// Elementwise
// ----------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    return binary(
        "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
        [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary(
        "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
        [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary(
        "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
        [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return binary(
        "div", a, b, [](double x, double y) { return x / y; }, [](double, double y) { return 1.0 / y; },
        [](double x, double y) { return -x / (y * y); });
}

Tensor scale(const Tensor& x, double s) {
    return unary(
        "scale", x, [s](double v) { return s * v; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& x, double s) {
    return unary(
        "add_scalar", x, [s](double v) { return v + s; }, [](double, double) { return 1.0; });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor sigmoid(const Tensor& x) {
    return unary(
        "sigmoid", x,
        [](double v) {
            if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
            const double e = std::exp(v);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor gelu(const Tensor& x) {
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    constexpr double kInvSqrt2Pi = 0.39894228040143267794;
    return unary(
        "gelu", x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); },
        [](double v, double) {
            return 0.5 * (1.0 + std::erf(v * kInvSqrt2)) + v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
        });
}

Tensor tanh(const Tensor& x) {
    return unary(
        "tanh", x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& x) {
    return unary(
        "relu", x, [](double v) { return v > 0 ? v : 0.0; }, [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& x) {
    return unary(
        "exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
    return unary(
        "log", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor sqrt(const Tensor& x) {
    return unary(
        "sqrt", x, [](double v) { return std::sqrt(v); }, [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Tensor abs(const Tensor& x) {
    return unary(
        "abs", x, [](double v) { return std::abs(v); },
        [](double v, double) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& x) {
    return unary(
        "square", x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
    return unary(
        "clamp", x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
        [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

// ----------------------------------------------------------------------------
// Matmul
// ----------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    if (sa.size() < 2 || sb.size() < 2) shape_fail("matmul", sa, sb, "operands must be at least 2-D");

    if (sb.size() == 2) {
        const std::size_t k = sa.back();
        if (k != sb[0]) shape_fail("matmul", sa, sb, "inner dimensions differ");
        const std::size_t m = numel_of(sa) / k;
        const std::size_t n = sb[1];
        Shape out_shape = sa;
        out_shape.back() = n;
        std::vector<double> out(m * n);
        MutMap(out.data(), m, n).noalias() = ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), k, n);
        return detail::make_result(std::move(out_shape), std::move(out), "matmul", {a, b}, [m, k, n](Node& self) {
            Node& na = input(self, 0);
            Node& nb = input(self, 1);
            ConstMap g(self.grad.data(), m, n);
            if (na.requires_grad) {
                MutMap(na.ensure_grad().data(), m, k).noalias() += g * ConstMap(nb.data.data(), k, n).transpose();
            }
            if (nb.requires_grad) {
                MutMap(nb.ensure_grad().data(), k, n).noalias() += ConstMap(na.data.data(), m, k).transpose() * g;
            }
        });
    }

    if (sa.size() == 3 && sb.size() == 3) {
        const std::size_t groups = sa[0], m = sa[1], k = sa[2], n = sb[2];
        if (sb[0] != groups || sb[1] != k) shape_fail("matmul", sa, sb, "batched dims differ");
        std::vector<double> out(groups * m * n);
        const double* ad = a.data().data();
        const double* bd = b.data().data();
        for (std::size_t g = 0; g < groups; ++g) {
            MutMap(out.data() + g * m * n, m, n).noalias() =
                ConstMap(ad + g * m * k, m, k) * ConstMap(bd + g * k * n, k, n);
        }
        return detail::make_result({groups, m, n}, std::move(out), "bmm", {a, b}, [groups, m, k, n](Node& self) {
            Node& na = input(self, 0);
            Node& nb = input(self, 1);
            for (std::size_t g = 0; g < groups; ++g) {
                ConstMap gg(self.grad.data() + g * m * n, m, n);
                if (na.requires_grad) {
                    MutMap(na.ensure_grad().data() + g * m * k, m, k).noalias() +=
                        gg * ConstMap(nb.data.data() + g * k * n, k, n).transpose();
                }
                if (nb.requires_grad) {
                    MutMap(nb.ensure_grad().data() + g * k * n, k, n).noalias() +=
                        ConstMap(na.data.data() + g * m * k, m, k).transpose() * gg;
                }
            }
        });
    }

    shape_fail("matmul", sa, sb, "expected [..,m,k]x[k,n] or [g,m,k]x[g,k,n]");
}

// ----------------------------------------------------------------------------
// Structural
// ----------------------------------------------------------------------------

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    const Shape& first = parts.front().shape();
    if (axis >= first.size()) axis_fail("concat", first, axis);
    Shape out_shape = first;
    out_shape[axis] = 0;
    for (const auto& p : parts) {
        const auto& s = p.shape();
        if (s.size() != first.size()) shape_fail("concat", first, s, "rank differs");
        for (std::size_t d = 0; d < s.size(); ++d) {
            if (d != axis && s[d] != first[d]) shape_fail("concat", first, s, "non-concat dims differ");
        }
        out_shape[axis] += s[axis];
    }
    const auto view = axis_view(first, axis);
    const std::size_t out_row = out_shape[axis] * view.inner;
    std::vector<double> out(numel_of(out_shape));
    auto offsets = std::make_shared<std::vector<std::size_t>>();
    std::size_t offset = 0;
    for (const auto& p : parts) {
        offsets->push_back(offset);
        const std::size_t row = p.shape()[axis] * view.inner;
        const double* src = p.data().data();
        for (std::size_t o = 0; o < view.outer; ++o) {
            std::copy_n(src + o * row, row, out.data() + o * out_row + offset);
        }
        offset += row;
    }
    return detail::make_result(std::move(out_shape), std::move(out), "concat", parts,
                               [offsets, view, out_row](Node& self) {
                                   for (std::size_t i = 0; i < self.inputs.size(); ++i) {
                                       Node& np = input(self, i);
                                       if (!np.requires_grad) continue;
                                       auto& gp = np.ensure_grad();
                                       const std::size_t row = gp.size() / view.outer;
                                       for (std::size_t o = 0; o < view.outer; ++o) {
                                           const double* g = self.grad.data() + o * out_row + (*offsets)[i];
                                           double* dst = gp.data() + o * row;
                                           for (std::size_t j = 0; j < row; ++j) dst[j] += g[j];
                                       }
                                   }
                               });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
    const Shape& s = x.shape();
    if (axis >= s.size()) axis_fail("slice", s, axis);
    if (start + length > s[axis] || length == 0) {
        throw ShapeError("slice: range [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") invalid for axis " + std::to_string(axis) + " of shape " + shape_str(s));
    }
    const auto view = axis_view(s, axis);
    const std::size_t in_row = s[axis] * view.inner;
    const std::size_t out_row = length * view.inner;
    const std::size_t skip = start * view.inner;
    Shape out_shape = s;
    out_shape[axis] = length;
    std::vector<double> out(view.outer * out_row);
    const double* src = x.data().data();
    for (std::size_t o = 0; o < view.outer; ++o) {
        std::copy_n(src + o * in_row + skip, out_row, out.data() + o * out_row);
    }
    return detail::make_result(std::move(out_shape), std::move(out), "slice", {x},
                               [view, in_row, out_row, skip](Node& self) {
                                   auto& gx = input(self, 0).ensure_grad();
                                   for (std::size_t o = 0; o < view.outer; ++o) {
                                       const double* g = self.grad.data() + o * out_row;
                                       double* dst = gx.data() + o * in_row + skip;
                                       for (std::size_t j = 0; j < out_row; ++j) dst[j] += g[j];
                                   }
                               });
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (numel_of(shape) != x.numel()) shape_fail("reshape", x.shape(), shape, "element count differs");
    return detail::make_result(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()), "reshape",
                               {x}, [](Node& self) {
                                   auto& gx = input(self, 0).ensure_grad();
                                   for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
                               });
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& order) {
    const Shape& s = x.shape();
    const std::size_t rank = s.size();
    std::vector<bool> seen(rank, false);
    if (order.size() != rank) shape_fail("permute", s, Shape(order.begin(), order.end()), "order rank differs");
    for (auto d : order) {
        if (d >= rank || seen[d]) shape_fail("permute", s, Shape(order.begin(), order.end()), "invalid order");
        seen[d] = true;
    }
    std::vector<std::size_t> in_stride(rank, 1);
    for (std::size_t d = rank; d-- > 1;) in_stride[d - 1] = in_stride[d] * s[d];
    Shape out_shape(rank);
    std::vector<std::size_t> stride(rank);
    for (std::size_t d = 0; d < rank; ++d) {
        out_shape[d] = s[order[d]];
        stride[d] = in_stride[order[d]];
    }
    const std::size_t n = x.numel();
    auto src_index = std::make_shared<std::vector<std::size_t>>(n);
    std::vector<std::size_t> idx(rank, 0);
    std::size_t off = 0;
    for (std::size_t i = 0; i < n; ++i) {
        (*src_index)[i] = off;
        for (std::size_t d = rank; d-- > 0;) {
            ++idx[d];
            off += stride[d];
            if (idx[d] < out_shape[d]) break;
            off -= stride[d] * idx[d];
            idx[d] = 0;
        }
    }
    std::vector<double> out(n);
    const auto xv = x.data();
    for (std::size_t i = 0; i < n; ++i) out[i] = xv[(*src_index)[i]];
    return detail::make_result(std::move(out_shape), std::move(out), "permute", {x}, [src_index](Node& self) {
        auto& gx = input(self, 0).ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) gx[(*src_index)[i]] += self.grad[i];
    });
}

Tensor transpose(const Tensor& x, std::size_t axis_a, std::size_t axis_b) {
    std::vector<std::size_t> order(x.rank());
    std::iota(order.begin(), order.end(), 0);
    if (axis_a >= order.size()) axis_fail("transpose", x.shape(), axis_a);
    if (axis_b >= order.size()) axis_fail("transpose", x.shape(), axis_b);
    std::swap(order[axis_a], order[axis_b]);
    return permute(x, order);
}

// ----------------------------------------------------------------------------
// Convolution
// ----------------------------------------------------------------------------

Tensor conv1d_depthwise(const Tensor& x, const Tensor& kernels) {
    const Shape& sx = x.shape();
    const Shape& sk = kernels.shape();
    if ((sx.size() != 2 && sx.size() != 3) || sk.size() != 2) {
        shape_fail("conv1d_depthwise", sx, sk, "expected x [C,T] or [B,C,T] and kernels [C*M,K]");
    }
    const bool batched = sx.size() == 3;
    const std::size_t batch = batched ? sx[0] : 1;
    const std::size_t channels = sx[sx.size() - 2];
    const std::size_t steps = sx.back();
    const std::size_t out_channels = sk[0];
    const std::size_t width = sk[1];
    if (channels == 0 || out_channels % channels != 0 || width == 0) {
        shape_fail("conv1d_depthwise", sx, sk, "kernel rows must be a multiple of channels");
    }
    const std::size_t mult = out_channels / channels;
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>((width - 1) / 2);
    const auto T = static_cast<std::ptrdiff_t>(steps);

    Shape out_shape = batched ? Shape{batch, out_channels, steps} : Shape{out_channels, steps};
    std::vector<double> out(batch * out_channels * steps, 0.0);
    const double* xd = x.data().data();
    const double* wd = kernels.data().data();
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < out_channels; ++o) {
            const double* xs = xd + (b * channels + o / mult) * steps;
            const double* w = wd + o * width;
            double* dst = out.data() + (b * out_channels + o) * steps;
            for (std::ptrdiff_t t = 0; t < T; ++t) {
                double acc = 0.0;
                for (std::size_t k = 0; k < width; ++k) {
                    const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(k) - pad;
                    if (src >= 0 && src < T) acc += w[k] * xs[src];
                }
                dst[t] = acc;
            }
        }
    }
    return detail::make_result(
        std::move(out_shape), std::move(out), "conv1d_depthwise", {x, kernels},
        [batch, channels, out_channels, mult, width, pad, T, steps](Node& self) {
            Node& nx = input(self, 0);
            Node& nw = input(self, 1);
            double* gx = nx.requires_grad ? nx.ensure_grad().data() : nullptr;
            double* gw = nw.requires_grad ? nw.ensure_grad().data() : nullptr;
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t o = 0; o < out_channels; ++o) {
                    const std::size_t xoff = (b * channels + o / mult) * steps;
                    const double* g = self.grad.data() + (b * out_channels + o) * steps;
                    const double* w = nw.data.data() + o * width;
                    const double* xs = nx.data.data() + xoff;
                    for (std::ptrdiff_t t = 0; t < T; ++t) {
                        for (std::size_t k = 0; k < width; ++k) {
                            const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(k) - pad;
                            if (src < 0 || src >= T) continue;
                            if (gx) gx[xoff + static_cast<std::size_t>(src)] += g[t] * w[k];
                            if (gw) gw[o * width + k] += g[t] * xs[src];
                        }
                    }
                }
            }
        });
}

// ----------------------------------------------------------------------------
// Softmax and reductions
// ----------------------------------------------------------------------------

Tensor softmax(const Tensor& x, std::size_t axis) {
    const Shape& s = x.shape();
    if (axis >= s.size()) axis_fail("softmax", s, axis);
    const auto view = axis_view(s, axis);
    const std::size_t n = s[axis];
    const double* xd = x.data().data();
    std::vector<double> out(x.numel());
    for (std::size_t o = 0; o < view.outer; ++o) {
        for (std::size_t in = 0; in < view.inner; ++in) {
            const std::size_t base = o * n * view.inner + in;
            double mx = xd[base];
            for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, xd[base + j * view.inner]);
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double e = std::exp(xd[base + j * view.inner] - mx);
                out[base + j * view.inner] = e;
                total += e;
            }
            for (std::size_t j = 0; j < n; ++j) out[base + j * view.inner] /= total;
        }
    }
    return detail::make_result(s, std::move(out), "softmax", {x}, [view, n](Node& self) {
        auto& gx = input(self, 0).ensure_grad();
        const auto& y = self.data;
        const auto& g = self.grad;
        for (std::size_t o = 0; o < view.outer; ++o) {
            for (std::size_t in = 0; in < view.inner; ++in) {
                const std::size_t base = o * n * view.inner + in;
                double dot = 0.0;
                for (std::size_t j = 0; j < n; ++j) dot += g[base + j * view.inner] * y[base + j * view.inner];
                for (std::size_t j = 0; j < n; ++j) {
                    const std::size_t i = base + j * view.inner;
                    gx[i] += y[i] * (g[i] - dot);
                }
            }
        }
    });
}

Tensor sum(const Tensor& x) {
    const auto xv = x.data();
    const double total = std::accumulate(xv.begin(), xv.end(), 0.0);
    return detail::make_result({1}, {total}, "sum", {x}, [](Node& self) {
        auto& gx = input(self, 0).ensure_grad();
        const double g = self.grad[0];
        for (auto& v : gx) v += g;
    });
}

Tensor mean(const Tensor& x) {
    const std::size_t n = x.numel();
    if (n == 0) throw ShapeError("mean: empty tensor");
    return scale(sum(x), 1.0 / static_cast<double>(n));
}

Tensor sum(const Tensor& x, std::size_t axis, bool keepdim) {
    const Shape& s = x.shape();
    if (axis >= s.size()) axis_fail("sum", s, axis);
    const auto view = axis_view(s, axis);
    const std::size_t n = s[axis];
    Shape out_shape = s;
    if (keepdim) {
        out_shape[axis] = 1;
    } else {
        out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
        if (out_shape.empty()) out_shape = {1};
    }
    std::vector<double> out(view.outer * view.inner, 0.0);
    const double* xd = x.data().data();
    for (std::size_t o = 0; o < view.outer; ++o) {
        for (std::size_t j = 0; j < n; ++j) {
            const double* src = xd + (o * n + j) * view.inner;
            double* dst = out.data() + o * view.inner;
            for (std::size_t in = 0; in < view.inner; ++in) dst[in] += src[in];
        }
    }
    return detail::make_result(std::move(out_shape), std::move(out), "sum_axis", {x}, [view, n](Node& self) {
        auto& gx = input(self, 0).ensure_grad();
        for (std::size_t o = 0; o < view.outer; ++o) {
            const double* g = self.grad.data() + o * view.inner;
            for (std::size_t j = 0; j < n; ++j) {
                double* dst = gx.data() + (o * n + j) * view.inner;
                for (std::size_t in = 0; in < view.inner; ++in) dst[in] += g[in];
            }
        }
    });
}

Tensor mean(const Tensor& x, std::size_t axis, bool keepdim) {
    if (axis >= x.rank()) axis_fail("mean", x.shape(), axis);
    return scale(sum(x, axis, keepdim), 1.0 / static_cast<double>(x.shape()[axis]));
}

// ----------------------------------------------------------------------------
// Fused LSTM recurrence
// ----------------------------------------------------------------------------

namespace {
double sigmoid_scalar(double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}
}  // namespace

Tensor lstm_recurrence(const Tensor& gates_x, const Tensor& w_hh) {
    const auto& sg = gates_x.shape();
    const auto& sw = w_hh.shape();
    if (sg.size() != 3 || sw.size() != 2 || sw[1] != 4 * sw[0] || sg[2] != sw[1]) {
        shape_fail("lstm_recurrence", sg, sw, "expected gates [T, B, 4h] and w_hh [h, 4h]");
    }
    const std::size_t steps = sg[0], batch = sg[1], h = sw[0], g4 = 4 * h;
    const std::size_t step_gates = batch * g4, step_hidden = batch * h;

    // Post-activation gates (i, f, g, o) and cell states, kept for backward.
    auto acts = std::make_shared<std::vector<double>>(steps * step_gates);
    auto cells = std::make_shared<std::vector<double>>(steps * step_hidden);
    std::vector<double> out(steps * step_hidden);
    ConstMap w(w_hh.data().data(), h, g4);
    const double* gx = gates_x.data().data();

    for (std::size_t t = 0; t < steps; ++t) {
        double* a = acts->data() + t * step_gates;
        std::copy(gx + t * step_gates, gx + (t + 1) * step_gates, a);
        if (t > 0) MutMap(a, batch, g4).noalias() += ConstMap(out.data() + (t - 1) * step_hidden, batch, h) * w;
        double* c = cells->data() + t * step_hidden;
        const double* c_prev = t > 0 ? cells->data() + (t - 1) * step_hidden : nullptr;
        double* hy = out.data() + t * step_hidden;
        for (std::size_t b = 0; b < batch; ++b) {
            double* row = a + b * g4;
            for (std::size_t j = 0; j < h; ++j) {
                const double i = row[j] = sigmoid_scalar(row[j]);
                const double f = row[h + j] = sigmoid_scalar(row[h + j]);
                const double g = row[2 * h + j] = std::tanh(row[2 * h + j]);
                const double o = row[3 * h + j] = sigmoid_scalar(row[3 * h + j]);
                const double cv = (c_prev ? f * c_prev[b * h + j] : 0.0) + i * g;
                c[b * h + j] = cv;
                hy[b * h + j] = o * std::tanh(cv);
            }
        }
    }

    return detail::make_result(
        {steps, batch, h}, std::move(out), "lstm_recurrence", {gates_x, w_hh},
        [acts, cells, steps, batch, h, g4, step_gates, step_hidden](Node& self) {
            Node& ng = input(self, 0);
            Node& nw = input(self, 1);
            ConstMap w(nw.data.data(), h, g4);
            std::vector<double> dpre(step_gates);
            std::vector<double> dh_next(step_hidden, 0.0), dc_next(step_hidden, 0.0);
            double* gg = ng.requires_grad ? ng.ensure_grad().data() : nullptr;
            double* gw = nw.requires_grad ? nw.ensure_grad().data() : nullptr;
            for (std::size_t t = steps; t-- > 0;) {
                const double* a = acts->data() + t * step_gates;
                const double* c = cells->data() + t * step_hidden;
                const double* c_prev = t > 0 ? cells->data() + (t - 1) * step_hidden : nullptr;
                const double* dy = self.grad.data() + t * step_hidden;
                for (std::size_t b = 0; b < batch; ++b) {
                    const double* row = a + b * g4;
                    double* drow = dpre.data() + b * g4;
                    for (std::size_t j = 0; j < h; ++j) {
                        const std::size_t k = b * h + j;
                        const double i = row[j], f = row[h + j], g = row[2 * h + j], o = row[3 * h + j];
                        const double tc = std::tanh(c[k]);
                        const double dh = dy[k] + dh_next[k];
                        const double dc = dh * o * (1.0 - tc * tc) + dc_next[k];
                        drow[j] = dc * g * i * (1.0 - i);
                        drow[h + j] = c_prev ? dc * c_prev[k] * f * (1.0 - f) : 0.0;
                        drow[2 * h + j] = dc * i * (1.0 - g * g);
                        drow[3 * h + j] = dh * tc * o * (1.0 - o);
                        dc_next[k] = dc * f;
                    }
                }
                if (gg) {
                    double* dst = gg + t * step_gates;
                    for (std::size_t n = 0; n < step_gates; ++n) dst[n] += dpre[n];
                }
                ConstMap dp(dpre.data(), batch, g4);
                if (t > 0) {
                    if (gw) {
                        MutMap(gw, h, g4).noalias() +=
                            ConstMap(self.data.data() + (t - 1) * step_hidden, batch, h).transpose() * dp;
                    }
                    MutMap(dh_next.data(), batch, h).noalias() = dp * w.transpose();
                }
            }
        });
}

}  // namespace rul::ops
