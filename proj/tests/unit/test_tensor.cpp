#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "../support/grad_cases.hpp"
#include "rul/error.hpp"
#include "rul/tensor/adam.hpp"
#include "rul/tensor/checkpoint.hpp"
#include "rul/tensor/grad_check.hpp"
#include "rul/tensor/nn.hpp"
#include "rul/tensor/ops.hpp"
#include "rul/tensor/trainer.hpp"

using namespace rul;
using rul::testing::random_tensor;

TEST_CASE("forward op examples") {
    auto sm = ops::softmax(Tensor::from({3}, {0, 0, 0}), 0);
    for (double v : sm.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    CHECK(ops::sigmoid(Tensor::scalar(0.0)).item() == 0.5);

    auto conv = ops::conv1d_depthwise(Tensor::from({1, 3}, {1, 2, 3}), Tensor::from({1, 3}, {0, 1, 0}));
    CHECK(std::vector<double>(conv.data().begin(), conv.data().end()) == std::vector<double>{1, 2, 3});
}

TEST_CASE("conv1d_depthwise zero-pads and keeps channels independent") {
    // Two channels, multiplier 2: outputs 0,1 read channel 0; outputs 2,3 read channel 1.
    auto x = Tensor::from({2, 4}, {1, 2, 3, 4, 10, 20, 30, 40});
    auto k = Tensor::from({4, 3}, {1, 0, 0,  0, 0, 1,  1, 1, 1,  0, 2, 0});
    auto y = ops::conv1d_depthwise(x, k);
    REQUIRE(y.shape() == Shape{4, 4});
    const std::vector<double> expected{0, 1, 2, 3,  2, 3, 4, 0,  30, 60, 90, 70,  20, 40, 60, 80};
    CHECK(std::vector<double>(y.data().begin(), y.data().end()) == expected);
}

TEST_CASE("shape mismatch names op and shapes") {
    auto a = Tensor::zeros({2, 3});
    auto b = Tensor::zeros({4, 5});
    try {
        ops::matmul(a, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("matmul") != std::string::npos);
        CHECK(msg.find("[2, 3]") != std::string::npos);
        CHECK(msg.find("[4, 5]") != std::string::npos);
    }
    CHECK_THROWS_AS(ops::add(Tensor::zeros({2, 3}), Tensor::zeros({3, 2})), ShapeError);
    CHECK_THROWS_AS(ops::slice(Tensor::zeros({2, 3}), 1, 2, 2), ShapeError);
    CHECK_THROWS_AS(ops::concat({Tensor::zeros({2, 3}), Tensor::zeros({3, 3})}, 1), ShapeError);
    CHECK_THROWS_AS(ops::conv1d_depthwise(Tensor::zeros({3, 5}), Tensor::zeros({4, 3})), ShapeError);
}

TEST_CASE("backward examples") {
    auto p = Tensor::from({2}, {1, 2}, true);
    backward(ops::sum(ops::mul(p, p)));
    CHECK(p.grad()[0] == 2.0);
    CHECK(p.grad()[1] == 4.0);

    SUBCASE("repeated calls accumulate") {
        auto q = Tensor::from({2}, {1, 2}, true);
        auto loss = ops::sum(ops::mul(q, q));
        backward(loss);
        backward(loss);
        CHECK(q.grad()[0] == 4.0);
        CHECK(q.grad()[1] == 8.0);
        q.zero_grad();
        CHECK(q.grad()[0] == 0.0);
    }

    auto w = Tensor::scalar(0.0, true);
    auto x = Tensor::scalar(1.0);
    backward(ops::sigmoid(ops::mul(w, x)));
    CHECK(w.grad()[0] == doctest::Approx(0.25).epsilon(1e-15));

    CHECK_THROWS_AS(backward(ops::mul(p, p)), ShapeError);
    CHECK_THROWS(backward(Tensor::scalar(3.0)));
}

TEST_CASE("random 5-parameter graph matches central differences") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::vector<Tensor> p;
        for (int i = 0; i < 5; ++i) p.push_back(random_tensor({1}, rng, -1.0, 1.0));
        auto f = [&] {
            auto t = ops::tanh(ops::add(ops::mul(p[0], p[1]), p[2]));
            auto s = ops::sigmoid(ops::sub(ops::mul(t, p[3]), ops::square(p[4])));
            return ops::add(ops::mul(s, t), ops::exp(ops::mul(p[4], p[0])));
        };
        CHECK(grad_check(f, p).max_rel_error < 1e-4);
    }
}

TEST_CASE("every primitive passes grad_check") {
    for (const auto& c : rul::testing::primitive_grad_cases()) {
        CAPTURE(c.name);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            CAPTURE(seed);
            CHECK(c.run(seed).max_rel_error < 1e-4);
        }
    }
}

TEST_CASE("grad_check flags a single wrong gradient element") {
    std::mt19937_64 rng(5);
    auto x = random_tensor({40}, rng);
    // Square op whose backward is 1% off on one element.
    auto faulty_square = [](const Tensor& t) {
        std::vector<double> v(t.data().begin(), t.data().end());
        for (auto& e : v) e *= e;
        return detail::make_result(t.shape(), std::move(v), "faulty_square", {t}, [](detail::Node& n) {
            auto& in = *n.inputs[0];
            auto& g = in.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) {
                g[i] += n.grad[i] * 2.0 * in.data[i] * (i == 7 ? 1.01 : 1.0);
            }
        });
    };
    const auto r = grad_check([&] { return ops::sum(faulty_square(x)); }, std::vector<Tensor>{x});
    CHECK(r.max_rel_error > 1e-4);
    CHECK(r.worst_element == 7);
}

TEST_CASE("grad_check of sum is exact to rounding") {
    std::mt19937_64 rng(3);
    auto x = random_tensor({10}, rng);
    CHECK(grad_check([&] { return ops::sum(x); }, std::vector<Tensor>{x}).max_rel_error < 1e-9);
}

TEST_CASE("softmax rows sum to one and stay positive") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto x = random_tensor({4, 7}, rng, -30.0, 30.0, false);
        auto y = ops::softmax(x, 1);
        for (std::size_t r = 0; r < 4; ++r) {
            double total = 0.0;
            for (std::size_t c = 0; c < 7; ++c) {
                CHECK(y.at(r * 7 + c) > 0.0);
                total += y.at(r * 7 + c);
            }
            CHECK(std::abs(total - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("identical seed gives bit-identical values and grads") {
    auto run = [] {
        nn::Rng rng(42);
        nn::Lstm lstm(3, 4, 2, rng);
        std::mt19937_64 data_rng(7);
        auto x = random_tensor({5, 2, 3}, data_rng, -1, 1, false);
        auto loss = ops::mean(lstm.forward(x));
        backward(loss);
        ParameterList params;
        lstm.collect(params, "lstm");
        std::vector<double> out{loss.item()};
        for (const auto& p : params) out.insert(out.end(), p.tensor.grad().begin(), p.tensor.grad().end());
        return out;
    };
    CHECK(run() == run());
}

TEST_CASE("no-grad mode records nothing") {
    auto w = Tensor::from({2}, {1, 2}, true);
    NoGradGuard guard;
    auto y = ops::mul(w, w);
    CHECK_FALSE(y.requires_grad());
}

// ----------------------------------------------------------------------------
// Adam
// ----------------------------------------------------------------------------

TEST_CASE("adam first step moves about lr against the gradient sign") {
    auto w = Tensor::from({3}, {0.0, 1.0, -1.0}, true);
    ParameterList params{{"w", w}};
    auto g = w.mutable_grad();
    g[0] = 5.0;
    g[1] = -0.01;
    g[2] = 123.0;
    Adam adam(AdamConfig{});
    adam.step(params);
    CHECK(w.at(0) == doctest::Approx(-1e-4).epsilon(1e-6));
    CHECK(w.at(1) == doctest::Approx(1.0 + 1e-4).epsilon(1e-6));
    CHECK(w.at(2) == doctest::Approx(-1.0 - 1e-4).epsilon(1e-6));
    CHECK(adam.step_count() == 1);
    CHECK(g[0] == 5.0);  // grads untouched
}

TEST_CASE("adam with zero gradients is the identity") {
    std::mt19937_64 rng(1);
    auto w = random_tensor({4, 3}, rng);
    const std::vector<double> before(w.data().begin(), w.data().end());
    ParameterList params{{"w", w}};
    Adam adam;
    for (int i = 0; i < 50; ++i) {
        w.zero_grad();
        adam.step(params);
    }
    CHECK(std::vector<double>(w.data().begin(), w.data().end()) == before);
    CHECK(adam.step_count() == 50);
}

TEST_CASE("adam minimizes a quadratic") {
    auto w = Tensor::scalar(0.0, true);
    ParameterList params{{"w", w}};
    Adam adam(AdamConfig{.lr = 0.1});
    for (int i = 0; i < 200; ++i) {
        w.zero_grad();
        backward(ops::square(ops::add_scalar(w, -3.0)));
        adam.step(params);
    }
    CHECK(std::abs(w.item() - 3.0) < 0.1);
}

TEST_CASE("adam rejects a missing gradient by name") {
    auto w = Tensor::from({1}, {0.0}, false);
    ParameterList params{{"model.w", w}};
    Adam adam;
    try {
        adam.step(params);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(std::string(e.what()).find("model.w") != std::string::npos);
    }
}

// ----------------------------------------------------------------------------
// Checkpoints and training loop
// ----------------------------------------------------------------------------

TEST_CASE("checkpoint round trip is exact and validates shapes") {
    nn::Rng rng(5);
    nn::Linear a(3, 2, rng), b(3, 2, rng);
    ParameterList pa, pb;
    a.collect(pa, "fc");
    b.collect(pb, "fc");
    const auto path = std::filesystem::temp_directory_path() / "rul_ckpt_test.json";
    write_checkpoint(path, {"test", {{"in", 3}}, nullptr, params_to_json(pa)});
    auto ck = read_checkpoint(path);
    CHECK(ck.kind == "test");
    params_from_json(ck.params, pb);
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(std::vector<double>(pa[i].tensor.data().begin(), pa[i].tensor.data().end()) ==
              std::vector<double>(pb[i].tensor.data().begin(), pb[i].tensor.data().end()));
    }
    nn::Linear c(4, 2, rng);
    ParameterList pc;
    c.collect(pc, "fc");
    CHECK_THROWS_AS(params_from_json(ck.params, pc), DataError);
    std::filesystem::remove(path);
}

TEST_CASE("fit restores the best validation epoch and stops on patience") {
    auto w = Tensor::scalar(0.0, true);
    ParameterList params{{"w", w}};
    // Training pulls w toward 3, validation prefers w = 0.05: the best epoch is early.
    auto batch_loss = [&](std::span<const std::size_t>) { return ops::square(ops::add_scalar(w, -3.0)); };
    std::vector<double> seen;
    auto validator = [&] {
        seen.push_back(w.item());
        return std::abs(w.item() - 0.05);
    };
    TrainOptions opts{.epochs = 100, .batch_size = 1, .patience = 3, .adam = {.lr = 0.01}, .seed = 1};
    auto history = fit(params, shuffled_plan(1), batch_loss, validator, opts);
    CHECK(history.early_stopped);
    CHECK(history.epochs.size() == history.best_epoch + 3);
    CHECK(w.item() == seen[history.best_epoch - 1]);
}

TEST_CASE("fused lstm recurrence equals the chained cell") {
    std::mt19937_64 rng(17);
    const std::size_t h = 4, steps = 6, batch = 3;
    auto gates_x = random_tensor({steps, batch, 4 * h}, rng);
    auto w_hh = random_tensor({h, 4 * h}, rng);
    auto fused = ops::lstm_recurrence(gates_x, w_hh);
    nn::LstmState state;
    for (std::size_t t = 0; t < steps; ++t) {
        state = nn::lstm_cell(ops::reshape(ops::slice(gates_x, 0, t, 1), {batch, 4 * h}), state, w_hh);
        for (std::size_t k = 0; k < batch * h; ++k) CHECK(std::abs(fused.at(t * batch * h + k) - state.h.at(k)) < 1e-14);
    }
}
