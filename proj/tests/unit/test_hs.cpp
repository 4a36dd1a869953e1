#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "../support/oracles.hpp"
#include "rul/data/labels.hpp"
#include "rul/data/norm.hpp"
#include "rul/data/synth.hpp"
#include "rul/error.hpp"
#include "rul/hs/classifier.hpp"
#include "rul/hs/trigger.hpp"
#include "rul/tensor/grad_check.hpp"
#include "rul/tensor/ops.hpp"
#include "rul/window_batch.hpp"

using namespace rul;
using namespace rul::hs;

namespace {

HsConfig tiny_config(std::size_t n_f = 3, std::size_t n_w = 10) {
    HsConfig c;
    c.n_features = n_f;
    c.n_window = n_w;
    c.hidden = 6;
    c.layers_per_module = 1;
    return c;
}

data::WindowSample random_window(std::size_t n_f, std::size_t n_w, std::mt19937_64& rng, double offset = 0.0) {
    std::normal_distribution<double> d(offset, 1.0);
    data::WindowSample w{"toy", static_cast<int>(n_w), n_f, n_w, {}, std::nullopt, std::nullopt};
    for (std::size_t i = 0; i < n_f * n_w; ++i) w.matrix.push_back(d(rng));
    return w;
}

/// Windows drifting from the "healthy" level to the "unhealthy" level.
std::vector<data::WindowSample> toy_labeled(std::size_t per_class, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<data::WindowSample> out;
    for (std::size_t i = 0; i < per_class; ++i) {
        auto a = random_window(3, 10, rng, -0.7);
        a.hs_label = 0;
        auto b = random_window(3, 10, rng, 0.7);
        b.hs_label = 1;
        out.push_back(a);
        out.push_back(b);
    }
    return out;
}

CycleProbabilities seq(int first, std::vector<double> v) { return {first, std::move(v)}; }

}  // namespace

// ----------------------------------------------------------------------------
// Loss and forward
// ----------------------------------------------------------------------------

TEST_CASE("bce_loss analytic values") {
    auto half = Tensor::from({2}, {0.5, 0.5});
    CHECK(bce_loss(half, Tensor::from({2}, {0, 1})).item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(Tensor::from({1}, {0.9}), Tensor::from({1}, {1})).item() ==
          doctest::Approx(-std::log(0.9)).epsilon(1e-12));
    CHECK(bce_loss(Tensor::from({2}, {1.0, 0.0}), Tensor::from({2}, {1, 0})).item() < 1e-6);
    CHECK_THROWS_AS(bce_loss(half, Tensor::from({1}, {1})), ShapeError);
}

TEST_CASE("bce_loss gradient matches finite differences") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.05, 0.95);
        std::vector<double> p(6), y(6);
        for (std::size_t i = 0; i < 6; ++i) {
            p[i] = u(rng);
            y[i] = static_cast<double>(i % 2);
        }
        auto pred = Tensor::from({6}, p, true);
        auto labels = Tensor::from({6}, y);
        CHECK(grad_check([&] { return bce_loss(pred, labels); }, std::vector<Tensor>{pred}).max_rel_error < 1e-4);
    }
}

TEST_CASE("untrained classifier output lies in (0,1) and is deterministic") {
    HsClassifier model(tiny_config(), 3);
    std::mt19937_64 rng(1);
    std::vector<data::WindowSample> windows;
    for (int i = 0; i < 5; ++i) windows.push_back(random_window(3, 10, rng, 0.0));
    windows.push_back(random_window(3, 10, rng, 50.0));
    const auto a = model.predict(windows);
    const auto b = model.predict(windows, 2);
    CHECK(a == b);
    for (double p : a) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
    auto bad = random_window(4, 10, rng);
    CHECK_THROWS_AS(model.predict(std::span(&bad, 1)), ShapeError);
}

TEST_CASE("default classifier has two modules of four layers") {
    HsConfig cfg;
    HsClassifier model(cfg, 0);
    const auto params = model.parameters();
    CHECK(params.size() == 8 * 3 + 2);
    CHECK(params.front().name == "hs.lstm0.layer0.w_ih");
    CHECK(params[3 * 4].name == "hs.lstm1.layer0.w_ih");
    const std::size_t expected = nn::lstm_layer_params(7, 32) + 7 * nn::lstm_layer_params(32, 32) + 33;
    CHECK(count_scalars(params) == expected);
}

TEST_CASE("classifier forward+loss gradient on a small config") {
    auto cfg = tiny_config(2, 4);
    cfg.hidden = 3;
    HsClassifier model(cfg, 11);
    std::mt19937_64 rng(2);
    std::vector<data::WindowSample> w{random_window(2, 4, rng), random_window(2, 4, rng)};
    const auto idx = iota_indices(2);
    auto x = time_major_batch(w, idx, 2, 4);
    auto y = Tensor::from({2}, {0, 1});
    CHECK(grad_check([&] { return bce_loss(model.forward(x), y); }, model.parameters()).max_rel_error < 1e-4);
}

// ----------------------------------------------------------------------------
// Training
// ----------------------------------------------------------------------------

TEST_CASE("train_hs rejects empty and single-class sets") {
    HsClassifier model(tiny_config(), 0);
    HsTrainOptions opt;
    opt.train.epochs = 1;
    CHECK_THROWS_AS(train_hs(model, {}, {}, opt), TrainingError);
    auto windows = toy_labeled(4, 1);
    std::vector<data::WindowSample> healthy;
    for (const auto& w : windows) {
        if (*w.hs_label == 0) healthy.push_back(w);
    }
    try {
        train_hs(model, healthy, {}, opt);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(std::string(e.what()).find("healthy") != std::string::npos);
    }
}

TEST_CASE("train_hs on a toy set: loss falls and runs repeat exactly") {
    auto run = [] {
        HsClassifier model(tiny_config(), 5);
        HsTrainOptions opt;
        opt.train.epochs = 5;
        opt.train.adam.lr = 1e-2;
        opt.train.seed = 9;
        auto windows = toy_labeled(12, 4);
        std::vector<double> losses;
        train_hs(model, windows, {}, opt, [&](const EpochStats& s) { losses.push_back(s.train_loss); });
        return std::make_pair(losses, hs_accuracy(model, windows));
    };
    const auto [losses, acc] = run();
    int decreases = 0;
    for (std::size_t i = 1; i < losses.size(); ++i) decreases += losses[i] < losses[i - 1];
    CHECK(decreases >= 3);
    CHECK(acc > 0.9);
    CHECK(run().first == losses);
}

TEST_CASE("checkpoint round trip preserves predictions and norm stats") {
    HsClassifier model(tiny_config(), 7);
    model.norm = {{1, 2, 3}, {0.5, 1, 2}};
    const auto path = std::filesystem::temp_directory_path() / "rul_hs_ckpt.json";
    model.save(path);
    auto back = HsClassifier::load(path);
    std::filesystem::remove(path);
    std::mt19937_64 rng(0);
    std::vector<data::WindowSample> w{random_window(3, 10, rng), random_window(3, 10, rng)};
    CHECK(back.predict(w) == model.predict(w));
    CHECK(back.norm.std == model.norm.std);
    CHECK(back.config().hidden == 6);
}

// ----------------------------------------------------------------------------
// Trigger
// ----------------------------------------------------------------------------

TEST_CASE("decide_fpc examples") {
    TriggerConfig t{5, 0.5, 0.0};
    const double H = 0.1, U = 0.9;
    auto r = decide_fpc(seq(50, {H, U, U, U, H, U, U, U, U, U}), 1000, t);
    REQUIRE(r);
    CHECK(r->fpc_cycle == 59);
    CHECK(r->trigger_cycles == std::vector<int>{55, 56, 57, 58, 59});

    CHECK_FALSE(decide_fpc(seq(50, std::vector<double>(100, H)), 1000, t));

    // Run ending at cycle 60 is inside the MCT (100); the next run after it wins.
    std::vector<double> v(120, H);
    for (int c = 56; c <= 60; ++c) v[static_cast<std::size_t>(c - 50)] = U;
    for (int c = 101; c <= 110; ++c) v[static_cast<std::size_t>(c - 50)] = U;
    r = decide_fpc(seq(50, v), 1000, TriggerConfig{5, 0.5, 0.1});
    REQUIRE(r);
    CHECK(r->fpc_cycle == 105);

    // A run straddling the MCT fires once its first cycle passes it.
    std::fill(v.begin(), v.end(), U);
    r = decide_fpc(seq(50, v), 1000, TriggerConfig{5, 0.5, 0.1});
    REQUIRE(r);
    CHECK(r->fpc_cycle == 105);

    CHECK(decide_fpc(seq(50, {0.5, 0.5, 0.5, 0.5, 0.5}), 1000, t)->fpc_cycle == 54);
}

TEST_CASE("decide_fpc agrees with the brute-force scanner") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 5 + rng() % 80;
        const double bias = u(rng);
        std::vector<double> v(n);
        for (auto& p : v) p = std::clamp(u(rng) * 0.6 + bias * 0.6, 0.0, 1.0);
        const int first = 1 + static_cast<int>(rng() % 60);
        TriggerConfig t{1 + static_cast<int>(rng() % 6), 0.3 + 0.4 * u(rng), 0.3 * u(rng)};
        const double eol = first + static_cast<double>(n);
        const auto got = decide_fpc(seq(first, v), eol, t);
        const auto want = rul::testing::brute_force_fpc(v, first, t.consecutive_required, t.unhealthy_threshold,
                                                        t.mct_fraction * eol);
        REQUIRE(got.has_value() == want.has_value());
        if (got) {
            CHECK(got->fpc_cycle == *want);
            CHECK(got->trigger_cycles.front() > t.mct_fraction * eol);
        }

        // Raising the threshold never moves the FPC earlier.
        TriggerConfig stricter = t;
        stricter.unhealthy_threshold = std::min(0.99, t.unhealthy_threshold + 0.2 * u(rng));
        const auto later = decide_fpc(seq(first, v), eol, stricter);
        if (later) {
            REQUIRE(got);
            CHECK(later->fpc_cycle >= got->fpc_cycle);
        }
    }
}

TEST_CASE("trigger config validation") {
    CHECK_THROWS_AS((TriggerConfig{0, 0.5, 0.1}.validate()), UsageError);
    CHECK_THROWS_AS((TriggerConfig{5, 1.0, 0.1}.validate()), UsageError);
    CHECK_THROWS_AS((TriggerConfig{5, 0.5, 1.0}.validate()), UsageError);
    CHECK_NOTHROW((TriggerConfig{5, 0.5, 0.0}.validate()));
}

TEST_CASE("fpc_capacity_pct arithmetic") {
    data::CellSeries flat{"f", data::Schema::synth, std::vector<std::vector<double>>(60, std::vector<double>(7, 1.1))};
    CHECK(fpc_capacity_pct(flat, 30) == 100.0);
    auto fading = flat;
    fading.cycles[39][0] = 1.045;
    CHECK(fpc_capacity_pct(fading, 40) == doctest::Approx(95.0).epsilon(1e-12));
    CHECK_THROWS_AS(fpc_capacity_pct(flat, 61), DataError);

    data::CellSeries hust{"h", data::Schema::hust5, std::vector<std::vector<double>>(20, {3.5, 2.0, 2.0, 0, 0})};
    hust.cycles[9][1] = 1.8;
    CHECK(fpc_capacity_pct(hust, 10) == doctest::Approx(90.0).epsilon(1e-12));
}

TEST_CASE("fpc report JSON layout") {
    std::vector<FpcRecord> records{{"a", 500, 92.5, 600}, {"b", std::nullopt, std::nullopt, 450}};
    auto j = fpc_report_json(records, TriggerConfig{});
    CHECK(j["format"] == "rul-fpc-report");
    CHECK(j["version"] == 1);
    CHECK(j["cells"][0]["triggered"] == true);
    CHECK(j["cells"][0]["fpc_cycle"] == 500);
    CHECK(j["cells"][1]["triggered"] == false);
    CHECK(j["cells"][1]["fpc_cycle"].is_null());
    CHECK(j["trigger"]["consecutive_required"] == 5);
}

TEST_CASE("detect_fpc rejects a cell with the wrong feature count") {
    HsClassifier model(tiny_config(), 0);
    data::CellSeries cell{"x", data::Schema::synth, std::vector<std::vector<double>>(30, std::vector<double>(7, 1.0))};
    CHECK_THROWS_AS(detect_fpc(model, cell, {}), DataError);
}
