// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
//
//   acceptance [--out DIR] [--rulctl PATH] [--only N[,N...]]
//
// Criterion 5 trains the full pipeline on 20 synthetic cells and takes
// several minutes; its report stays under DIR/e2e for inspection.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../support/grad_cases.hpp"
#include "../support/oracles.hpp"
#include "rul/data/labels.hpp"
#include "rul/data/synth.hpp"
#include "rul/error.hpp"
#include "rul/harness/experiment.hpp"
#include "rul/hs/trigger.hpp"
#include "rul/stman/complexity.hpp"
#include "rul/stman/loss.hpp"
#include "rul/stman/model.hpp"
#include "rul/stman/train.hpp"
#include "rul/tensor/grad_check.hpp"

namespace fs = std::filesystem;
using namespace rul;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ----------------------------------------------------------------------------
// 1. Gradients

Outcome gradient_suite() {
    constexpr std::uint64_t kSeeds = 100;
    constexpr double kTol = 1e-4;
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::string worst_name;
    std::size_t checks = 0;
    for (const auto& c : testing::primitive_grad_cases()) {
        for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
            const double e = c.run(seed).max_rel_error;
            ++checks;
            if (!(e <= worst)) {
                worst = e;
                worst_name = c.name + " seed " + std::to_string(seed);
            }
        }
    }
    // Whole ST-MAN forward plus loss, every parameter: default d_model and
    // heads, narrower elsewhere so 100 seeds fit the time budget.
    stman::StManConfig toy;
    toy.n_features = 3;
    toy.n_window = 8;
    toy.d_fuse = 8;
    toy.d_h = 6;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
        stman::StManModel model(toy, seed);
        model.lambda.mutable_data()[0] = 0.5;  // open the temporal-attention branch
        std::mt19937_64 rng(seed + 1000);
        auto x = testing::random_tensor({2, 3, 8}, rng, -1.5, 1.5, false);
        std::uniform_real_distribution<double> u(0.05, 0.95);
        auto y = Tensor::from({2}, {u(rng), u(rng)});
        const double e = grad_check([&] { return stman::rul_loss(model.forward(x), y); }, model.parameters()).max_rel_error;
        ++checks;
        if (!(e <= worst)) {
            worst = e;
            worst_name = "stman forward+loss seed " + std::to_string(seed);
        }
    }
    const double secs = seconds_since(t0);
    return {worst < kTol && secs < 60.0, std::to_string(checks) + " checks, max rel error " + fmt("%.2e", worst) +
                                             " (" + worst_name + "), " + fmt("%.1f", secs) + " s"};
}

// ----------------------------------------------------------------------------
// 2. Labels

Outcome labeling_oracles() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int failures = 0;
    std::string first_failure;
    auto fail = [&](const std::string& what) {
        if (failures++ == 0) first_failure = what;
    };
    for (int trial = 0; trial < 1000; ++trial) {
        const int eol = 10 + static_cast<int>(rng() % 3000);
        const int fpc = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(eol - 1));
        const double p = 0.01 + 0.48 * u(rng);
        const std::string tag = "eol " + std::to_string(eol) + " fpc " + std::to_string(fpc) + " p " + fmt("%.4f", p);

        const int n = static_cast<int>(std::floor(eol * p));
        const auto hs = data::label_hs(eol, p);
        if (static_cast<int>(hs.size()) != eol) fail(tag + ": hs size");
        int healthy = 0, unhealthy = 0;
        for (int j = 1; j <= eol; ++j) {
            const auto& l = hs[static_cast<std::size_t>(j - 1)];
            const std::optional<int> want = j <= n ? std::optional<int>(0)
                                            : j > eol - n ? std::optional<int>(1)
                                                          : std::nullopt;
            if (l != want) fail(tag + ": hs label at " + std::to_string(j));
            healthy += l == 0;
            unhealthy += l == 1;
        }
        if (healthy != n || unhealthy != n) fail(tag + ": hs counts");

        const auto rul = data::label_rul(eol, fpc);
        if (static_cast<int>(rul.size()) != eol) fail(tag + ": rul size");
        const double step = 1.0 / (eol - fpc);
        for (int j = 1; j <= eol; ++j) {
            const auto& l = rul[static_cast<std::size_t>(j - 1)];
            if (j < fpc) {
                if (l) fail(tag + ": rul label before fpc");
                continue;
            }
            if (!l) {
                fail(tag + ": missing rul label at " + std::to_string(j));
                continue;
            }
            const double want = static_cast<double>(eol - j) / (eol - fpc);
            if (std::abs(*l - want) > 1e-12) fail(tag + ": rul value at " + std::to_string(j));
            if (j > fpc && std::abs((*rul[static_cast<std::size_t>(j - 2)] - *l) - step) > 1e-12) {
                fail(tag + ": rul step at " + std::to_string(j));
            }
        }
        if (rul[static_cast<std::size_t>(fpc - 1)] != 1.0) fail(tag + ": rul(fpc) != 1");
        if (rul[static_cast<std::size_t>(eol - 1)] != 0.0) fail(tag + ": rul(eol) != 0");
    }
    return {failures == 0, "1000 instances, " + std::to_string(failures) + " failures" +
                               (failures ? " (first: " + first_failure + ")" : "")};
}

// ----------------------------------------------------------------------------
// 3. Trigger

Outcome trigger_equivalence() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int mismatches = 0, mct_cases = 0, triggered = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + rng() % 200;
        const double bias = u(rng);
        std::vector<double> v(n);
        for (auto& p : v) p = std::clamp(0.7 * u(rng) + 0.6 * bias - 0.1, 0.0, 1.0);
        const int first = 1 + static_cast<int>(rng() % 80);
        hs::TriggerConfig t{1 + static_cast<int>(rng() % 8), 0.2 + 0.6 * u(rng), trial % 2 ? 0.45 * u(rng) : 0.0};
        if (t.mct_fraction > 0.0) ++mct_cases;
        const double eol = first + static_cast<double>(n) + static_cast<double>(rng() % 50);
        const auto got = hs::decide_fpc({first, v}, eol, t);
        const auto want =
            testing::brute_force_fpc(v, first, t.consecutive_required, t.unhealthy_threshold, t.mct_fraction * eol);
        if (got.has_value() != want.has_value() || (got && got->fpc_cycle != *want)) ++mismatches;
        triggered += want.has_value();
    }
    return {mismatches == 0, "10000 sequences (" + std::to_string(mct_cases) + " with MCT, " +
                                 std::to_string(triggered) + " triggered), " + std::to_string(mismatches) +
                                 " mismatches"};
}

// ----------------------------------------------------------------------------
// 4. Round trip

Outcome round_trip() {
    data::SynthSpec spec;
    spec.n_cells = 50;
    spec.seed = 4;
    double worst = 0.0;
    std::size_t points = 0;
    for (const auto& sc : data::generate_synthetic(spec)) {
        const int eol = sc.cell.eol();
        for (int fpc : {sc.knee_cycle, 1, eol / 2, eol - 1}) {
            const auto labels = data::label_rul(eol, fpc);
            for (int j = fpc + 1; j <= eol; ++j) {
                const double cycles = stman::rul_to_cycles(*labels[static_cast<std::size_t>(j - 1)], j, fpc);
                worst = std::max(worst, std::abs(cycles - (eol - j)));
                ++points;
            }
        }
    }
    return {worst < 1e-9, std::to_string(points) + " cycles over 50 cells, max error " + fmt("%.2e", worst) +
                              " cycles"};
}

// ----------------------------------------------------------------------------
// 5, 6, 9. End-to-end synthetic run

harness::ExperimentConfig e2e_config(const fs::path& manifest) {
    harness::ExperimentConfig c;
    c.manifest = manifest;
    c.optimizer.lr = 1e-3;
    c.hs_epochs = 8;
    c.rul_epochs = 12;
    c.patience = 4;
    c.k = 5;
    c.seed = 0;
    return c;
}

struct EndToEnd {
    harness::ExperimentReport report;
    double seconds = 0.0;
};

EndToEnd run_end_to_end(const fs::path& dir) {
    fs::remove_all(dir);
    data::SynthSpec spec;
    spec.n_cells = 20;
    spec.eol_min = 400;
    spec.eol_max = 800;
    spec.seed = 0;
    const auto manifest = data::write_synthetic_corpus(dir / "data", data::generate_synthetic(spec));
    const auto config = e2e_config(manifest);
    const auto t0 = std::chrono::steady_clock::now();
    EndToEnd out{harness::run_experiment(config, dir / "run"), 0.0};
    out.seconds = seconds_since(t0);
    return out;
}

Outcome end_to_end_criterion(const EndToEnd& e) {
    // (a) Stage-1 accuracy pooled over every fold's labeled test windows.
    double correct = 0.0, windows = 0.0, min_acc = 1.0;
    for (const auto& f : e.report.folds) {
        if (!f.hs_accuracy) continue;
        correct += *f.hs_accuracy * static_cast<double>(f.hs_test_windows);
        windows += static_cast<double>(f.hs_test_windows);
        min_acc = std::min(min_acc, *f.hs_accuracy);
    }
    const double acc = windows > 0 ? correct / windows : 0.0;

    // (b) A test cell counts when it triggers and its FPC lies within
    // 0.1 * EOL of the recorded knee.
    int test_cells = 0, detected = 0, located = 0;
    double worst_offset = 0.0;
    for (const auto& f : e.report.folds) {
        for (const auto& c : f.fpcs) {
            if (c.split != "test") continue;
            ++test_cells;
            if (!c.fpc_cycle || !c.knee_cycle) continue;
            ++detected;
            const double offset = static_cast<double>(*c.fpc_cycle - *c.knee_cycle) / c.eol;
            if (std::abs(offset) > std::abs(worst_offset)) worst_offset = offset;
            located += std::abs(offset) <= 0.10;
        }
    }
    const double located_frac = test_cells ? static_cast<double>(located) / test_cells : 0.0;

    // (c) Stage-2 MAE, mean over folds.
    const bool have_metrics = std::any_of(e.report.folds.begin(), e.report.folds.end(),
                                          [](const auto& f) { return f.metrics.has_value(); });
    const auto mae = have_metrics ? e.report.aggregate("mae") : harness::MeanStd{1.0, 0.0};

    const bool a = acc >= 0.95, b = located_frac >= 0.80, c = have_metrics && mae.mean <= 0.08;
    const bool time_ok = e.seconds <= 15 * 60;
    std::string d;
    d += std::string("(a) ") + (a ? "ok" : "FAIL") + " stage-1 accuracy " + fmt("%.4f", acc) + " (min fold " +
         fmt("%.4f", min_acc) + ")";
    d += std::string("; (b) ") + (b ? "ok" : "FAIL") + " " + std::to_string(located) + "/" +
         std::to_string(test_cells) + " test cells within 10% EOL of the knee (" + std::to_string(detected) +
         " triggered, worst offset " + fmt("%+.3f", worst_offset) + " EOL)";
    d += std::string("; (c) ") + (c ? "ok" : "FAIL") + " MAE " + fmt("%.4f", mae.mean) + " ± " +
         fmt("%.4f", mae.std);
    d += std::string("; ") + (time_ok ? "" : "FAIL ") + "runtime " + fmt("%.0f", e.seconds) + " s";
    return {a && b && c && time_ok, d};
}

Outcome capacity_band(const EndToEnd& e) {
    std::vector<double> caps;
    for (const auto& f : e.report.folds) {
        for (const auto& c : f.fpcs) {
            if (c.split == "test" && c.fpc_capacity_pct) caps.push_back(*c.fpc_capacity_pct);
        }
    }
    if (caps.empty()) return {false, "no triggered test cell"};
    const auto ms = harness::mean_std(caps);
    return {ms.mean >= 85.0 && ms.mean <= 98.0, "mean fpc_capacity_pct " + fmt("%.2f", ms.mean) + " ± " +
                                                    fmt("%.2f", ms.std) + " over " + std::to_string(caps.size()) +
                                                    " triggered test cells, band [85, 98]"};
}

std::set<std::string> json_ids(const nlohmann::json& j) {
    std::set<std::string> out;
    for (const auto& v : j) out.insert(v.get<std::string>());
    return out;
}

bool overlaps(const std::set<std::string>& a, const std::set<std::string>& b) {
    return std::any_of(a.begin(), a.end(), [&](const auto& id) { return b.count(id) > 0; });
}

Outcome leakage(const EndToEnd& e, const fs::path& run_dir) {
    static const std::vector<std::string> kStages{"split",        "validation_split",  "normalization",
                                                  "stage1_train", "stage1_validation", "stage2_train",
                                                  "stage2_validation"};
    int problems = 0;
    std::string first;
    auto problem = [&](const std::string& what) {
        if (problems++ == 0) first = what;
    };
    for (const auto& f : e.report.folds) {
        const std::string tag = "fold " + std::to_string(f.fold.index);
        std::vector<std::string> stages;
        for (const auto& l : f.leakage) stages.push_back(l.stage);
        if (stages != kStages) problem(tag + ": stage checks incomplete");

        // Independent re-check from the written artifacts.
        const auto fold_dir = run_dir / ("fold-" + std::to_string(f.fold.index));
        const auto fold_json = nlohmann::json::parse(slurp(fold_dir / "fold.json"));
        const auto test = json_ids(fold_json["fold"]["test_ids"]);
        const auto fit = json_ids(fold_json["fit_ids"]);
        const auto val = json_ids(fold_json["val_ids"]);
        if (overlaps(fit, test) || overlaps(val, test) || overlaps(fit, val)) problem(tag + ": id sets overlap");
        for (const auto& p : harness::read_predictions_csv(fold_dir / "predictions.csv")) {
            if (!test.count(p.cell_id)) problem(tag + ": prediction for non-test cell " + p.cell_id);
        }
    }
    // Negative control: an overlapping pair must be rejected.
    bool control = false;
    try {
        harness::check_disjoint("control", {"a", "b"}, {"b", "c"});
    } catch (const Error&) {
        control = true;
    }
    if (!control) problem("negative control not detected");
    return {problems == 0, std::to_string(e.report.folds.size()) + " folds x " + std::to_string(kStages.size()) +
                               " stages disjoint, artifacts re-checked, negative control " +
                               (control ? "caught" : "MISSED") + (problems ? "; first problem: " + first : "")};
}

// ----------------------------------------------------------------------------
// 7. Complexity

Outcome complexity() {
    const stman::StManModel model(stman::StManConfig{}, 0);
    const auto count = stman::count_parameters(model);
    const auto flops = stman::estimate_flops(model.config());
    return {count.total >= 10000 && count.total <= 100000 && flops > 0,
            "default ST-MAN " + std::to_string(count.total) + " parameters, " + std::to_string(flops) +
                " FLOPs per window"};
}

// ----------------------------------------------------------------------------
// 8. Determinism through the CLI

Outcome determinism(const fs::path& dir, const std::string& rulctl) {
    fs::remove_all(dir);
    data::SynthSpec spec;
    spec.n_cells = 6;
    spec.eol_min = 200;
    spec.eol_max = 260;
    spec.seed = 8;
    harness::ExperimentConfig c;
    c.manifest = data::write_synthetic_corpus(dir / "data", data::generate_synthetic(spec));
    c.n_window = 10;
    c.step = 2;
    c.hs_model.hidden = 4;
    c.hs_model.layers_per_module = 1;
    c.stman.d_model = 4;
    c.stman.n_heads = 1;
    c.stman.d_fuse = 4;
    c.stman.d_h = 6;
    c.optimizer.lr = 1e-2;
    c.batch_size = 32;
    c.epochs = 2;
    c.hs_epochs = 12;
    c.k = 3;
    c.val_fraction = 0.25;
    harness::write_json(dir / "config.json", c.to_json());

    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
        const auto out = dir / ("run-" + std::to_string(run));
        const std::string cmd = "\"" + rulctl + "\" --seed 17 --config \"" + (dir / "config.json").string() +
                                "\" --out-dir \"" + out.string() + "\" run-cv > \"" + (dir / "stdout.txt").string() +
                                "\" 2> \"" + (dir / "stderr.txt").string() + "\"";
        if (std::system(cmd.c_str()) != 0) return {false, "run-cv failed: " + slurp(dir / "stderr.txt")};
        outputs[run] = slurp(out / "report.json");
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
    return {same, "two run-cv invocations, seed 17: report.json " + std::to_string(outputs[0].size()) + " bytes, " +
                      (same ? "byte-identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string out_dir = "acceptance-out";
    std::string rulctl = RULCTL_PATH;
    std::vector<int> only;
    app.add_option("--out", out_dir, "Working directory for generated corpora and runs")->capture_default_str();
    app.add_option("--rulctl", rulctl, "rulctl executable")->capture_default_str();
    app.add_option("--only", only, "Run only these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const fs::path out = fs::absolute(out_dir);
    fs::create_directories(out);
    auto wanted = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };

    bool all = true;
    auto report = [&](int n, const std::string& name, const Outcome& o) {
        all = all && o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << n << " " << name << ": " << o.detail << std::endl;
    };
    auto guarded = [&](const std::function<Outcome()>& f) {
        try {
            return f();
        } catch (const std::exception& e) {
            return Outcome{false, std::string("threw: ") + e.what()};
        }
    };

    if (wanted(1)) report(1, "gradient suite", guarded(gradient_suite));
    if (wanted(2)) report(2, "labeling oracles", guarded(labeling_oracles));
    if (wanted(3)) report(3, "trigger equivalence", guarded(trigger_equivalence));
    if (wanted(4)) report(4, "round trip", guarded(round_trip));
    if (wanted(5) || wanted(6) || wanted(9)) {
        std::optional<EndToEnd> e2e;
        std::string error;
        try {
            e2e = run_end_to_end(out / "e2e");
        } catch (const std::exception& ex) {
            error = std::string("end-to-end run threw: ") + ex.what();
        }
        auto with_run = [&](const std::function<Outcome(const EndToEnd&)>& f) {
            return e2e ? guarded([&] { return f(*e2e); }) : Outcome{false, error};
        };
        if (wanted(5)) report(5, "end-to-end synthetic run", with_run(end_to_end_criterion));
        if (wanted(6)) report(6, "FPC capacity band", with_run(capacity_band));
        if (wanted(9)) {
            report(9, "leakage", with_run([&](const EndToEnd& e) { return leakage(e, out / "e2e" / "run"); }));
        }
    }
    if (wanted(7)) report(7, "complexity", guarded(complexity));
    if (wanted(8)) report(8, "determinism", guarded([&] { return determinism(out / "determinism", rulctl); }));
    return all ? 0 : 1;
}
