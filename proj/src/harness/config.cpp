#include "rul/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "rul/error.hpp"

namespace rul::harness {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw UsageError("config." + path + ": " + what);
}

// Reads the keys of one JSON object, remembering which were consumed so
// finish() can reject the rest.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    void size(const char* key, std::size_t& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_unsigned()) fail(at(key), "expected a non-negative integer");
            out = v->get<std::size_t>();
        }
    }
    void size(const char* key, std::optional<std::size_t>& out) {
        if (const json* v = take(key)) {
            if (v->is_null()) {
                out.reset();
                return;
            }
            if (!v->is_number_unsigned()) fail(at(key), "expected a non-negative integer or null");
            out = v->get<std::size_t>();
        }
    }
    void integer(const char* key, int& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_integer()) fail(at(key), "expected an integer");
            out = v->get<int>();
        }
    }
    void u64(const char* key, std::uint64_t& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_unsigned()) fail(at(key), "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void real(const char* key, double& out) {
        if (const json* v = take(key)) {
            if (!v->is_number()) fail(at(key), "expected a number");
            out = v->get<double>();
        }
    }
    void boolean(const char* key, bool& out) {
        if (const json* v = take(key)) {
            if (!v->is_boolean()) fail(at(key), "expected true or false");
            out = v->get<bool>();
        }
    }
    const json* string_or_null(const char* key) {
        const json* v = take(key);
        if (v && !v->is_null() && !v->is_string()) fail(at(key), "expected a string");
        return v;
    }
    const json* raw(const char* key) { return take(key); }
    std::optional<Section> sub(const char* key) {
        if (const json* v = take(key)) return Section(*v, at(key));
        return std::nullopt;
    }
    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) fail(at(key), "unknown key");
        }
    }
    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json* take(const char* key) {
        used_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

json optional_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void ExperimentConfig::validate() const {
    if (manifest.empty()) fail("manifest", "required");
    if (n_window < 2) fail("window.n_w", "must be at least 2");
    if (step == 0) fail("window.step", "must be positive");
    if (!(hs_label_fraction > 0.0 && hs_label_fraction < 0.5)) fail("labels.p", "must lie in (0, 0.5)");
    try {
        trigger.validate();
    } catch (const UsageError& e) {
        fail("trigger", e.what());
    }
    if (hs_model.hidden == 0) fail("hs_model.hidden", "must be positive");
    if (hs_model.modules == 0) fail("hs_model.modules", "must be positive");
    if (hs_model.layers_per_module == 0) fail("hs_model.layers_per_module", "must be positive");
    try {
        resolved_stman_config(*this, 1).validate();
    } catch (const UsageError& e) {
        fail("stman", e.what());
    }
    if (!(optimizer.lr > 0.0)) fail("optimizer.lr", "must be positive");
    if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0)) fail("optimizer.beta1", "must lie in [0, 1)");
    if (!(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0)) fail("optimizer.beta2", "must lie in [0, 1)");
    if (!(optimizer.eps > 0.0)) fail("optimizer.eps", "must be positive");
    if (batch_size == 0) fail("training.batch_size", "must be positive");
    if (hs_epoch_count() == 0) fail(hs_epochs ? "training.hs_epochs" : "training.epochs", "must be positive");
    if (rul_epoch_count() == 0) fail(rul_epochs ? "training.rul_epochs" : "training.epochs", "must be positive");
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) fail("training.val_fraction", "must lie in [0, 1)");
    if (!(mape_floor > 0.0)) fail("training.mape_floor", "must be positive");
    if (k < 2) fail("cv.k", "must be at least 2");
    if (max_folds && (*max_folds == 0 || *max_folds > k)) fail("cv.max_folds", "must lie in [1, k]");
    if (!(mape_exclude_below >= 0.0 && mape_exclude_below < 1.0)) {
        fail("evaluation.mape_exclude_below", "must lie in [0, 1)");
    }
}

json ExperimentConfig::to_json() const {
    return {{"format", "rul-experiment-config"},
            {"version", 1},
            {"manifest", manifest.generic_string()},
            {"schema", schema ? json(std::string(data::to_string(*schema))) : json(nullptr)},
            {"window", {{"n_w", n_window}, {"step", step}}},
            {"labels", {{"p", hs_label_fraction}}},
            {"trigger", trigger.to_json()},
            {"hs_model",
             {{"hidden", hs_model.hidden}, {"modules", hs_model.modules}, {"layers_per_module", hs_model.layers_per_module}}},
            {"stman",
             {{"k", stman.k}, {"d_model", stman.d_model}, {"n_heads", stman.n_heads}, {"d_fuse", stman.d_fuse},
              {"d_h", stman.d_h}}},
            {"optimizer",
             {{"lr", optimizer.lr}, {"beta1", optimizer.beta1}, {"beta2", optimizer.beta2}, {"eps", optimizer.eps}}},
            {"training",
             {{"batch_size", batch_size},
              {"epochs", epochs},
              {"patience", patience},
              {"hs_epochs", optional_json(hs_epochs)},
              {"rul_epochs", optional_json(rul_epochs)},
              {"val_fraction", val_fraction},
              {"balance_hs_classes", balance_hs_classes},
              {"mape_floor", mape_floor}}},
            {"cv", {{"k", k}, {"max_folds", optional_json(max_folds)}}},
            {"evaluation", {{"mape_exclude_below", mape_exclude_below}}},
            {"seed", seed}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    ExperimentConfig c;
    Section root(j, "");
    if (const json* v = root.string_or_null("format"); v && !v->is_null() && *v != "rul-experiment-config") {
        fail("format", "expected \"rul-experiment-config\"");
    }
    if (const json* v = root.raw("version"); v && !(v->is_number_integer() && v->get<int>() == 1)) {
        fail("version", "unsupported (expected 1)");
    }
    if (const json* v = root.string_or_null("manifest"); v && v->is_string()) {
        c.manifest = v->get<std::string>();
        if (c.manifest.is_relative() && !base_dir.empty()) c.manifest = base_dir / c.manifest;
    }
    if (const json* v = root.string_or_null("schema"); v && v->is_string()) {
        try {
            c.schema = data::parse_schema(v->get<std::string>());
        } catch (const Error& e) {
            fail("schema", e.what());
        }
    }
    if (auto s = root.sub("window")) {
        s->size("n_w", c.n_window);
        s->size("step", c.step);
        s->finish();
    }
    if (auto s = root.sub("labels")) {
        s->real("p", c.hs_label_fraction);
        s->finish();
    }
    if (auto s = root.sub("trigger")) {
        s->integer("consecutive_required", c.trigger.consecutive_required);
        s->real("unhealthy_threshold", c.trigger.unhealthy_threshold);
        s->real("mct_fraction", c.trigger.mct_fraction);
        s->finish();
    }
    if (auto s = root.sub("hs_model")) {
        s->size("hidden", c.hs_model.hidden);
        s->size("modules", c.hs_model.modules);
        s->size("layers_per_module", c.hs_model.layers_per_module);
        s->finish();
    }
    if (auto s = root.sub("stman")) {
        s->size("k", c.stman.k);
        s->size("d_model", c.stman.d_model);
        s->size("n_heads", c.stman.n_heads);
        s->size("d_fuse", c.stman.d_fuse);
        s->size("d_h", c.stman.d_h);
        s->finish();
    }
    if (auto s = root.sub("optimizer")) {
        s->real("lr", c.optimizer.lr);
        s->real("beta1", c.optimizer.beta1);
        s->real("beta2", c.optimizer.beta2);
        s->real("eps", c.optimizer.eps);
        s->finish();
    }
    if (auto s = root.sub("training")) {
        s->size("batch_size", c.batch_size);
        s->size("epochs", c.epochs);
        s->size("patience", c.patience);
        s->size("hs_epochs", c.hs_epochs);
        s->size("rul_epochs", c.rul_epochs);
        s->real("val_fraction", c.val_fraction);
        s->boolean("balance_hs_classes", c.balance_hs_classes);
        s->real("mape_floor", c.mape_floor);
        s->finish();
    }
    if (auto s = root.sub("cv")) {
        s->size("k", c.k);
        s->size("max_folds", c.max_folds);
        s->finish();
    }
    if (auto s = root.sub("evaluation")) {
        s->real("mape_exclude_below", c.mape_exclude_below);
        s->finish();
    }
    root.u64("seed", c.seed);
    root.finish();
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string(), 0, e.what());
    }
    return from_json(j, path.parent_path());
}

hs::HsConfig resolved_hs_config(const ExperimentConfig& config, std::size_t n_features) {
    hs::HsConfig c = config.hs_model;
    c.n_features = n_features;
    c.n_window = config.n_window;
    return c;
}

stman::StManConfig resolved_stman_config(const ExperimentConfig& config, std::size_t n_features) {
    stman::StManConfig c = config.stman;
    c.n_features = n_features;
    c.n_window = config.n_window;
    return c;
}

}  // namespace rul::harness
