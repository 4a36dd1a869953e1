#include "rul/tensor/checkpoint.hpp"

#include <algorithm>
#include <fstream>

#include "rul/error.hpp"

namespace rul {

nlohmann::json params_to_json(const ParameterList& params) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& p : params) {
        if (out.contains(p.name)) throw Error("duplicate parameter name '" + p.name + "'");
        out[p.name] = {{"shape", p.tensor.shape()},
                       {"data", std::vector<double>(p.tensor.data().begin(), p.tensor.data().end())}};
    }
    return out;
}

void params_from_json(const nlohmann::json& j, const ParameterList& params) {
    if (!j.is_object()) throw DataError("checkpoint: 'params' must be an object");
    if (j.size() != params.size()) {
        throw DataError("checkpoint: expected " + std::to_string(params.size()) + " parameters, found " +
                        std::to_string(j.size()));
    }
    for (const auto& p : params) {
        if (!j.contains(p.name)) throw DataError("checkpoint: missing parameter '" + p.name + "'");
        const auto& entry = j.at(p.name);
        const auto shape = entry.at("shape").get<Shape>();
        if (shape != p.tensor.shape()) {
            throw DataError("checkpoint: parameter '" + p.name + "' has shape " + shape_str(shape) + ", model expects " +
                            shape_str(p.tensor.shape()));
        }
        const auto values = entry.at("data").get<std::vector<double>>();
        if (values.size() != p.tensor.numel()) throw DataError("checkpoint: parameter '" + p.name + "' data size mismatch");
        auto t = p.tensor;
        std::copy(values.begin(), values.end(), t.mutable_data().begin());
    }
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    nlohmann::json j = {{"format", kCheckpointFormat}, {"version", kCheckpointVersion}, {"kind", ckpt.kind},
                        {"config", ckpt.config},       {"norm", ckpt.norm},               {"params", ckpt.params}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out << j.dump() << '\n';
    if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), 0, e.what());
    }
    if (j.value("format", "") != kCheckpointFormat) throw DataError(path.string() + ": not a rul checkpoint");
    if (j.value("version", 0) != kCheckpointVersion) {
        throw DataError(path.string() + ": unsupported checkpoint version " + j.value("version", nlohmann::json()).dump());
    }
    return {j.at("kind").get<std::string>(), j.at("config"), j.at("norm"), j.at("params")};
}

}  // namespace rul
