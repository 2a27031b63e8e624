#include "qdre/cli/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "qdre/errors.hpp"
#include "qdre/nn/presets.hpp"
#include "qdre/nn/serialize.hpp"
#include "qdre/random.hpp"

namespace qdre::cli {

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string config_hash(const nlohmann::json& config) { return hex64(fnv1a64(config.dump())); }

std::string file_checksum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return hex64(fnv1a64(bytes));
}

nlohmann::json architecture_to_json(const nn::MlpArchitecture& arch) {
    return {{"hidden", arch.hidden},
            {"hidden_activation", nn::to_string(arch.hidden_activation)},
            {"output_activation", nn::to_string(arch.output_activation)}};
}

nn::MlpArchitecture architecture_from_json(const nlohmann::json& j, nn::MlpArchitecture base) {
    if (!j.is_object()) throw ConfigError("architecture: expected an object");
    try {
        if (j.contains("hidden")) base.hidden = j["hidden"].get<std::vector<std::size_t>>();
        if (j.contains("hidden_activation")) {
            base.hidden_activation = nn::activation_from_string(j["hidden_activation"].get<std::string>());
        }
        if (j.contains("output_activation")) {
            base.output_activation = nn::activation_from_string(j["output_activation"].get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("architecture: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("architecture: ") + e.what());
    }
    for (std::size_t w : base.hidden) {
        if (w == 0) throw ConfigError("architecture: hidden widths must be positive");
    }
    return base;
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Mlp: return "mlp";
        case ModelKind::BceMlp: return "bce-mlp";
        case ModelKind::RosmmC: return "rosmm-c";
        case ModelKind::RosmmR: return "rosmm-r";
    }
    return "mlp";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "mlp") return ModelKind::Mlp;
    if (name == "bce-mlp") return ModelKind::BceMlp;
    if (name == "rosmm-c") return ModelKind::RosmmC;
    if (name == "rosmm-r") return ModelKind::RosmmR;
    throw ConfigError("unknown model '" + name + "' (expected mlp, bce-mlp, rosmm-c or rosmm-r)");
}

namespace {

nlohmann::json subratio_to_json(const nn::MlpArchitecture& arch, const nn::TrainConfig& cfg) {
    return {{"architecture", architecture_to_json(arch)}, {"train", cfg}};
}

void apply_subratio(const nlohmann::json& j, nn::MlpArchitecture& arch, nn::TrainConfig& cfg) {
    if (!j.is_object()) throw ConfigError("subratio: expected an object");
    if (j.contains("architecture")) arch = architecture_from_json(j["architecture"], arch);
    if (j.contains("train")) nn::from_json(j["train"], cfg);
}

}  // namespace

nlohmann::json TrainRun::to_json() const {
    nlohmann::json j = {{"model", cli::to_string(kind)}, {"seed", seed}, {"train", train}};
    if (kind == ModelKind::Mlp || kind == ModelKind::BceMlp) {
        j["architecture"] = architecture_to_json(architecture);
    } else {
        j["subratio"] = {{"r_pp", subratio_to_json(subratio.arch_pp, subratio.cfg_pp)},
                         {"r_pm", subratio_to_json(subratio.arch_pm, subratio.cfg_pm)},
                         {"standardize_inputs", subratio.standardize_inputs}};
    }
    return j;
}

TrainRun default_train_run(ModelKind kind, std::uint64_t seed) {
    TrainRun run;
    run.kind = kind;
    run.seed = seed;
    nn::Role role = nn::Role::Mlp;
    switch (kind) {
        case ModelKind::Mlp: role = nn::Role::Mlp; break;
        case ModelKind::BceMlp: role = nn::Role::BceMlp; break;
        case ModelKind::RosmmC:
        case ModelKind::RosmmR: role = nn::Role::Rosmm; break;
    }
    run.architecture = nn::default_architecture(role);
    run.train = nn::default_train_config(role);
    run.train.seed = derive_seed(seed, "train/" + to_string(kind));
    run.subratio = rosmm::default_subratio_settings(seed);
    return run;
}

void apply_train_config(TrainRun& run, const nlohmann::json& file_config) {
    if (!file_config.is_object()) throw ConfigError("config: expected a JSON object");
    for (const auto& [key, value] : file_config.items()) {
        if (key == "architecture") {
            run.architecture = architecture_from_json(value, run.architecture);
        } else if (key == "train") {
            nn::from_json(value, run.train);
        } else if (key == "subratio") {
            if (!value.is_object()) throw ConfigError("subratio: expected an object");
            if (value.contains("r_pp")) apply_subratio(value["r_pp"], run.subratio.arch_pp, run.subratio.cfg_pp);
            if (value.contains("r_pm")) apply_subratio(value["r_pm"], run.subratio.arch_pm, run.subratio.cfg_pm);
            if (value.contains("standardize_inputs")) {
                run.subratio.standardize_inputs = value["standardize_inputs"].get<bool>();
            }
        } else if (key != "seed" && key != "model" && key != "data" && key != "out") {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    run.train.validate();
    run.subratio.cfg_pp.validate();
    run.subratio.cfg_pm.validate();
}

}  // namespace qdre::cli
