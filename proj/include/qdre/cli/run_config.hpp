#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "qdre/nn/mlp.hpp"
#include "qdre/nn/train.hpp"
#include "qdre/rosmm.hpp"

namespace qdre::cli {

/// Throws ConfigError if the file is missing or not valid JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Pretty-printed, newline-terminated.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

/// FNV-1a of the compact dump (object keys are sorted), as 16 hex digits.
std::string config_hash(const nlohmann::json& config);
std::string file_checksum(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

nlohmann::json architecture_to_json(const nn::MlpArchitecture& arch);
/// Keys present in `j` override `base`.
nn::MlpArchitecture architecture_from_json(const nlohmann::json& j, nn::MlpArchitecture base);

enum class ModelKind { Mlp, BceMlp, RosmmC, RosmmR };

std::string to_string(ModelKind kind);
/// Throws ConfigError on an unknown name.
ModelKind model_kind_from_string(const std::string& name);

/// Everything `train` needs, resolved from defaults, then the config file,
/// then command-line flags.
///
/// Seeds: the main fit uses derive_seed(seed, "train/<model>"), network
/// initialisation derive_seed(fit seed, "init"), and the sub-ratio networks
/// derive_seed(seed, "r_pp") / derive_seed(seed, "r_pm").
struct TrainRun {
    ModelKind kind = ModelKind::Mlp;
    std::uint64_t seed = 0;
    nn::MlpArchitecture architecture;
    nn::TrainConfig train;
    rosmm::SubRatioSettings subratio;

    nlohmann::json to_json() const;
};

TrainRun default_train_run(ModelKind kind, std::uint64_t seed);

/// Applies a config-file object: {"architecture": {...}, "train": {...},
/// "subratio": {"r_pp": {"architecture", "train"}, "r_pm": {...},
/// "standardize_inputs": bool}}. Unknown top-level keys are rejected.
void apply_train_config(TrainRun& run, const nlohmann::json& file_config);

}  // namespace qdre::cli
