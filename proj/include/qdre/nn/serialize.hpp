#pragma once

#include "json.hpp"
#include "qdre/loss.hpp"
#include "qdre/nn/mlp.hpp"
#include "qdre/nn/train.hpp"

// JSON forms. Models are versioned ("format"/"version" keys) and store
// weight matrices row-major as decimal doubles.

namespace qdre {

void to_json(nlohmann::json& j, const RatioTrickTransform& t);
void from_json(const nlohmann::json& j, RatioTrickTransform& t);
void to_json(nlohmann::json& j, const LossSpec& loss);
void from_json(const nlohmann::json& j, LossSpec& loss);

}  // namespace qdre

namespace qdre::nn {

inline constexpr int kModelFormatVersion = 1;

void to_json(nlohmann::json& j, const MlpModel& model);
/// Throws ConfigError on schema errors.
void from_json(const nlohmann::json& j, MlpModel& model);

void to_json(nlohmann::json& j, const RatioClassifier& c);
void from_json(const nlohmann::json& j, RatioClassifier& c);

void to_json(nlohmann::json& j, const TrainConfig& cfg);
/// Partial objects update only the keys present.
void from_json(const nlohmann::json& j, TrainConfig& cfg);

void to_json(nlohmann::json& j, const TrainReport& report);

}  // namespace qdre::nn
