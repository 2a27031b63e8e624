#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdre/data.hpp"
#include "qdre/loss.hpp"
#include "qdre/nn/mlp.hpp"
#include "qdre/nn/train.hpp"

namespace qdre::rosmm {

// Ratio of signed mixtures: the target is split by weight sign into two
// proper densities p_{w+}, p_{w-}, each compared against the reference by a
// probabilistic (BCE) classifier, and recombined as
//
//     r(x) = c r_pp(x) + (1 - c) r_pm(x),   c >= 1.

enum class Variant { CoefficientOnly, Joint };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

/// c = 1 + softplus(theta) > 1 (until softplus underflows below theta ~ -36).
double coefficient_from_theta(double theta);
/// Inverse of coefficient_from_theta for c > 1.
double theta_from_coefficient(double c);

inline double mixture_ratio(double c, double r_pp, double r_pm) { return c * r_pp + (1.0 - c) * r_pm; }

struct RosmmModel {
    nn::MlpModel r_pp;  ///< sigmoid output, ratio e^z
    nn::MlpModel r_pm;
    double theta_c = 0.0;
    Variant variant = Variant::CoefficientOnly;

    double c() const { return coefficient_from_theta(theta_c); }
    std::size_t input_dim() const { return r_pp.input_dim(); }
};

double rosmm_ratio(const RosmmModel& model, std::span<const double> x);

void to_json(nlohmann::json& j, const RosmmModel& model);
void from_json(const nlohmann::json& j, RosmmModel& model);

/// Training sets for the two sub-ratio classifiers: reference (label 0)
/// against the positively weighted target events, and reference against the
/// negatively weighted target events with |w| (label 1). Both balanced.
/// Throws DataError if either target partition is empty or the reference has
/// non-positive weights.
struct SubRatioData {
    Dataset positive;
    Dataset negative;
};
SubRatioData subratio_datasets(const Dataset& data);

struct SubRatioSettings {
    nn::MlpArchitecture arch_pp;
    nn::MlpArchitecture arch_pm;
    nn::TrainConfig cfg_pp;
    nn::TrainConfig cfg_pm;
    bool standardize_inputs = true;
};

/// Reference settings for both sub-ratio networks, seeded from `seed`.
SubRatioSettings default_subratio_settings(std::uint64_t seed);

struct SubRatioTraining {
    nn::MlpModel r_pp;
    nn::MlpModel r_pm;
    nn::TrainReport report_pp;
    nn::TrainReport report_pm;
};

SubRatioTraining train_subratios(const Dataset& train, const Dataset& val, const SubRatioSettings& settings);

/// Weighted REVERT risk of s = T^-1(r(x)) and its gradient with respect to
/// theta_c and (optionally) both networks' parameters.
struct RosmmRisk {
    double risk = 0.0;
    double abs_weight = 0.0;
    double d_theta = 0.0;
    std::vector<double> d_pp;
    std::vector<double> d_pm;
    std::size_t clamp_count = 0;
};

RosmmRisk rosmm_risk(const RosmmModel& model, const Dataset& data, std::span<const std::size_t> indices,
                     const LossSpec& loss, bool network_gradients);
double rosmm_risk(const RosmmModel& model, const Dataset& data, const LossSpec& loss);

/// Fits the model on the REVERT risk of T^-1(r(x)). CoefficientOnly moves
/// theta_c only; Joint moves theta_c and both networks. Training starts from
/// the model's current parameters. cfg.loss must be REVERT.
nn::TrainReport fit_rosmm(RosmmModel& model, const Dataset& train, const Dataset& val, const nn::TrainConfig& cfg,
                          Variant variant);

using RatioFunction = std::function<double(std::span<const double>)>;

/// CoefficientOnly fit for arbitrary frozen sub-ratio functions (e.g. the
/// analytic oracle). Sub-ratios are evaluated once per sample.
nn::TrainReport fit_mixture_coefficient(double& theta_c, const RatioFunction& r_pp, const RatioFunction& r_pm,
                                        const Dataset& train, const Dataset& val, const nn::TrainConfig& cfg);

/// Positive-weight share of the target: sum_{w>0} w / sum w over class 1.
double mass_coefficient(const Dataset& data);

}  // namespace qdre::rosmm
