#include "qdre/rosmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qdre/errors.hpp"
#include "qdre/nn/presets.hpp"
#include "qdre/nn/serialize.hpp"
#include "qdre/random.hpp"

namespace qdre::rosmm {

std::string to_string(Variant v) { return v == Variant::CoefficientOnly ? "coefficient_only" : "joint"; }

Variant variant_from_string(const std::string& name) {
    if (name == "coefficient_only" || name == "c") return Variant::CoefficientOnly;
    if (name == "joint" || name == "r") return Variant::Joint;
    throw ConfigError("unknown RoSMM variant '" + name + "'");
}

double coefficient_from_theta(double theta) {
    const double softplus = theta > 0.0 ? theta + std::log1p(std::exp(-theta)) : std::log1p(std::exp(theta));
    return 1.0 + softplus;
}

double theta_from_coefficient(double c) {
    const double x = c - 1.0;
    if (!(x > 0.0)) throw std::invalid_argument("mixture coefficient must exceed 1");
    return x > 30.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x));
}

namespace {

// Sub-ratio of a sigmoid-output BCE network: s/(1-s) = e^z.
double subratio_from_logit(double z) { return std::exp(z); }

}  // namespace

double rosmm_ratio(const RosmmModel& model, std::span<const double> x) {
    const double r_pp = subratio_from_logit(nn::forward(model.r_pp, x).z);
    const double r_pm = subratio_from_logit(nn::forward(model.r_pm, x).z);
    return mixture_ratio(model.c(), r_pp, r_pm);
}

void to_json(nlohmann::json& j, const RosmmModel& model) {
    j = {{"format", "qdre.rosmm"},
         {"version", nn::kModelFormatVersion},
         {"variant", to_string(model.variant)},
         {"theta_c", model.theta_c},
         {"c", model.c()},
         {"r_pp", model.r_pp},
         {"r_pm", model.r_pm}};
}

void from_json(const nlohmann::json& j, RosmmModel& model) {
    try {
        if (j.at("format").get<std::string>() != "qdre.rosmm") throw ConfigError("not a qdre.rosmm document");
        if (j.at("version").get<int>() != nn::kModelFormatVersion) throw ConfigError("unsupported RoSMM version");
        model.variant = variant_from_string(j.at("variant").get<std::string>());
        model.theta_c = j.at("theta_c").get<double>();
        model.r_pp = j.at("r_pp").get<nn::MlpModel>();
        model.r_pm = j.at("r_pm").get<nn::MlpModel>();
        if (model.r_pp.input_dim() != model.r_pm.input_dim()) throw ConfigError("RoSMM sub-models disagree on input dimension");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("rosmm: ") + e.what());
    }
}

SubRatioData subratio_datasets(const Dataset& data) {
    const Dataset reference = data.select(0);
    const Dataset positive = data.select(1, +1);
    const Dataset negative = data.select(1, -1);
    if (reference.empty()) throw DataError("sub-ratio training: no reference (class 0) samples");
    for (const auto& s : reference) {
        if (s.weight <= 0.0) throw DataError("sub-ratio training: reference weights must be positive");
    }
    if (positive.empty()) throw DataError("sub-ratio training: target has no positively weighted samples");
    if (negative.empty()) throw DataError("sub-ratio training: target has no negatively weighted samples");

    SubRatioData out{concat(reference, positive), reference};
    for (auto s : negative) {
        s.weight = -s.weight;
        out.negative.add(std::move(s));
    }
    out.positive.balance_classes();
    out.negative.balance_classes();
    return out;
}

SubRatioSettings default_subratio_settings(std::uint64_t seed) {
    SubRatioSettings s;
    s.arch_pp = nn::default_architecture(nn::Role::SubRatioPositive);
    s.arch_pm = nn::default_architecture(nn::Role::SubRatioNegative);
    s.cfg_pp = nn::default_train_config(nn::Role::SubRatioPositive);
    s.cfg_pm = nn::default_train_config(nn::Role::SubRatioNegative);
    s.cfg_pp.seed = derive_seed(seed, "r_pp");
    s.cfg_pm.seed = derive_seed(seed, "r_pm");
    return s;
}

namespace {

nn::MlpModel train_one(const Dataset& train, const Dataset& val, const nn::MlpArchitecture& arch,
                       const nn::TrainConfig& cfg, bool standardize, nn::TrainReport& report) {
    auto model = nn::make_mlp(train.dim(), arch, derive_seed(cfg.seed, "init"));
    if (standardize) {
        auto [shift, scale] = nn::standardization_from(train);
        model.set_input_standardization(std::move(shift), std::move(scale));
    }
    report = nn::train(model, train, val, cfg);
    return model;
}

}  // namespace

SubRatioTraining train_subratios(const Dataset& train, const Dataset& val, const SubRatioSettings& settings) {
    if (settings.cfg_pp.loss.kind != LossKind::Bce || settings.cfg_pm.loss.kind != LossKind::Bce) {
        throw ConfigError("sub-ratio networks are trained with the BCE loss");
    }
    const auto train_parts = subratio_datasets(train);
    const auto val_parts = subratio_datasets(val);
    SubRatioTraining out;
    out.r_pp = train_one(train_parts.positive, val_parts.positive, settings.arch_pp, settings.cfg_pp,
                         settings.standardize_inputs, out.report_pp);
    out.r_pm = train_one(train_parts.negative, val_parts.negative, settings.arch_pm, settings.cfg_pm,
                         settings.standardize_inputs, out.report_pm);
    return out;
}

namespace {

struct RatioLoss {
    double value;
    double d_ratio;  // dL/dr
};

// L(T^-1(r), y) and its derivative in r: dL/ds / T'(s).
RatioLoss loss_of_ratio(const LossSpec& loss, double r, int y, std::size_t* clamps) {
    const double s = loss.transform.inverse(r);
    const double value = loss.value(s, y, clamps);
    const double d_ratio = loss.gradient(s, y) / loss.transform.derivative(std::clamp(s, loss.transform.a, loss.transform.b));
    return {value, d_ratio};
}

void require_revert(const LossSpec& loss) {
    if (loss.kind != LossKind::Revert) throw ConfigError("RoSMM fitting uses the REVERT loss");
}

void require_balanced(const Dataset& data, const char* name) {
    if (data.empty()) throw DataError(std::string(name) + " set is empty");
    if (!data.is_balanced(1e-6)) throw DataError(std::string(name) + " set is not class-balanced");
}

}  // namespace

RosmmRisk rosmm_risk(const RosmmModel& model, const Dataset& data, std::span<const std::size_t> indices,
                     const LossSpec& loss, bool network_gradients) {
    RosmmRisk out;
    if (network_gradients) {
        out.d_pp.assign(model.r_pp.parameter_count(), 0.0);
        out.d_pm.assign(model.r_pm.parameter_count(), 0.0);
    }
    for (std::size_t i : indices) out.abs_weight += std::abs(data[i].weight);
    if (indices.empty() || out.abs_weight == 0.0) return out;

    const auto cache_pp = nn::forward_batch(model.r_pp, nn::gather_inputs(model.r_pp, data, indices));
    const auto cache_pm = nn::forward_batch(model.r_pm, nn::gather_inputs(model.r_pm, data, indices));
    const double c = model.c();
    const double dc_dtheta = sigmoid(model.theta_c);
    const auto n = static_cast<Eigen::Index>(indices.size());
    Eigen::RowVectorXd dz_pp(n);
    Eigen::RowVectorXd dz_pm(n);
    double total = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& sample = data[indices[static_cast<std::size_t>(k)]];
        const double a = subratio_from_logit(cache_pp.logit[k]);
        const double b = subratio_from_logit(cache_pm.logit[k]);
        const auto l = loss_of_ratio(loss, mixture_ratio(c, a, b), sample.label, &out.clamp_count);
        total += sample.weight * l.value;
        const double g = sample.weight * l.d_ratio / out.abs_weight;
        out.d_theta += g * (a - b) * dc_dtheta;
        dz_pp[k] = g * c * a;
        dz_pm[k] = g * (1.0 - c) * b;
    }
    out.risk = total / out.abs_weight;
    if (network_gradients) {
        nn::backward_from_logit(model.r_pp, cache_pp, dz_pp, out.d_pp);
        nn::backward_from_logit(model.r_pm, cache_pm, dz_pm, out.d_pm);
    }
    return out;
}

double rosmm_risk(const RosmmModel& model, const Dataset& data, const LossSpec& loss) {
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (idx.empty()) throw DataError("RoSMM risk of an empty dataset");
    constexpr std::size_t kChunk = 8192;
    double total = 0.0;
    double abs_w = 0.0;
    for (std::size_t start = 0; start < idx.size(); start += kChunk) {
        const auto part = rosmm_risk(model, data, std::span(idx).subspan(start, std::min(kChunk, idx.size() - start)),
                                     loss, false);
        total += part.risk * part.abs_weight;
        abs_w += part.abs_weight;
    }
    return total / abs_w;
}

namespace {

/// theta_c over frozen, precomputed sub-ratio values.
class CoefficientObjective final : public nn::Objective {
public:
    struct Frozen {
        const Dataset* data;
        std::vector<double> r_pp;
        std::vector<double> r_pm;
    };

    CoefficientObjective(double& theta, Frozen train, Frozen val, const LossSpec& loss)
        : theta_(theta), train_(std::move(train)), val_(std::move(val)), loss_(loss) {}

    std::vector<double> parameters() const override { return {theta_}; }
    void set_parameters(std::span<const double> v) override { theta_ = v[0]; }
    std::size_t train_size() const override { return train_.data->size(); }

    nn::BatchEvaluation evaluate_train(std::span<const std::size_t> indices, bool with_gradient) override {
        return evaluate(train_, indices, with_gradient);
    }

    double validation_risk(std::size_t& clamps) override {
        std::vector<std::size_t> idx(val_.data->size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        const auto e = evaluate(val_, idx, false);
        clamps += e.clamp_count;
        return e.risk;
    }

private:
    nn::BatchEvaluation evaluate(const Frozen& f, std::span<const std::size_t> indices, bool with_gradient) const {
        nn::BatchEvaluation out;
        for (std::size_t i : indices) out.abs_weight += std::abs((*f.data)[i].weight);
        double d_theta = 0.0;
        if (out.abs_weight > 0.0) {
            const double c = coefficient_from_theta(theta_);
            const double dc = sigmoid(theta_);
            double total = 0.0;
            for (std::size_t i : indices) {
                const auto& sample = (*f.data)[i];
                const double a = f.r_pp[i];
                const double b = f.r_pm[i];
                const auto l = loss_of_ratio(loss_, mixture_ratio(c, a, b), sample.label, &out.clamp_count);
                total += sample.weight * l.value;
                d_theta += sample.weight * l.d_ratio * (a - b) * dc;
            }
            out.risk = total / out.abs_weight;
            d_theta /= out.abs_weight;
        }
        if (with_gradient) out.grad = {d_theta};
        return out;
    }

    double& theta_;
    Frozen train_;
    Frozen val_;
    LossSpec loss_;
};

/// [theta_c, r_pp parameters, r_pm parameters].
class JointObjective final : public nn::Objective {
public:
    JointObjective(RosmmModel& model, const Dataset& train, const Dataset& val, const LossSpec& loss)
        : model_(model), train_(train), val_(val), loss_(loss) {}

    std::vector<double> parameters() const override {
        std::vector<double> p;
        p.reserve(1 + model_.r_pp.parameter_count() + model_.r_pm.parameter_count());
        p.push_back(model_.theta_c);
        const auto pp = model_.r_pp.parameters();
        const auto pm = model_.r_pm.parameters();
        p.insert(p.end(), pp.begin(), pp.end());
        p.insert(p.end(), pm.begin(), pm.end());
        return p;
    }

    void set_parameters(std::span<const double> v) override {
        const auto n_pp = model_.r_pp.parameter_count();
        model_.theta_c = v[0];
        model_.r_pp.set_parameters(v.subspan(1, n_pp));
        model_.r_pm.set_parameters(v.subspan(1 + n_pp));
    }

    std::size_t train_size() const override { return train_.size(); }

    nn::BatchEvaluation evaluate_train(std::span<const std::size_t> indices, bool with_gradient) override {
        auto r = rosmm_risk(model_, train_, indices, loss_, with_gradient);
        nn::BatchEvaluation out{r.risk, r.abs_weight, r.clamp_count, {}};
        if (with_gradient) {
            out.grad.reserve(1 + r.d_pp.size() + r.d_pm.size());
            out.grad.push_back(r.d_theta);
            out.grad.insert(out.grad.end(), r.d_pp.begin(), r.d_pp.end());
            out.grad.insert(out.grad.end(), r.d_pm.begin(), r.d_pm.end());
        }
        return out;
    }

    double validation_risk(std::size_t&) override { return rosmm_risk(model_, val_, loss_); }

private:
    RosmmModel& model_;
    const Dataset& train_;
    const Dataset& val_;
    LossSpec loss_;
};

CoefficientObjective::Frozen freeze(const Dataset& data, const RatioFunction& r_pp, const RatioFunction& r_pm) {
    CoefficientObjective::Frozen f{&data, {}, {}};
    f.r_pp.reserve(data.size());
    f.r_pm.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double a = r_pp(data[i].features);
        const double b = r_pm(data[i].features);
        if (!std::isfinite(a) || !std::isfinite(b)) {
            throw NumericalError("non-finite sub-ratio at sample " + std::to_string(i));
        }
        f.r_pp.push_back(a);
        f.r_pm.push_back(b);
    }
    return f;
}

CoefficientObjective::Frozen freeze(const Dataset& data, const RosmmModel& model) {
    CoefficientObjective::Frozen f{&data, {}, {}};
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    constexpr std::size_t kChunk = 8192;
    for (std::size_t start = 0; start < idx.size(); start += kChunk) {
        const auto part = std::span(idx).subspan(start, std::min(kChunk, idx.size() - start));
        const auto pp = nn::forward_batch(model.r_pp, nn::gather_inputs(model.r_pp, data, part));
        const auto pm = nn::forward_batch(model.r_pm, nn::gather_inputs(model.r_pm, data, part));
        for (Eigen::Index k = 0; k < pp.logit.size(); ++k) {
            f.r_pp.push_back(subratio_from_logit(pp.logit[k]));
            f.r_pm.push_back(subratio_from_logit(pm.logit[k]));
        }
    }
    return f;
}

}  // namespace

nn::TrainReport fit_mixture_coefficient(double& theta_c, const RatioFunction& r_pp, const RatioFunction& r_pm,
                                        const Dataset& train, const Dataset& val, const nn::TrainConfig& cfg) {
    cfg.validate();
    require_revert(cfg.loss);
    require_balanced(train, "training");
    require_balanced(val, "validation");
    CoefficientObjective objective(theta_c, freeze(train, r_pp, r_pm), freeze(val, r_pp, r_pm), cfg.loss);
    return nn::run_training(objective, cfg);
}

nn::TrainReport fit_rosmm(RosmmModel& model, const Dataset& train, const Dataset& val, const nn::TrainConfig& cfg,
                          Variant variant) {
    cfg.validate();
    require_revert(cfg.loss);
    require_balanced(train, "training");
    require_balanced(val, "validation");
    if (train.dim() != model.input_dim() || val.dim() != model.input_dim()) {
        throw DataError("RoSMM input dimension does not match the data");
    }
    model.variant = variant;
    if (variant == Variant::CoefficientOnly) {
        CoefficientObjective objective(model.theta_c, freeze(train, model), freeze(val, model), cfg.loss);
        return nn::run_training(objective, cfg);
    }
    JointObjective objective(model, train, val, cfg.loss);
    return nn::run_training(objective, cfg);
}

double mass_coefficient(const Dataset& data) {
    double positive = 0.0;
    double total = 0.0;
    for (const auto& s : data) {
        if (s.label != 1) continue;
        total += s.weight;
        if (s.weight > 0.0) positive += s.weight;
    }
    if (!(total > 0.0)) throw DataError("target weights must have a positive sum");
    return positive / total;
}

}  // namespace qdre::rosmm
