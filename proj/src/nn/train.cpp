#include "qdre/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qdre/errors.hpp"
#include "qdre/nn/adam.hpp"
#include "qdre/random.hpp"

namespace qdre::nn {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (patience == 0) throw ConfigError("patience must be >= 1");
    if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
    if (epoch_cap == 0) throw ConfigError("epoch_cap must be >= 1");
    try {
        loss.transform.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
    if (patience == 0) throw std::invalid_argument("patience must be >= 1");
}

bool EarlyStopping::observe(double val_loss) {
    const std::size_t index = observed_++;
    if (val_loss < best_) {
        best_ = val_loss;
        best_index_ = index;
        since_best_ = 0;
        return true;
    }
    ++since_best_;
    return false;
}

std::size_t epoch_sample_count(std::size_t n_train, std::size_t cap) { return std::min(n_train, cap); }

TrainReport run_training(Objective& objective, const TrainConfig& cfg) {
    cfg.validate();
    TrainReport report;
    report.config = cfg;

    const std::size_t n = objective.train_size();
    if (n == 0) throw DataError("training set is empty");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, "train/shuffle"));

    std::vector<double> params = objective.parameters();
    std::vector<double> best_params = params;
    AdamState adam(params.size());
    EarlyStopping stopper(cfg.patience);
    // Epoch number of entry k in the curves.
    const std::size_t first_epoch = cfg.baseline_epoch ? 0 : 1;

    auto record = [&](double train_loss, double val_loss) {
        report.train_loss_curve.push_back(train_loss);
        report.val_loss_curve.push_back(val_loss);
        if (stopper.observe(val_loss)) best_params = objective.parameters();
    };

    if (cfg.baseline_epoch) {
        double weighted = 0.0;
        double abs_w = 0.0;
        constexpr std::size_t kChunk = 8192;
        for (std::size_t start = 0; start < n; start += kChunk) {
            const auto e = objective.evaluate_train(std::span(order).subspan(start, std::min(kChunk, n - start)), false);
            weighted += e.risk * e.abs_weight;
            abs_w += e.abs_weight;
        }
        std::size_t clamps = 0;
        const double val = objective.validation_risk(clamps);
        if (!std::isfinite(val) || abs_w == 0.0 || !std::isfinite(weighted)) {
            report.diverged = true;
            report.stop_reason = "non-finite risk at the starting parameters";
            report.final_params_checksum = fnv1a64(std::as_bytes(std::span(params)));
            return report;
        }
        record(weighted / abs_w, val);
    }

    const std::size_t per_epoch = epoch_sample_count(n, cfg.epoch_cap);
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(std::span(order));
        double weighted = 0.0;
        double abs_w = 0.0;
        for (std::size_t start = 0; start < per_epoch && !report.diverged; start += cfg.batch_size) {
            const auto batch = std::span(order).subspan(start, std::min(cfg.batch_size, per_epoch - start));
            const auto e = objective.evaluate_train(batch, true);
            report.clamp_count += e.clamp_count;
            const bool finite_grad =
                std::all_of(e.grad.begin(), e.grad.end(), [](double g) { return std::isfinite(g); });
            if (!std::isfinite(e.risk) || !finite_grad) {
                report.diverged = true;
                report.stop_reason = "non-finite training risk in epoch " + std::to_string(epoch);
                break;
            }
            if (e.abs_weight == 0.0) continue;
            weighted += e.risk * e.abs_weight;
            abs_w += e.abs_weight;
            params = objective.parameters();
            adam_step(adam, params, e.grad, cfg.learning_rate);
            objective.set_parameters(params);
        }
        if (report.diverged) break;

        std::size_t clamps = 0;
        const double val = objective.validation_risk(clamps);
        report.clamp_count += clamps;
        if (!std::isfinite(val)) {
            report.diverged = true;
            report.stop_reason = "non-finite validation risk in epoch " + std::to_string(epoch);
            break;
        }
        record(abs_w > 0.0 ? weighted / abs_w : 0.0, val);
        report.epochs_run = epoch;
        if (stopper.should_stop()) {
            report.stop_reason = "patience exhausted";
            break;
        }
    }
    if (report.stop_reason.empty()) report.stop_reason = "max_epochs reached";

    if (stopper.observed() > 0) {
        report.best_val_loss = stopper.best();
        report.best_epoch = stopper.best_index() + first_epoch;
        objective.set_parameters(best_params);
    }
    const auto final_params = objective.parameters();
    report.final_params_checksum = fnv1a64(std::as_bytes(std::span(final_params)));
    return report;
}

namespace {

class MlpObjective final : public Objective {
public:
    MlpObjective(MlpModel& model, const Dataset& train, const Dataset& val, const LossSpec& loss)
        : model_(model), train_(train), val_(val), loss_(loss) {}

    std::vector<double> parameters() const override {
        const auto p = model_.parameters();
        return {p.begin(), p.end()};
    }
    void set_parameters(std::span<const double> values) override { model_.set_parameters(values); }
    std::size_t train_size() const override { return train_.size(); }

    BatchEvaluation evaluate_train(std::span<const std::size_t> indices, bool with_gradient) override {
        auto r = risk_and_gradient(model_, train_, indices, loss_, with_gradient);
        return {r.risk, r.abs_weight, r.clamp_count, std::move(r.grad)};
    }

    double validation_risk(std::size_t& clamp_count) override {
        return weighted_risk(model_, val_, loss_, &clamp_count);
    }

private:
    MlpModel& model_;
    const Dataset& train_;
    const Dataset& val_;
    LossSpec loss_;
};

void check_training_data(const Dataset& data, const char* name, std::size_t input_dim) {
    if (data.empty()) throw DataError(std::string(name) + " set is empty");
    if (data.dim() != input_dim) {
        throw DataError(std::string(name) + " set has " + std::to_string(data.dim()) +
                        " features, model expects " + std::to_string(input_dim));
    }
    if (!data.is_balanced(1e-6)) {
        throw DataError(std::string(name) + " set is not class-balanced (weight sums " +
                        std::to_string(data.weight_sum(0)) + " vs " + std::to_string(data.weight_sum(1)) + ")");
    }
}

}  // namespace

TrainReport train(MlpModel& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg) {
    cfg.validate();
    check_training_data(train_set, "training", model.input_dim());
    check_training_data(val_set, "validation", model.input_dim());
    MlpObjective objective(model, train_set, val_set, cfg.loss);
    return run_training(objective, cfg);
}

}  // namespace qdre::nn
