#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qdre/data.hpp"
#include "qdre/errors.hpp"
#include "qdre/nn/presets.hpp"
#include "qdre/nn/serialize.hpp"
#include "qdre/nn/train.hpp"

using namespace qdre;
using namespace qdre::nn;

namespace {

// Scripted objective: one scalar parameter that counts optimiser steps, a
// fixed validation curve, and a log of every training index it was asked for.
class ScriptedObjective final : public Objective {
public:
    ScriptedObjective(std::size_t n, std::vector<double> val_curve) : n_(n), curve_(std::move(val_curve)) {}

    std::vector<double> parameters() const override { return {param_}; }
    void set_parameters(std::span<const double> v) override { param_ = v[0]; }
    std::size_t train_size() const override { return n_; }

    BatchEvaluation evaluate_train(std::span<const std::size_t> idx, bool with_gradient) override {
        if (with_gradient) {
            batch_sizes.push_back(idx.size());
            samples_this_epoch += idx.size();
        }
        BatchEvaluation e{1.0, static_cast<double>(idx.size()), 0, {}};
        if (with_gradient) e.grad = {-1.0};  // Adam moves the parameter up by ~lr per step
        return e;
    }

    double validation_risk(std::size_t&) override {
        epoch_samples.push_back(samples_this_epoch);
        samples_this_epoch = 0;
        params_at_validation.push_back(param_);
        const std::size_t k = calls_++;
        return k < curve_.size() ? curve_[k] : curve_.back();
    }

    std::vector<std::size_t> batch_sizes;
    std::vector<std::size_t> epoch_samples;
    std::vector<double> params_at_validation;
    std::size_t samples_this_epoch = 0;

private:
    std::size_t n_;
    std::vector<double> curve_;
    std::size_t calls_ = 0;
    double param_ = 0.0;
};

TrainConfig scripted_config(std::size_t patience) {
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.batch_size = 300;
    cfg.patience = patience;
    cfg.max_epochs = 100;
    return cfg;
}

Dataset separable(std::size_t n, std::uint64_t seed) {
    SignedMixtureSpec spec;
    spec.reference.components = {{{-1.0}, {1.0}, 1.0}};
    spec.target.components = {{{1.0}, {1.0}, 1.0}};
    auto d = sample_mixture(spec, n, seed);
    d.balance_classes();
    return d;
}

}  // namespace

TEST(EarlyStopping, StopsAfterPatienceNonImprovingEpochs) {
    EarlyStopping es(3);
    const std::vector<double> curve = {5.0, 4.0, 3.0, 3.5, 3.0, 3.2};
    std::vector<bool> best;
    for (double v : curve) {
        best.push_back(es.observe(v));
        if (es.should_stop()) break;
    }
    EXPECT_EQ(es.observed(), 6u);  // 3.5, 3.0 (tie is not an improvement), 3.2
    EXPECT_TRUE(es.should_stop());
    EXPECT_EQ(es.best_index(), 2u);
    EXPECT_DOUBLE_EQ(es.best(), 3.0);
    EXPECT_EQ(best, (std::vector<bool>{true, true, true, false, false, false}));
    EXPECT_THROW(EarlyStopping(0), std::invalid_argument);
}

TEST(EpochCap, SampleCount) {
    EXPECT_EQ(epoch_sample_count(500000, 100000), 100000u);
    EXPECT_EQ(epoch_sample_count(650, 100000), 650u);
    EXPECT_EQ(epoch_sample_count(100000, 100000), 100000u);
}

TEST(RunTraining, EpochCapAndShortLastBatch) {
    ScriptedObjective obj(1000, {3.0, 2.0, 1.0});
    auto cfg = scripted_config(2);
    cfg.epoch_cap = 700;
    cfg.max_epochs = 3;
    run_training(obj, cfg);
    ASSERT_EQ(obj.epoch_samples.size(), 3u);
    for (auto s : obj.epoch_samples) EXPECT_EQ(s, 700u);
    EXPECT_EQ(obj.batch_sizes, (std::vector<std::size_t>{300, 300, 100, 300, 300, 100, 300, 300, 100}));
}

TEST(RunTraining, RestoresBestEpochParameters) {
    ScriptedObjective obj(600, {5.0, 4.0, 2.0, 3.0, 3.0, 3.0, 9.0});
    const auto report = run_training(obj, scripted_config(3));
    EXPECT_EQ(report.epochs_run, 6u);
    EXPECT_EQ(report.best_epoch, 3u);
    EXPECT_DOUBLE_EQ(report.best_val_loss, 2.0);
    EXPECT_EQ(report.stop_reason, "patience exhausted");
    EXPECT_EQ(report.val_loss_curve.size(), 6u);
    EXPECT_DOUBLE_EQ(obj.parameters()[0], obj.params_at_validation[2]);
    EXPECT_GT(obj.params_at_validation[5], obj.params_at_validation[2]);
}

TEST(RunTraining, BaselineEpochCanWin) {
    ScriptedObjective obj(600, {1.0, 2.0, 3.0, 4.0});
    auto cfg = scripted_config(2);
    cfg.baseline_epoch = true;
    const auto report = run_training(obj, cfg);
    EXPECT_EQ(report.best_epoch, 0u);
    EXPECT_EQ(report.epochs_run, 2u);
    EXPECT_DOUBLE_EQ(obj.parameters()[0], 0.0);
}

TEST(RunTraining, MaxEpochsAndDivergence) {
    ScriptedObjective steady(600, {3.0, 2.0, 1.0, 0.5});
    auto cfg = scripted_config(5);
    cfg.max_epochs = 4;
    auto report = run_training(steady, cfg);
    EXPECT_EQ(report.epochs_run, 4u);
    EXPECT_EQ(report.stop_reason, "max_epochs reached");
    EXPECT_FALSE(report.diverged);

    ScriptedObjective blowup(600, {1.0, NAN});
    report = run_training(blowup, cfg);
    EXPECT_TRUE(report.diverged);
    EXPECT_EQ(report.best_epoch, 1u);
}

TEST(TrainConfig, ValidationAndJson) {
    TrainConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.batch_size = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.learning_rate = -1;
    EXPECT_THROW(cfg.validate(), ConfigError);

    TrainConfig base = default_train_config(Role::SubRatioNegative);
    base.seed = 77;
    const nlohmann::json j = base;
    EXPECT_EQ(j["optimizer"], "Adam");
    TrainConfig back;
    from_json(j, back);
    EXPECT_EQ(back, base);
    EXPECT_THROW(from_json(nlohmann::json{{"optimizer", "SGD"}}, back), ConfigError);
    from_json(nlohmann::json{{"patience", 3}}, back);
    EXPECT_EQ(back.patience, 3u);
    EXPECT_EQ(back.batch_size, 64u);
}

TEST(Presets, ReferenceConfigurations) {
    const auto mlp = default_architecture(Role::Mlp);
    EXPECT_EQ(mlp.hidden, (std::vector<std::size_t>{128, 256, 128}));
    EXPECT_EQ(mlp.hidden_activation, Activation::Relu);
    EXPECT_EQ(mlp.output_activation, Activation::Sigmoid);
    for (auto role : {Role::SubRatioPositive, Role::SubRatioNegative, Role::Rosmm}) {
        EXPECT_EQ(default_architecture(role).hidden, (std::vector<std::size_t>{128, 128, 128}));
    }
    struct Row {
        Role role;
        LossKind loss;
        double lr;
        std::size_t batch;
        std::size_t patience;
    };
    for (const Row& r : {Row{Role::Mlp, LossKind::Revert, 3e-4, 256, 20}, Row{Role::SubRatioPositive, LossKind::Bce, 1e-3, 128, 15},
                         Row{Role::SubRatioNegative, LossKind::Bce, 1e-3, 64, 15}, Row{Role::Rosmm, LossKind::Revert, 3e-4, 512, 10}}) {
        const auto cfg = default_train_config(r.role);
        EXPECT_EQ(cfg.loss.kind, r.loss) << to_string(r.role);
        EXPECT_DOUBLE_EQ(cfg.learning_rate, r.lr);
        EXPECT_EQ(cfg.batch_size, r.batch);
        EXPECT_EQ(cfg.patience, r.patience);
        EXPECT_EQ(cfg.epoch_cap, 100000u);
        EXPECT_EQ(cfg.max_epochs, 500u);
    }
    const auto mlp_input = make_mlp(kReferenceInputDim, mlp, 0);
    EXPECT_EQ(mlp_input.parameter_count(), 16u * 128 + 128 + 128u * 256 + 256 + 256u * 128 + 128 + 128 + 1);
}

TEST(Train, RejectsUnbalancedOrMismatchedData) {
    auto d = separable(200, 1);
    auto model = make_mlp(1, {{4}, Activation::Relu, Activation::Sigmoid}, 1);
    Dataset unbalanced(1);
    for (const auto& s : d) unbalanced.add({s.features, s.label == 1 ? 2.0 * s.weight : s.weight, s.label});
    EXPECT_THROW(train(model, unbalanced, d, {}), DataError);
    EXPECT_THROW(train(model, d, Dataset(1), {}), DataError);
    auto wide = make_mlp(2, {{4}, Activation::Relu, Activation::Sigmoid}, 1);
    EXPECT_THROW(train(wide, d, d, {}), DataError);
}

TEST(Train, LearnsASeparableProblemDeterministically) {
    const auto tr = separable(2000, 2);
    const auto va = separable(500, 3);
    TrainConfig cfg;
    cfg.learning_rate = 3e-3;
    cfg.batch_size = 64;
    cfg.max_epochs = 40;
    cfg.patience = 5;
    cfg.seed = 11;
    auto m1 = make_mlp(1, {{16}, Activation::Relu, Activation::Sigmoid}, 4);
    auto m2 = m1;
    const double before = weighted_risk(m1, va, cfg.loss);
    const auto r1 = train(m1, tr, va, cfg);
    const auto r2 = train(m2, tr, va, cfg);
    EXPECT_LT(r1.best_val_loss, before);
    EXPECT_EQ(r1.final_params_checksum, r2.final_params_checksum);
    EXPECT_EQ(m1, m2);
    // Two unit-variance Gaussians at -1 and +1: r(x) = e^{2x}.
    const std::vector<double> x = {0.5};
    EXPECT_NEAR(predict_ratio(m1, x, cfg.loss), std::exp(1.0), 0.6);
}
