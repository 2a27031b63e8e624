#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qdre/data.hpp"
#include "qdre/loss.hpp"
#include "qdre/nn/mlp.hpp"

namespace qdre::nn {

struct TrainConfig {
    double learning_rate = 3e-4;
    std::size_t batch_size = 256;
    std::size_t patience = 20;
    std::size_t max_epochs = 500;
    std::size_t epoch_cap = 100000;  ///< samples per epoch at most
    std::uint64_t seed = 0;
    LossSpec loss = LossSpec::revert();
    /// Evaluate the starting parameters as epoch 0 so they can win the
    /// best-epoch restoration (used when fine-tuning an already fitted model).
    bool baseline_epoch = false;

    /// Throws ConfigError on lr <= 0, batch_size == 0, patience == 0,
    /// max_epochs == 0 or epoch_cap == 0.
    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

struct TrainReport {
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    std::vector<double> train_loss_curve;
    std::vector<double> val_loss_curve;
    std::size_t clamp_count = 0;
    std::uint64_t final_params_checksum = 0;
    bool diverged = false;
    std::string stop_reason;
    TrainConfig config;
};

/// Stops after `patience` consecutive epochs whose validation loss is not
/// below the lowest seen so far.
class EarlyStopping {
public:
    explicit EarlyStopping(std::size_t patience);

    /// Records one epoch's validation loss; returns true if it is a new best.
    bool observe(double val_loss);
    bool should_stop() const { return since_best_ >= patience_; }
    std::size_t best_index() const { return best_index_; }
    double best() const { return best_; }
    std::size_t observed() const { return observed_; }

private:
    std::size_t patience_;
    std::size_t since_best_ = 0;
    std::size_t observed_ = 0;
    std::size_t best_index_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
};

/// min(n_train, cap)
std::size_t epoch_sample_count(std::size_t n_train, std::size_t cap);

struct BatchEvaluation {
    double risk = 0.0;
    double abs_weight = 0.0;
    std::size_t clamp_count = 0;
    std::vector<double> grad;
};

/// Something with a flat parameter vector and a weighted risk over indexed
/// training samples. run_training drives any Objective with shuffled
/// mini-batches, Adam and early stopping.
class Objective {
public:
    virtual ~Objective() = default;
    virtual std::vector<double> parameters() const = 0;
    virtual void set_parameters(std::span<const double> values) = 0;
    virtual std::size_t train_size() const = 0;
    virtual BatchEvaluation evaluate_train(std::span<const std::size_t> indices, bool with_gradient) = 0;
    virtual double validation_risk(std::size_t& clamp_count) = 0;
};

/// Per epoch: reshuffle the training indices, take the first
/// epoch_sample_count of them, step Adam over consecutive batches (the last
/// short batch is kept), then score the validation set. On exit the
/// best-validation parameters are restored. A non-finite risk stops training
/// with `diverged` set.
TrainReport run_training(Objective& objective, const TrainConfig& cfg);

/// Trains `model` on the weighted risk of cfg.loss. Both datasets must be
/// nonempty and class-balanced (DataError otherwise).
TrainReport train(MlpModel& model, const Dataset& train, const Dataset& val, const TrainConfig& cfg);

}  // namespace qdre::nn
