#include "qdre/nn/presets.hpp"

namespace qdre::nn {

std::string to_string(Role role) {
    switch (role) {
        case Role::Mlp: return "mlp";
        case Role::BceMlp: return "bce-mlp";
        case Role::SubRatioPositive: return "r_pp";
        case Role::SubRatioNegative: return "r_pm";
        case Role::Rosmm: return "rosmm";
    }
    return "mlp";
}

MlpArchitecture default_architecture(Role role) {
    switch (role) {
        case Role::SubRatioPositive:
        case Role::SubRatioNegative:
        case Role::Rosmm:  // both of its networks
            return {{128, 128, 128}, Activation::Relu, Activation::Sigmoid};
        default:
            return {{128, 256, 128}, Activation::Relu, Activation::Sigmoid};
    }
}

TrainConfig default_train_config(Role role) {
    TrainConfig cfg;
    cfg.max_epochs = 500;
    cfg.epoch_cap = 100000;
    switch (role) {
        case Role::Mlp:
            cfg.loss = LossSpec::revert();
            cfg.learning_rate = 3e-4;
            cfg.batch_size = 256;
            cfg.patience = 20;
            break;
        case Role::BceMlp:
            // Baseline with the MLP optimiser settings and the probabilistic loss.
            cfg.loss = LossSpec::bce();
            cfg.learning_rate = 3e-4;
            cfg.batch_size = 256;
            cfg.patience = 20;
            break;
        case Role::SubRatioPositive:
            cfg.loss = LossSpec::bce();
            cfg.learning_rate = 1e-3;
            cfg.batch_size = 128;
            cfg.patience = 15;
            break;
        case Role::SubRatioNegative:
            cfg.loss = LossSpec::bce();
            cfg.learning_rate = 1e-3;
            cfg.batch_size = 64;
            cfg.patience = 15;
            break;
        case Role::Rosmm:
            cfg.loss = LossSpec::revert();
            cfg.learning_rate = 3e-4;
            cfg.batch_size = 512;
            cfg.patience = 10;
            cfg.baseline_epoch = true;
            break;
    }
    return cfg;
}

}  // namespace qdre::nn
