#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdre/data.hpp"
#include "qdre/loss.hpp"

namespace qdre::nn {

enum class Activation { Identity, Relu, Sigmoid, Tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct LayerShape {
    std::size_t in = 0;
    std::size_t out = 0;
    Activation activation = Activation::Identity;

    bool operator==(const LayerShape&) const = default;
};

/// Hidden widths plus activations; input width comes from the data.
struct MlpArchitecture {
    std::vector<std::size_t> hidden;
    Activation hidden_activation = Activation::Relu;
    Activation output_activation = Activation::Sigmoid;

    bool operator==(const MlpArchitecture&) const = default;
};

/// Dense feed-forward network with a single output unit.
///
/// All parameters live in one flat buffer, layer by layer: the weight matrix
/// (out x in, column-major) followed by the bias vector. Inputs are
/// standardised as (x - shift) / scale before the first layer.
class MlpModel {
public:
    MlpModel() = default;
    /// Zero-initialised network. Throws std::invalid_argument if the layer
    /// widths do not chain or the last layer is not one unit wide.
    MlpModel(std::size_t input_dim, std::vector<LayerShape> layers);

    std::size_t input_dim() const { return input_dim_; }
    std::span<const LayerShape> layers() const { return layers_; }
    Activation output_activation() const { return layers_.back().activation; }

    std::size_t parameter_count() const { return params_.size(); }
    std::span<const double> parameters() const { return params_; }
    std::span<double> parameters() { return params_; }
    void set_parameters(std::span<const double> values);

    Eigen::Map<const Eigen::MatrixXd> weights(std::size_t layer) const;
    Eigen::Map<Eigen::MatrixXd> weights(std::size_t layer);
    Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
    Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);
    std::size_t offset(std::size_t layer) const { return offsets_[layer]; }

    const std::vector<double>& input_shift() const { return shift_; }
    const std::vector<double>& input_scale() const { return scale_; }
    void set_input_standardization(std::vector<double> shift, std::vector<double> scale);

    /// Kaiming-uniform weights for hidden layers, Xavier-uniform for a
    /// sigmoid/tanh output layer, zero biases.
    void initialize(std::uint64_t seed);

    /// FNV-1a over the parameter bit patterns.
    std::uint64_t checksum() const;

    bool operator==(const MlpModel&) const = default;

private:
    std::size_t input_dim_ = 0;
    std::vector<LayerShape> layers_;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
    std::vector<double> shift_;
    std::vector<double> scale_;
};

MlpModel make_mlp(std::size_t input_dim, const MlpArchitecture& arch, std::uint64_t seed);

/// Per-feature mean and standard deviation (unit scale for constant features).
std::pair<std::vector<double>, std::vector<double>> standardization_from(const Dataset& data);

struct ForwardResult {
    double s = 0.5;  ///< output after the final activation
    double z = 0.0;  ///< final pre-activation (logit)
};

/// Throws DataError on an input of the wrong dimension.
ForwardResult forward(const MlpModel& model, std::span<const double> x);

/// Activations of one mini-batch, kept for the backward pass. Columns are samples.
struct BatchCache {
    std::vector<Eigen::MatrixXd> inputs;       ///< input to each layer
    std::vector<Eigen::MatrixXd> preactivations;
    Eigen::RowVectorXd output;                 ///< s per sample
    Eigen::RowVectorXd logit;                  ///< z per sample
};

/// Standardised feature matrix (input_dim x |indices|).
Eigen::MatrixXd gather_inputs(const MlpModel& model, const Dataset& data,
                              std::span<const std::size_t> indices);

BatchCache forward_batch(const MlpModel& model, Eigen::MatrixXd inputs);

/// Reverse-mode pass: given dR/dz for every sample in the cache, accumulate
/// dR/dparameters into `grad` (same layout as the parameter buffer).
void backward_from_logit(const MlpModel& model, const BatchCache& cache,
                         const Eigen::RowVectorXd& dlogit, std::span<double> grad);

/// Derivative of the output activation, ds/dz, evaluated from z.
double output_activation_derivative(Activation a, double z);

struct RiskGradient {
    double risk = 0.0;
    double abs_weight = 0.0;
    std::size_t clamp_count = 0;
    std::vector<double> grad;
};

/// R = sum_i w_i L(s(x_i), y_i) / sum_i |w_i| over the selected samples.
/// Throws DataError when the total absolute weight is zero.
double weighted_risk(const MlpModel& model, const Dataset& batch, const LossSpec& loss,
                     std::size_t* clamp_count = nullptr);

/// Risk and its exact gradient on a subset of `data`. `with_gradient=false`
/// skips the backward pass and leaves `grad` empty. A zero-weight subset
/// returns zero risk and zero gradient.
RiskGradient risk_and_gradient(const MlpModel& model, const Dataset& data,
                               std::span<const std::size_t> indices, const LossSpec& loss,
                               bool with_gradient = true);

/// Gradient of weighted_risk over the whole batch.
std::vector<double> backward(const MlpModel& model, const Dataset& batch, const LossSpec& loss);

/// Ratio implied by the classifier output at x. For sigmoid outputs with the
/// (0, 1) transform this is evaluated from the logit as -2 sinh(z) (REVERT)
/// or e^z (BCE), which stays accurate where s saturates.
double predict_ratio(const MlpModel& model, std::span<const double> x, const LossSpec& loss);

/// Same, given a precomputed forward result.
double ratio_from_output(const MlpModel& model, const ForwardResult& out, const LossSpec& loss);

/// A network together with the loss it was trained with, which fixes how its
/// output maps to a density ratio.
struct RatioClassifier {
    MlpModel model;
    LossSpec loss;

    double ratio(std::span<const double> x) const { return predict_ratio(model, x, loss); }
};

}  // namespace qdre::nn
