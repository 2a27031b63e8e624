#include "qdre/nn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qdre/errors.hpp"
#include "qdre/random.hpp"

namespace qdre::nn {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::Relu;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "tanh") return Activation::Tanh;
    throw std::invalid_argument("unknown activation '" + name + "'");
}

MlpModel::MlpModel(std::size_t input_dim, std::vector<LayerShape> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");
    std::size_t width = input_dim_;
    std::size_t total = 0;
    for (const auto& layer : layers_) {
        if (layer.in != width || layer.out == 0) {
            throw std::invalid_argument("layer widths do not chain");
        }
        offsets_.push_back(total);
        total += layer.out * layer.in + layer.out;
        width = layer.out;
    }
    if (width != 1) throw std::invalid_argument("final layer must have a single output");
    params_.assign(total, 0.0);
    shift_.assign(input_dim_, 0.0);
    scale_.assign(input_dim_, 1.0);
}

void MlpModel::set_parameters(std::span<const double> values) {
    if (values.size() != params_.size()) throw std::invalid_argument("parameter count mismatch");
    std::copy(values.begin(), values.end(), params_.begin());
}

Eigen::Map<const Eigen::MatrixXd> MlpModel::weights(std::size_t layer) const {
    const auto& l = layers_[layer];
    return {params_.data() + offsets_[layer], static_cast<Eigen::Index>(l.out), static_cast<Eigen::Index>(l.in)};
}

Eigen::Map<Eigen::MatrixXd> MlpModel::weights(std::size_t layer) {
    const auto& l = layers_[layer];
    return {params_.data() + offsets_[layer], static_cast<Eigen::Index>(l.out), static_cast<Eigen::Index>(l.in)};
}

Eigen::Map<const Eigen::VectorXd> MlpModel::bias(std::size_t layer) const {
    const auto& l = layers_[layer];
    return {params_.data() + offsets_[layer] + l.out * l.in, static_cast<Eigen::Index>(l.out)};
}

Eigen::Map<Eigen::VectorXd> MlpModel::bias(std::size_t layer) {
    const auto& l = layers_[layer];
    return {params_.data() + offsets_[layer] + l.out * l.in, static_cast<Eigen::Index>(l.out)};
}

void MlpModel::set_input_standardization(std::vector<double> shift, std::vector<double> scale) {
    if (shift.size() != input_dim_ || scale.size() != input_dim_) {
        throw std::invalid_argument("standardization vectors must match the input dimension");
    }
    for (double s : scale) {
        if (!(std::isfinite(s) && s > 0.0)) throw std::invalid_argument("standardization scale must be positive");
    }
    shift_ = std::move(shift);
    scale_ = std::move(scale);
}

void MlpModel::initialize(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        const double fan_in = static_cast<double>(layer.in);
        const double fan_out = static_cast<double>(layer.out);
        const bool squashing = layer.activation == Activation::Sigmoid || layer.activation == Activation::Tanh;
        const double bound = squashing ? std::sqrt(6.0 / (fan_in + fan_out)) : std::sqrt(6.0 / fan_in);
        auto w = weights(l);
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-bound, bound);
        }
        bias(l).setZero();
    }
}

std::uint64_t MlpModel::checksum() const {
    return fnv1a64(std::as_bytes(std::span(params_)));
}

MlpModel make_mlp(std::size_t input_dim, const MlpArchitecture& arch, std::uint64_t seed) {
    std::vector<LayerShape> layers;
    std::size_t width = input_dim;
    for (std::size_t h : arch.hidden) {
        layers.push_back({width, h, arch.hidden_activation});
        width = h;
    }
    layers.push_back({width, 1, arch.output_activation});
    MlpModel model(input_dim, std::move(layers));
    model.initialize(seed);
    return model;
}

std::pair<std::vector<double>, std::vector<double>> standardization_from(const Dataset& data) {
    const std::size_t d = data.dim();
    std::vector<double> mean(d, 0.0);
    std::vector<double> scale(d, 1.0);
    if (data.empty()) return {mean, scale};
    const double n = static_cast<double>(data.size());
    for (const auto& s : data) {
        for (std::size_t j = 0; j < d; ++j) mean[j] += s.features[j];
    }
    for (double& m : mean) m /= n;
    std::vector<double> var(d, 0.0);
    for (const auto& s : data) {
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = s.features[j] - mean[j];
            var[j] += diff * diff;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        const double sd = std::sqrt(var[j] / n);
        scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return {mean, scale};
}

namespace {

void apply_activation(Activation a, Eigen::MatrixXd& m) {
    switch (a) {
        case Activation::Identity: break;
        case Activation::Relu: m = m.cwiseMax(0.0); break;
        case Activation::Sigmoid: m = m.unaryExpr([](double z) { return sigmoid(z); }); break;
        case Activation::Tanh: m = m.array().tanh().matrix(); break;
    }
}

double activation_derivative(Activation a, double z) {
    switch (a) {
        case Activation::Identity: return 1.0;
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: return sigmoid(z) * sigmoid(-z);
        case Activation::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
    }
    return 1.0;
}

double activate(Activation a, double z) {
    switch (a) {
        case Activation::Identity: return z;
        case Activation::Relu: return std::max(z, 0.0);
        case Activation::Sigmoid: return sigmoid(z);
        case Activation::Tanh: return std::tanh(z);
    }
    return z;
}

}  // namespace

double output_activation_derivative(Activation a, double z) { return activation_derivative(a, z); }

ForwardResult forward(const MlpModel& model, std::span<const double> x) {
    if (x.size() != model.input_dim()) {
        throw DataError("input has " + std::to_string(x.size()) + " features, model expects " +
                        std::to_string(model.input_dim()));
    }
    Eigen::VectorXd a(static_cast<Eigen::Index>(x.size()));
    for (std::size_t j = 0; j < x.size(); ++j) {
        a[static_cast<Eigen::Index>(j)] = (x[j] - model.input_shift()[j]) / model.input_scale()[j];
    }
    ForwardResult out;
    const auto layers = model.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::VectorXd z = model.weights(l) * a + model.bias(l);
        if (l + 1 == layers.size()) {
            out.z = z[0];
            out.s = activate(layers[l].activation, z[0]);
            break;
        }
        Eigen::MatrixXd zm = z;
        apply_activation(layers[l].activation, zm);
        a = zm;
    }
    return out;
}

Eigen::MatrixXd gather_inputs(const MlpModel& model, const Dataset& data, std::span<const std::size_t> indices) {
    if (data.dim() != model.input_dim()) {
        throw DataError("dataset has " + std::to_string(data.dim()) + " features, model expects " +
                        std::to_string(model.input_dim()));
    }
    const auto d = static_cast<Eigen::Index>(model.input_dim());
    Eigen::MatrixXd x(d, static_cast<Eigen::Index>(indices.size()));
    for (std::size_t c = 0; c < indices.size(); ++c) {
        const auto& f = data[indices[c]].features;
        for (Eigen::Index j = 0; j < d; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            x(j, static_cast<Eigen::Index>(c)) = (f[uj] - model.input_shift()[uj]) / model.input_scale()[uj];
        }
    }
    return x;
}

BatchCache forward_batch(const MlpModel& model, Eigen::MatrixXd inputs) {
    BatchCache cache;
    const auto layers = model.layers();
    cache.inputs.reserve(layers.size());
    cache.preactivations.reserve(layers.size());
    Eigen::MatrixXd a = std::move(inputs);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::MatrixXd z = model.weights(l) * a;
        z.colwise() += model.bias(l);
        cache.inputs.push_back(std::move(a));
        a = z;
        apply_activation(layers[l].activation, a);
        cache.preactivations.push_back(std::move(z));
    }
    cache.output = a.row(0);
    cache.logit = cache.preactivations.back().row(0);
    return cache;
}

void backward_from_logit(const MlpModel& model, const BatchCache& cache, const Eigen::RowVectorXd& dlogit,
                         std::span<double> grad) {
    if (grad.size() != model.parameter_count()) throw std::invalid_argument("gradient buffer size mismatch");
    const auto layers = model.layers();
    Eigen::MatrixXd delta = dlogit;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const auto& shape = layers[l];
        Eigen::Map<Eigen::MatrixXd> dw(grad.data() + model.offset(l), static_cast<Eigen::Index>(shape.out),
                                       static_cast<Eigen::Index>(shape.in));
        Eigen::Map<Eigen::VectorXd> db(grad.data() + model.offset(l) + shape.out * shape.in,
                                       static_cast<Eigen::Index>(shape.out));
        dw.noalias() += delta * cache.inputs[l].transpose();
        db += delta.rowwise().sum();
        if (l == 0) break;
        Eigen::MatrixXd upstream = model.weights(l).transpose() * delta;
        const auto& z = cache.preactivations[l - 1];
        const Activation act = layers[l - 1].activation;
        if (act == Activation::Relu) {
            delta = (z.array() > 0.0).select(upstream, 0.0);
        } else {
            delta = upstream.cwiseProduct(z.unaryExpr([act](double v) { return activation_derivative(act, v); }));
        }
    }
}

RiskGradient risk_and_gradient(const MlpModel& model, const Dataset& data, std::span<const std::size_t> indices,
                               const LossSpec& loss, bool with_gradient) {
    RiskGradient result;
    if (with_gradient) result.grad.assign(model.parameter_count(), 0.0);
    if (indices.empty()) return result;

    for (std::size_t i : indices) result.abs_weight += std::abs(data[i].weight);
    if (result.abs_weight == 0.0) return result;

    const BatchCache cache = forward_batch(model, gather_inputs(model, data, indices));
    const Activation out_act = model.output_activation();
    Eigen::RowVectorXd dlogit(static_cast<Eigen::Index>(indices.size()));
    double total = 0.0;
    for (std::size_t c = 0; c < indices.size(); ++c) {
        const auto& sample = data[indices[c]];
        const auto ci = static_cast<Eigen::Index>(c);
        const double s = cache.output[ci];
        total += sample.weight * loss.value(s, sample.label, &result.clamp_count);
        if (with_gradient) {
            // When s is clamped the loss derivative is taken at the clamp point
            // and still chained through ds/dz, so saturated outputs keep a
            // restoring gradient.
            dlogit[ci] = sample.weight * loss.gradient(s, sample.label) *
                         activation_derivative(out_act, cache.logit[ci]) / result.abs_weight;
        }
    }
    result.risk = total / result.abs_weight;
    if (with_gradient) backward_from_logit(model, cache, dlogit, result.grad);
    return result;
}

namespace {

std::vector<std::size_t> all_indices(const Dataset& data) {
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return idx;
}

}  // namespace

double weighted_risk(const MlpModel& model, const Dataset& batch, const LossSpec& loss, std::size_t* clamp_count) {
    const auto idx = all_indices(batch);
    double abs_weight = 0.0;
    for (const auto& s : batch) abs_weight += std::abs(s.weight);
    if (abs_weight == 0.0) throw DataError("weighted risk needs a nonzero total absolute weight");
    // Chunked to bound the size of the activation matrices.
    constexpr std::size_t kChunk = 8192;
    double total = 0.0;
    for (std::size_t start = 0; start < idx.size(); start += kChunk) {
        const auto n = std::min(kChunk, idx.size() - start);
        const auto part = risk_and_gradient(model, batch, std::span(idx).subspan(start, n), loss, false);
        total += part.risk * part.abs_weight;
        if (clamp_count) *clamp_count += part.clamp_count;
    }
    return total / abs_weight;
}

std::vector<double> backward(const MlpModel& model, const Dataset& batch, const LossSpec& loss) {
    const auto idx = all_indices(batch);
    return risk_and_gradient(model, batch, idx, loss, true).grad;
}

double ratio_from_output(const MlpModel& model, const ForwardResult& out, const LossSpec& loss) {
    const Activation act = model.output_activation();
    if (act == Activation::Sigmoid) {
        if (loss.kind == LossKind::Bce) return std::exp(out.z);
        if (loss.transform == RatioTrickTransform::unit()) return logit_to_ratio(out.z);
    }
    if (act == Activation::Tanh && loss.kind == LossKind::Revert &&
        loss.transform == RatioTrickTransform::symmetric()) {
        return -std::sinh(2.0 * out.z);
    }
    return loss.implied_ratio(out.s);
}

double predict_ratio(const MlpModel& model, std::span<const double> x, const LossSpec& loss) {
    return ratio_from_output(model, forward(model, x), loss);
}

}  // namespace qdre::nn
