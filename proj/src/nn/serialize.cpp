#include "qdre/nn/serialize.hpp"

#include <cstdio>
#include <string>

#include "qdre/errors.hpp"

namespace qdre {

void to_json(nlohmann::json& j, const RatioTrickTransform& t) {
    j = {{"a", t.a}, {"b", t.b}, {"orientation", t.orientation}};
}

void from_json(const nlohmann::json& j, RatioTrickTransform& t) {
    try {
        t.a = j.value("a", 0.0);
        t.b = j.value("b", 1.0);
        t.orientation = j.value("orientation", 1);
        t.validate();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("transform: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("transform: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const LossSpec& loss) {
    j = {{"kind", to_string(loss.kind)}, {"transform", loss.transform}};
}

void from_json(const nlohmann::json& j, LossSpec& loss) {
    try {
        if (j.is_string()) {
            loss.kind = loss_kind_from_string(j.get<std::string>());
            loss.transform = RatioTrickTransform::unit();
            return;
        }
        loss.kind = loss_kind_from_string(j.at("kind").get<std::string>());
        loss.transform = j.contains("transform") ? j["transform"].get<RatioTrickTransform>()
                                                 : RatioTrickTransform::unit();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("loss: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("loss: ") + e.what());
    }
}

}  // namespace qdre

namespace qdre::nn {

namespace {

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

void to_json(nlohmann::json& j, const MlpModel& model) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < model.layers().size(); ++l) {
        const auto& shape = model.layers()[l];
        const auto w = model.weights(l);
        std::vector<double> row_major;
        row_major.reserve(shape.in * shape.out);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) row_major.push_back(w(r, c));
        }
        const auto b = model.bias(l);
        layers.push_back({{"in", shape.in},
                          {"out", shape.out},
                          {"activation", to_string(shape.activation)},
                          {"weights", row_major},
                          {"biases", std::vector<double>(b.data(), b.data() + b.size())}});
    }
    j = {{"format", "qdre.mlp"},
         {"version", kModelFormatVersion},
         {"input_dim", model.input_dim()},
         {"input_shift", model.input_shift()},
         {"input_scale", model.input_scale()},
         {"layers", layers},
         {"checksum", hex64(model.checksum())}};
}

void from_json(const nlohmann::json& j, MlpModel& model) {
    try {
        if (j.at("format").get<std::string>() != "qdre.mlp") throw ConfigError("model: not a qdre.mlp document");
        if (j.at("version").get<int>() != kModelFormatVersion) {
            throw ConfigError("model: unsupported version " + j["version"].dump());
        }
        const auto input_dim = j.at("input_dim").get<std::size_t>();
        std::vector<LayerShape> shapes;
        for (const auto& layer : j.at("layers")) {
            shapes.push_back({layer.at("in").get<std::size_t>(), layer.at("out").get<std::size_t>(),
                              activation_from_string(layer.at("activation").get<std::string>())});
        }
        MlpModel m(input_dim, shapes);
        const auto& layers = j.at("layers");
        for (std::size_t l = 0; l < shapes.size(); ++l) {
            const auto w = layers[l].at("weights").get<std::vector<double>>();
            const auto b = layers[l].at("biases").get<std::vector<double>>();
            if (w.size() != shapes[l].in * shapes[l].out || b.size() != shapes[l].out) {
                throw ConfigError("model: layer " + std::to_string(l) + " parameter count mismatch");
            }
            auto wm = m.weights(l);
            std::size_t k = 0;
            for (Eigen::Index r = 0; r < wm.rows(); ++r) {
                for (Eigen::Index c = 0; c < wm.cols(); ++c) wm(r, c) = w[k++];
            }
            for (std::size_t r = 0; r < b.size(); ++r) m.bias(l)[static_cast<Eigen::Index>(r)] = b[r];
        }
        m.set_input_standardization(j.at("input_shift").get<std::vector<double>>(),
                                    j.at("input_scale").get<std::vector<double>>());
        model = std::move(m);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const RatioClassifier& c) {
    j = c.model;
    j["loss"] = c.loss;
}

void from_json(const nlohmann::json& j, RatioClassifier& c) {
    c.model = j.get<MlpModel>();
    if (!j.contains("loss")) throw ConfigError("model: missing loss");
    c.loss = j["loss"].get<LossSpec>();
}

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
    j = {{"learning_rate", cfg.learning_rate}, {"batch_size", cfg.batch_size},
         {"patience", cfg.patience},           {"max_epochs", cfg.max_epochs},
         {"epoch_cap", cfg.epoch_cap},         {"seed", cfg.seed},
         {"loss", cfg.loss},                   {"optimizer", "Adam"},
         {"baseline_epoch", cfg.baseline_epoch}};
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
    if (!j.is_object()) throw ConfigError("train config: expected an object");
    try {
        if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
        if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<std::size_t>();
        if (j.contains("patience")) cfg.patience = j["patience"].get<std::size_t>();
        if (j.contains("max_epochs")) cfg.max_epochs = j["max_epochs"].get<std::size_t>();
        if (j.contains("epoch_cap")) cfg.epoch_cap = j["epoch_cap"].get<std::size_t>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("loss")) cfg.loss = j["loss"].get<LossSpec>();
        if (j.contains("baseline_epoch")) cfg.baseline_epoch = j["baseline_epoch"].get<bool>();
        if (j.contains("optimizer") && j["optimizer"].get<std::string>() != "Adam") {
            throw ConfigError("train config: only the Adam optimizer is supported");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("train config: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const TrainReport& report) {
    j = {{"epochs_run", report.epochs_run},
         {"best_epoch", report.best_epoch},
         {"best_val_loss", report.best_val_loss},
         {"train_loss_curve", report.train_loss_curve},
         {"val_loss_curve", report.val_loss_curve},
         {"clamp_count", report.clamp_count},
         {"final_params_checksum", hex64(report.final_params_checksum)},
         {"diverged", report.diverged},
         {"stop_reason", report.stop_reason},
         {"config", report.config}};
}

}  // namespace qdre::nn
