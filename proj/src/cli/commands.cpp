#include "qdre/cli/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "qdre/cli/run_config.hpp"
#include "qdre/data.hpp"
#include "qdre/dataset_io.hpp"
#include "qdre/errors.hpp"
#include "qdre/metrics/closure.hpp"
#include "qdre/nn/serialize.hpp"
#include "qdre/random.hpp"
#include "qdre/rosmm.hpp"

namespace qdre::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Fills `value` from the config file unless the flag was given.
template <class T>
void from_config(const CLI::Option* opt, const json& cfg, const char* key, T& value) {
    if (opt->count() > 0 || !cfg.contains(key)) return;
    try {
        value = cfg[key].get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    auto j = read_json_file(path);
    if (!j.is_object()) throw ConfigError(path + ": expected a JSON object");
    return j;
}

fs::path find_split(const fs::path& dir, const std::string& name) {
    for (const char* ext : {".csv", ".jsonl"}) {
        const auto p = dir / (name + ext);
        if (fs::exists(p)) return p;
    }
    throw ConfigError("no " + name + ".csv or " + name + ".jsonl in " + dir.string());
}

Dataset load_existing(const fs::path& path, std::ostream& err) {
    if (!fs::exists(path)) throw ConfigError("no such file: " + path.string());
    std::vector<std::string> warnings;
    auto data = load_dataset(path, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    return data;
}

json sw_to_json(const metrics::SwResult& sw) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.6g ± %.6g", sw.mean, sw.std);
    return {{"mean", sw.mean}, {"std", sw.std}, {"formatted", buf}};
}

json sw_config_to_json(const metrics::SwConfig& c) {
    return {{"n_projections", c.n_projections}, {"n_repeats", c.n_repeats}, {"seed", c.seed}};
}

// ---------------------------------------------------------------- models

struct LoadedModel {
    std::string name;
    std::size_t input_dim = 0;
    metrics::RatioFunction ratio;
    std::string checksum;
};

LoadedModel load_model(const fs::path& path, std::string name) {
    const auto j = read_json_file(path);
    LoadedModel m;
    m.name = std::move(name);
    m.checksum = file_checksum(path);
    const auto format = j.value("format", std::string{});
    if (format == "qdre.mlp") {
        auto c = std::make_shared<nn::RatioClassifier>(j.get<nn::RatioClassifier>());
        m.input_dim = c->model.input_dim();
        m.ratio = [c](std::span<const double> x) { return c->ratio(x); };
    } else if (format == "qdre.rosmm") {
        auto r = std::make_shared<rosmm::RosmmModel>(j.get<rosmm::RosmmModel>());
        m.input_dim = r->input_dim();
        m.ratio = [r](std::span<const double> x) { return rosmm::rosmm_ratio(*r, x); };
    } else {
        throw ConfigError(path.string() + ": unrecognised model format '" + format + "'");
    }
    return m;
}

// "name=path" or a bare path; a bare path is named after its file stem, or
// its directory when the stem is the generic "model".
std::pair<std::string, fs::path> model_argument(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq != std::string::npos) return {arg.substr(0, eq), arg.substr(eq + 1)};
    fs::path p(arg);
    std::string name = p.stem().string();
    if (name == "model" && p.has_parent_path()) name = fs::absolute(p).parent_path().filename().string();
    return {name, p};
}

// ---------------------------------------------------------------- generate

struct GenerateOptions {
    std::string config;
    std::string spec;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    CLI::App* app = nullptr;
};

int cmd_generate(const GenerateOptions& o_in, std::ostream& out, std::ostream& err) {
    GenerateOptions o = o_in;
    const json cfg = load_config(o.config);
    from_config(o.app->get_option("--n"), cfg, "n", o.n);
    from_config(o.app->get_option("--seed"), cfg, "seed", o.seed);
    from_config(o.app->get_option("--out"), cfg, "out", o.out);
    from_config(o.app->get_option("--format"), cfg, "format", o.format);

    SignedMixtureSpec spec;
    if (o.app->get_option("--spec")->count() > 0) {
        spec = read_json_file(o.spec).get<SignedMixtureSpec>();
    } else if (cfg.contains("spec")) {
        spec = cfg["spec"].is_string() ? read_json_file(cfg["spec"].get<std::string>()).get<SignedMixtureSpec>()
                                       : cfg["spec"].get<SignedMixtureSpec>();
    } else {
        throw ConfigError("generate: --spec is required");
    }
    spec.validate();
    if (o.n == 0) throw ConfigError("generate: n must be positive");
    if (o.out.empty()) throw ConfigError("generate: --out is required");
    if (o.format != "csv" && o.format != "jsonl") throw ConfigError("generate: format must be csv or jsonl");

    const SplitFractions fractions;
    const json run = {{"command", "generate"},
                      {"spec", spec},
                      {"n_per_class", o.n},
                      {"seed", o.seed},
                      {"format", o.format},
                      {"fractions", {{"train", fractions.train}, {"validation", fractions.validation},
                                     {"test", fractions.test}}}};
    const auto hash = config_hash(run);

    const auto data = sample_mixture(spec, o.n, derive_seed(o.seed, "generate/sample"));
    const auto parts = split(data, fractions, derive_seed(o.seed, "generate/split"));
    const fs::path dir(o.out);
    fs::create_directories(dir);
    const auto fmt = o.format == "csv" ? DatasetFormat::Csv : DatasetFormat::Jsonl;
    json files = json::object();
    const std::pair<const char*, const Dataset*> outputs[] = {
        {"train", &parts.train}, {"val", &parts.validation}, {"test", &parts.test}};
    for (const auto& [name, ds] : outputs) {
        const auto path = dir / (std::string(name) + "." + o.format);
        save_dataset(*ds, path, fmt);
        files[name] = {{"path", path.filename().string()},
                       {"rows", ds->size()},
                       {"per_class", {ds->count(0), ds->count(1)}},
                       {"checksum", file_checksum(path)},
                       {"config_hash", hash}};
    }
    json manifest = run;
    manifest["config_hash"] = hash;
    manifest["files"] = files;
    write_json_file(dir / "manifest.json", manifest);
    out << "generate: " << parts.train.size() << '/' << parts.validation.size() << '/' << parts.test.size()
        << " rows (train/val/test) in " << dir.string() << '\n';
    (void)err;
    return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
    std::string config;
    std::string data;
    std::string model = "mlp";
    std::string out;
    std::uint64_t seed = 0;
    double lr = 0.0;
    std::size_t batch_size = 0;
    std::size_t patience = 0;
    std::size_t max_epochs = 0;
    std::size_t epoch_cap = 0;
    std::vector<std::size_t> hidden;
    bool no_balance = false;
    CLI::App* app = nullptr;
};

void apply_train_flags(const TrainOptions& o, TrainRun& run) {
    auto given = [&](const char* name) { return o.app->get_option(name)->count() > 0; };
    if (given("--lr")) run.train.learning_rate = o.lr;
    if (given("--batch-size")) run.train.batch_size = o.batch_size;
    if (given("--patience")) run.train.patience = o.patience;
    if (given("--max-epochs")) run.train.max_epochs = o.max_epochs;
    if (given("--epoch-cap")) {
        run.train.epoch_cap = o.epoch_cap;
        run.subratio.cfg_pp.epoch_cap = o.epoch_cap;
        run.subratio.cfg_pm.epoch_cap = o.epoch_cap;
    }
    if (given("--max-epochs")) {
        run.subratio.cfg_pp.max_epochs = o.max_epochs;
        run.subratio.cfg_pm.max_epochs = o.max_epochs;
    }
    if (given("--hidden")) {
        run.architecture.hidden = o.hidden;
        run.subratio.arch_pp.hidden = o.hidden;
        run.subratio.arch_pm.hidden = o.hidden;
    }
    run.train.validate();
}

void check_report(const nn::TrainReport& report, const std::string& what) {
    if (report.diverged) throw NumericalError(what + ": training diverged (" + report.stop_reason + ")");
}

json with_hash(json j, const std::string& hash) {
    j["config_hash"] = hash;
    return j;
}

nn::MlpModel fit_network(const Dataset& train, const Dataset& val, const nn::MlpArchitecture& arch,
                         const nn::TrainConfig& cfg, nn::TrainReport& report) {
    auto model = nn::make_mlp(train.dim(), arch, derive_seed(cfg.seed, "init"));
    auto [shift, scale] = nn::standardization_from(train);
    model.set_input_standardization(std::move(shift), std::move(scale));
    report = nn::train(model, train, val, cfg);
    return model;
}

int cmd_train(const TrainOptions& o_in, std::ostream& out, std::ostream& err) {
    TrainOptions o = o_in;
    const json cfg = load_config(o.config);
    from_config(o.app->get_option("--data"), cfg, "data", o.data);
    from_config(o.app->get_option("--model"), cfg, "model", o.model);
    from_config(o.app->get_option("--out"), cfg, "out", o.out);
    from_config(o.app->get_option("--seed"), cfg, "seed", o.seed);
    if (o.data.empty()) throw ConfigError("train: --data is required");
    if (o.out.empty()) throw ConfigError("train: --out is required");

    TrainRun run = default_train_run(model_kind_from_string(o.model), o.seed);
    apply_train_config(run, cfg);
    apply_train_flags(o, run);
    const json run_json = run.to_json();
    const auto hash = config_hash(run_json);

    Dataset train = load_existing(find_split(o.data, "train"), err);
    Dataset val = load_existing(find_split(o.data, "val"), err);
    if (train.dim() != val.dim()) throw DataError("train and val datasets differ in dimension");
    const Dataset raw_train = train;
    if (!o.no_balance) {
        train.balance_classes();
        val.balance_classes();
    }

    const fs::path dir(o.out);
    fs::create_directories(dir);
    json report_doc = {{"model", to_string(run.kind)}, {"config", run_json}, {"config_hash", hash}};

    if (run.kind == ModelKind::Mlp || run.kind == ModelKind::BceMlp) {
        nn::TrainReport report;
        auto model = fit_network(train, val, run.architecture, run.train, report);
        report_doc["report"] = report;
        write_json_file(dir / "report.json", report_doc);
        check_report(report, to_string(run.kind));
        write_json_file(dir / "model.json", with_hash(nn::RatioClassifier{model, run.train.loss}, hash));
        out << to_string(run.kind) << ": " << report.epochs_run << " epochs, best epoch " << report.best_epoch
            << ", validation risk " << report.best_val_loss << ", checksum " << hex64(report.final_params_checksum)
            << '\n';
        return kExitOk;
    }

    rosmm::RosmmModel model;
    const auto pp_path = dir / "r_pp.json";
    const auto pm_path = dir / "r_pm.json";
    if (fs::exists(pp_path) && fs::exists(pm_path)) {
        model.r_pp = read_json_file(pp_path).get<nn::MlpModel>();
        model.r_pm = read_json_file(pm_path).get<nn::MlpModel>();
        out << "using sub-ratio networks from " << dir.string() << '\n';
    } else {
        const auto sub = rosmm::train_subratios(train, val, run.subratio);
        json sub_reports = {{"r_pp", sub.report_pp}, {"r_pm", sub.report_pm}};
        report_doc["subratio_reports"] = sub_reports;
        check_report(sub.report_pp, "r_pp");
        check_report(sub.report_pm, "r_pm");
        write_json_file(pp_path, with_hash(nn::RatioClassifier{sub.r_pp, run.subratio.cfg_pp.loss}, hash));
        write_json_file(pm_path, with_hash(nn::RatioClassifier{sub.r_pm, run.subratio.cfg_pm.loss}, hash));
        model.r_pp = sub.r_pp;
        model.r_pm = sub.r_pm;
        out << "trained sub-ratio networks (" << sub.report_pp.epochs_run << " and " << sub.report_pm.epochs_run
            << " epochs)\n";
    }
    if (model.input_dim() != train.dim()) throw DataError("sub-ratio networks do not match the data dimension");

    const double c0 = rosmm::mass_coefficient(raw_train);
    if (!(c0 > 1.0)) throw DataError("rosmm: the target has no negatively weighted samples");
    model.theta_c = rosmm::theta_from_coefficient(c0);
    const auto variant = run.kind == ModelKind::RosmmC ? rosmm::Variant::CoefficientOnly : rosmm::Variant::Joint;
    const auto report = rosmm::fit_rosmm(model, train, val, run.train, variant);
    report_doc["initial_c"] = c0;
    report_doc["c"] = model.c();
    report_doc["report"] = report;
    write_json_file(dir / "report.json", report_doc);
    check_report(report, to_string(run.kind));
    write_json_file(dir / "model.json", with_hash(model, hash));
    out << to_string(run.kind) << ": c = " << model.c() << " (from " << c0 << "), " << report.epochs_run
        << " epochs, validation risk " << report.best_val_loss << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- evaluate / compare

struct ScoreOptions {
    std::size_t projections = 50;
    std::size_t repeats = 1000;
    std::size_t bins = 50;
    std::vector<std::size_t> features;
};

void score_from_config(CLI::App* app, const json& cfg, ScoreOptions& s) {
    from_config(app->get_option("--projections"), cfg, "projections", s.projections);
    from_config(app->get_option("--repeats"), cfg, "repeats", s.repeats);
    from_config(app->get_option("--bins"), cfg, "bins", s.bins);
    from_config(app->get_option("--features"), cfg, "features", s.features);
}

std::vector<std::size_t> resolve_features(const ScoreOptions& s, std::size_t dim) {
    if (!s.features.empty()) return s.features;
    std::vector<std::size_t> all(dim);
    for (std::size_t i = 0; i < dim; ++i) all[i] = i;
    return all;
}

json closure_row(const std::string& name, const metrics::ClosureReport& rep) {
    json feats = json::array();
    for (const auto& f : rep.features) {
        feats.push_back({{"feature", f.feature},
                         {"chi2", f.chi2},
                         {"tsallis_d2", f.tsallis},
                         {"tsallis_excluded_bins", f.tsallis_excluded}});
    }
    json row = {{"model", name}, {"features", feats}};
    if (rep.sw) row["sw"] = sw_to_json(*rep.sw);
    return row;
}

void append_table(json& table, const std::string& name, const metrics::ClosureReport& rep) {
    if (rep.sw) {
        table.push_back({{"model", name}, {"feature", "all"}, {"metric", "sw_mean"}, {"value", rep.sw->mean}});
        table.push_back({{"model", name}, {"feature", "all"}, {"metric", "sw_std"}, {"value", rep.sw->std}});
    }
    for (const auto& f : rep.features) {
        table.push_back({{"model", name}, {"feature", f.feature}, {"metric", "chi2"}, {"value", f.chi2}});
        table.push_back({{"model", name}, {"feature", f.feature}, {"metric", "tsallis_d2"}, {"value", f.tsallis}});
    }
}

void write_histograms(const fs::path& path, const metrics::ClosureReport& rep, const std::string& hash) {
    std::ofstream csv(path);
    if (!csv) throw DataError("cannot write " + path.string());
    csv << "feature,bin,lo,hi,series,sum_w,sum_w2,config_hash\n";
    for (const auto& f : rep.features) {
        const std::pair<const char*, const metrics::Histogram*> series[] = {
            {"target", &f.target}, {"reference", &f.reference}, {"reweighted", &f.reweighted}};
        for (const auto& [label, h] : series) {
            for (std::size_t b = 0; b < h->bins(); ++b) {
                csv << f.feature << ',' << b << ',' << format_double(h->edges[b]) << ','
                    << format_double(h->edges[b + 1]) << ',' << label << ',' << format_double(h->sum_w[b]) << ','
                    << format_double(h->sum_w2[b]) << ',' << hash << '\n';
            }
        }
    }
}

std::string safe_name(std::string s) {
    for (char& c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
    }
    return s;
}

struct EvaluateOptions {
    std::string config;
    std::string data;
    std::string split = "test";
    std::vector<std::string> models;
    bool oracle = false;
    std::string out;
    std::uint64_t seed = 0;
    ScoreOptions score;
    CLI::App* app = nullptr;
};

int cmd_evaluate(const EvaluateOptions& o_in, std::ostream& out, std::ostream& err) {
    EvaluateOptions o = o_in;
    const json cfg = load_config(o.config);
    from_config(o.app->get_option("--data"), cfg, "data", o.data);
    from_config(o.app->get_option("--split"), cfg, "split", o.split);
    from_config(o.app->get_option("--model"), cfg, "models", o.models);
    from_config(o.app->get_option("--oracle"), cfg, "oracle", o.oracle);
    from_config(o.app->get_option("--out"), cfg, "out", o.out);
    from_config(o.app->get_option("--seed"), cfg, "seed", o.seed);
    score_from_config(o.app, cfg, o.score);
    if (o.data.empty()) throw ConfigError("evaluate: --data is required");
    if (o.out.empty()) throw ConfigError("evaluate: --out is required");

    const auto data_path = find_split(o.data, o.split);
    const Dataset data = load_existing(data_path, err);
    const Dataset reference = data.select(0);
    const Dataset target = data.select(1);
    const auto features = resolve_features(o.score, data.dim());

    std::vector<LoadedModel> rows;
    rows.push_back({"Reference", data.dim(), [](std::span<const double>) { return 1.0; }, ""});
    if (o.oracle) {
        const auto manifest_path = fs::path(o.data) / "manifest.json";
        const auto manifest = read_json_file(manifest_path);
        if (!manifest.contains("spec")) throw ConfigError(manifest_path.string() + ": no spec to build the oracle from");
        auto spec = std::make_shared<SignedMixtureSpec>(manifest["spec"].get<SignedMixtureSpec>());
        rows.push_back({"Oracle", spec->dim(), [spec](std::span<const double> x) { return analytic_ratio(*spec, x); },
                        config_hash(manifest["spec"])});
    }
    for (const auto& arg : o.models) {
        auto [name, path] = model_argument(arg);
        if (!fs::exists(path)) throw ConfigError("no such model file: " + path.string());
        rows.push_back(load_model(path, name));
    }
    for (const auto& r : rows) {
        if (r.input_dim != data.dim()) {
            throw DataError("model '" + r.name + "' expects dimension " + std::to_string(r.input_dim) +
                            ", data has " + std::to_string(data.dim()));
        }
    }

    metrics::SwConfig sw;
    sw.n_projections = o.score.projections;
    sw.n_repeats = o.score.repeats;
    sw.seed = derive_seed(o.seed, "evaluate/sw");
    json model_list = json::array();
    for (const auto& r : rows) model_list.push_back({{"name", r.name}, {"checksum", r.checksum}});
    const json run = {{"command", "evaluate"},
                      {"data", {{"path", data_path.filename().string()}, {"checksum", file_checksum(data_path)}}},
                      {"models", model_list},
                      {"sw", sw_config_to_json(sw)},
                      {"bins", o.score.bins},
                      {"features", features},
                      {"seed", o.seed}};
    const auto hash = config_hash(run);

    const fs::path dir(o.out);
    fs::create_directories(dir);
    json scores = {{"config", run}, {"config_hash", hash}, {"rows", json::array()}, {"table", json::array()}};
    for (const auto& r : rows) {
        metrics::ClosureOptions options;
        options.bins = o.score.bins;
        options.sw = sw;
        const auto rep = metrics::reweight_closure(reference, r.ratio, target, features, options);
        scores["rows"].push_back(closure_row(r.name, rep));
        append_table(scores["table"], r.name, rep);
        write_histograms(dir / ("histograms_" + safe_name(r.name) + ".csv"), rep, hash);
        out << r.name << ": SW1 " << scores["rows"].back()["sw"]["formatted"].get<std::string>() << '\n';
    }
    write_json_file(dir / "scores.json", scores);
    return kExitOk;
}

struct CompareOptions {
    std::string config;
    std::string target;
    std::string candidate;
    int target_label = -1;
    int candidate_label = -1;
    std::string out;
    std::uint64_t seed = 0;
    ScoreOptions score;
    CLI::App* app = nullptr;
};

Dataset select_label(const Dataset& d, int label) { return label < 0 ? d : d.select(label); }

int cmd_compare(const CompareOptions& o_in, std::ostream& out, std::ostream& err) {
    CompareOptions o = o_in;
    const json cfg = load_config(o.config);
    from_config(o.app->get_option("--target"), cfg, "target", o.target);
    from_config(o.app->get_option("--candidate"), cfg, "candidate", o.candidate);
    from_config(o.app->get_option("--target-label"), cfg, "target_label", o.target_label);
    from_config(o.app->get_option("--candidate-label"), cfg, "candidate_label", o.candidate_label);
    from_config(o.app->get_option("--out"), cfg, "out", o.out);
    from_config(o.app->get_option("--seed"), cfg, "seed", o.seed);
    score_from_config(o.app, cfg, o.score);
    if (o.target.empty() || o.candidate.empty()) throw ConfigError("compare: --target and --candidate are required");
    if (o.out.empty()) throw ConfigError("compare: --out is required");

    const Dataset target = select_label(load_existing(o.target, err), o.target_label);
    const Dataset candidate = select_label(load_existing(o.candidate, err), o.candidate_label);
    if (target.dim() != candidate.dim()) throw DataError("compare: datasets differ in dimension");
    const auto features = resolve_features(o.score, target.dim());

    metrics::ClosureOptions options;
    options.bins = o.score.bins;
    options.sw = metrics::SwConfig{o.score.projections, o.score.repeats, derive_seed(o.seed, "compare/sw"), true};
    const json run = {{"command", "compare"},
                      {"target", {{"path", o.target}, {"checksum", file_checksum(o.target)}, {"label", o.target_label}}},
                      {"candidate",
                       {{"path", o.candidate}, {"checksum", file_checksum(o.candidate)}, {"label", o.candidate_label}}},
                      {"sw", sw_config_to_json(*options.sw)},
                      {"bins", o.score.bins},
                      {"features", features},
                      {"seed", o.seed}};
    const auto hash = config_hash(run);
    const auto rep = metrics::reweight_closure(candidate, [](std::span<const double>) { return 1.0; }, target, features,
                                               options);
    json scores = {{"config", run}, {"config_hash", hash}, {"rows", json::array({closure_row("candidate", rep)})}};
    scores["table"] = json::array();
    append_table(scores["table"], "candidate", rep);
    const fs::path out_path(o.out);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    write_json_file(out_path, scores);
    out << "compare: SW1 " << scores["rows"][0]["sw"]["formatted"].get<std::string>() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- reweight

struct ReweightOptions {
    std::string config;
    std::string data;
    std::string model;
    std::string out;
    int label = 0;
    CLI::App* app = nullptr;
};

int cmd_reweight(const ReweightOptions& o_in, std::ostream& out, std::ostream& err) {
    ReweightOptions o = o_in;
    const json cfg = load_config(o.config);
    from_config(o.app->get_option("--data"), cfg, "data", o.data);
    from_config(o.app->get_option("--model"), cfg, "model", o.model);
    from_config(o.app->get_option("--out"), cfg, "out", o.out);
    from_config(o.app->get_option("--label"), cfg, "label", o.label);
    if (o.data.empty() || o.model.empty() || o.out.empty()) {
        throw ConfigError("reweight: --data, --model and --out are required");
    }
    if (!fs::exists(o.model)) throw ConfigError("no such model file: " + o.model);

    const Dataset input = select_label(load_existing(o.data, err), o.label);
    const auto model = load_model(o.model, model_argument(o.model).first);
    if (model.input_dim != input.dim()) throw DataError("reweight: model and data dimensions differ");
    Dataset result(input.dim());
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < input.size(); ++i) {
        auto s = input[i];
        const double r = model.ratio(s.features);
        if (!std::isfinite(r)) throw NumericalError("reweight: non-finite ratio at sample " + std::to_string(i));
        s.weight *= r;
        if (!result.add(std::move(s))) ++dropped;
    }
    const fs::path out_path(o.out);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    save_dataset(result, out_path);
    const json run = {{"command", "reweight"},
                      {"data", {{"path", o.data}, {"checksum", file_checksum(o.data)}, {"label", o.label}}},
                      {"model", {{"path", o.model}, {"checksum", model.checksum}}}};
    json manifest = run;
    manifest["config_hash"] = config_hash(run);
    manifest["output"] = {{"path", out_path.filename().string()}, {"rows", result.size()},
                          {"checksum", file_checksum(out_path)}, {"dropped_zero_weight", dropped}};
    write_json_file(out_path.string() + ".manifest.json", manifest);
    out << "reweight: " << result.size() << " samples written to " << out_path.string() << '\n';
    return kExitOk;
}

void add_score_options(CLI::App* sub, ScoreOptions& s) {
    sub->add_option("--projections", s.projections, "Projections per repeat")->check(CLI::PositiveNumber);
    sub->add_option("--repeats", s.repeats, "Repeats of the sliced estimate")->check(CLI::PositiveNumber);
    sub->add_option("--bins", s.bins, "Histogram bins per feature")->check(CLI::PositiveNumber);
    sub->add_option("--features", s.features, "Feature indices to histogram (default: all)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Signed density ratio estimation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "qdre 0.1.0");

    GenerateOptions gen;
    auto* g = app.add_subcommand("generate", "Sample a signed-mixture benchmark and split it 65/15/20");
    gen.app = g;
    g->add_option("--config", gen.config, "JSON config file (flags win)");
    g->add_option("--spec", gen.spec, "Mixture specification JSON");
    g->add_option("--n", gen.n, "Samples per class");
    g->add_option("--seed", gen.seed, "Global seed");
    g->add_option("--out", gen.out, "Output directory");
    g->add_option("--format", gen.format, "csv or jsonl");

    TrainOptions tr;
    auto* t = app.add_subcommand("train", "Train a ratio model on <data>/train and <data>/val");
    tr.app = t;
    t->add_option("--config", tr.config, "JSON config file (flags win)");
    t->add_option("--data", tr.data, "Directory with train and val splits");
    t->add_option("--model", tr.model, "mlp, bce-mlp, rosmm-c or rosmm-r");
    t->add_option("--out", tr.out, "Output directory");
    t->add_option("--seed", tr.seed, "Global seed");
    t->add_option("--lr", tr.lr, "Learning rate");
    t->add_option("--batch-size", tr.batch_size, "Mini-batch size");
    t->add_option("--patience", tr.patience, "Early-stopping patience");
    t->add_option("--max-epochs", tr.max_epochs, "Epoch limit");
    t->add_option("--epoch-cap", tr.epoch_cap, "Samples per epoch at most");
    t->add_option("--hidden", tr.hidden, "Hidden layer widths");
    t->add_flag("--no-balance", tr.no_balance, "Do not rescale class 1 to the class-0 weight total");

    EvaluateOptions ev;
    auto* e = app.add_subcommand("evaluate", "Score models by reweighting closure on a held-out split");
    ev.app = e;
    e->add_option("--config", ev.config, "JSON config file (flags win)");
    e->add_option("--data", ev.data, "Data directory");
    e->add_option("--split", ev.split, "Split to evaluate on");
    e->add_option("--model", ev.models, "Model files, optionally name=path");
    e->add_flag("--oracle", ev.oracle, "Add the analytic ratio from the data manifest as a row");
    e->add_option("--out", ev.out, "Output directory");
    e->add_option("--seed", ev.seed, "Global seed");
    add_score_options(e, ev.score);

    ReweightOptions rw;
    auto* r = app.add_subcommand("reweight", "Multiply sample weights by a model's ratio");
    rw.app = r;
    r->add_option("--config", rw.config, "JSON config file (flags win)");
    r->add_option("--data", rw.data, "Input dataset");
    r->add_option("--model", rw.model, "Model file");
    r->add_option("--out", rw.out, "Output dataset");
    r->add_option("--label", rw.label, "Class to reweight (-1: all)");

    CompareOptions cmp;
    auto* c = app.add_subcommand("compare", "Compare a candidate sample with a target sample");
    cmp.app = c;
    c->add_option("--config", cmp.config, "JSON config file (flags win)");
    c->add_option("--target", cmp.target, "Target dataset");
    c->add_option("--candidate", cmp.candidate, "Candidate dataset");
    c->add_option("--target-label", cmp.target_label, "Class of the target file to use (-1: all)");
    c->add_option("--candidate-label", cmp.candidate_label, "Class of the candidate file to use (-1: all)");
    c->add_option("--out", cmp.out, "Output scores JSON");
    c->add_option("--seed", cmp.seed, "Global seed");
    add_score_options(c, cmp.score);

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.emplace_back("qdre");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (g->parsed()) return cmd_generate(gen, out, err);
        if (t->parsed()) return cmd_train(tr, out, err);
        if (e->parsed()) return cmd_evaluate(ev, out, err);
        if (r->parsed()) return cmd_reweight(rw, out, err);
        if (c->parsed()) return cmd_compare(cmp, out, err);
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const DataError& ex) {
        err << "data error: " << ex.what() << '\n';
        return kExitData;
    } catch (const NumericalError& ex) {
        err << "numerical error: " << ex.what() << '\n';
        return kExitNumerical;
    } catch (const nlohmann::json::exception& ex) {
        err << "config error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitFailure;
    }
    return kExitConfig;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace qdre::cli
