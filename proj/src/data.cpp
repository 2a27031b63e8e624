#include "qdre/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "qdre/errors.hpp"
#include "qdre/random.hpp"

namespace qdre {

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::size_t dim, std::vector<WeightedSample> samples) : dim_(dim) {
    samples_.reserve(samples.size());
    for (auto& s : samples) add(std::move(s));
}

bool Dataset::add(WeightedSample sample) {
    if (sample.features.size() != dim_) {
        throw DataError("sample has " + std::to_string(sample.features.size()) +
                        " features, dataset expects " + std::to_string(dim_));
    }
    if (sample.label != 0 && sample.label != 1) {
        throw DataError("class label must be 0 or 1, got " + std::to_string(sample.label));
    }
    if (!std::isfinite(sample.weight)) throw DataError("non-finite sample weight");
    for (double v : sample.features) {
        if (!std::isfinite(v)) throw DataError("non-finite feature value");
    }
    if (sample.weight == 0.0) return false;
    samples_.push_back(std::move(sample));
    return true;
}

std::size_t Dataset::count(int label) const {
    return static_cast<std::size_t>(std::count_if(
        samples_.begin(), samples_.end(), [label](const auto& s) { return s.label == label; }));
}

double Dataset::weight_sum(int label) const {
    double total = 0.0;
    for (const auto& s : samples_) {
        if (s.label == label) total += s.weight;
    }
    return total;
}

double Dataset::abs_weight_sum() const {
    double total = 0.0;
    for (const auto& s : samples_) total += std::abs(s.weight);
    return total;
}

Dataset Dataset::select(int label, int weight_sign) const {
    Dataset out(dim_);
    for (const auto& s : samples_) {
        if (s.label != label) continue;
        if (weight_sign > 0 && s.weight <= 0.0) continue;
        if (weight_sign < 0 && s.weight >= 0.0) continue;
        out.samples_.push_back(s);
    }
    return out;
}

void Dataset::balance_classes() {
    const double s0 = weight_sum(0);
    const double s1 = weight_sum(1);
    if (count(0) == 0 || count(1) == 0) throw DataError("cannot balance: a class is empty");
    if (!(s0 > 0.0) || !(s1 > 0.0)) {
        throw DataError("cannot balance: class weight sums must be positive (got " +
                        std::to_string(s0) + ", " + std::to_string(s1) + ")");
    }
    const double scale = s0 / s1;
    for (auto& s : samples_) {
        if (s.label == 1) s.weight *= scale;
    }
}

bool Dataset::is_balanced(double rel_tol) const {
    const double s0 = weight_sum(0);
    const double s1 = weight_sum(1);
    return std::abs(s0 - s1) <= rel_tol * std::max(std::abs(s0), std::abs(s1));
}

Dataset concat(const Dataset& a, const Dataset& b) {
    if (a.dim() != b.dim()) throw DataError("cannot concatenate datasets of different dimension");
    Dataset out(a.dim());
    for (const auto& s : a) out.add(s);
    for (const auto& s : b) out.add(s);
    return out;
}

// ---------------------------------------------------------------------------
// Mixtures

namespace {

double gaussian_density(const GaussianComponent& g, std::span<const double> x) {
    double log_density = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - g.mean[i];
        log_density -= 0.5 * (d * d / g.variance[i] + std::log(2.0 * std::numbers::pi * g.variance[i]));
    }
    return std::exp(log_density);
}

}  // namespace

double SignedMixture::density(std::span<const double> x) const {
    double total = 0.0;
    for (const auto& g : components) total += g.coefficient * gaussian_density(g, x);
    return total;
}

double SignedMixture::abs_coefficient_sum() const {
    double total = 0.0;
    for (const auto& g : components) total += std::abs(g.coefficient);
    return total;
}

std::size_t SignedMixtureSpec::dim() const {
    if (!reference.components.empty()) return reference.components.front().mean.size();
    if (!target.components.empty()) return target.components.front().mean.size();
    return 0;
}

void SignedMixtureSpec::validate() const {
    const std::size_t d = dim();
    if (d == 0) throw ConfigError("mixture spec: dimension must be at least 1");
    auto check = [d](const SignedMixture& m, const std::string& name, bool positive_only) {
        if (m.components.empty()) throw ConfigError(name + ": needs at least one component");
        double sum = 0.0;
        for (std::size_t k = 0; k < m.components.size(); ++k) {
            const auto& g = m.components[k];
            const std::string path = name + "[" + std::to_string(k) + "]";
            if (g.mean.size() != d) throw ConfigError(path + ".mean: expected dimension " + std::to_string(d));
            if (g.variance.size() != d) {
                throw ConfigError(path + ".variance: expected dimension " + std::to_string(d));
            }
            for (double v : g.mean) {
                if (!std::isfinite(v)) throw ConfigError(path + ".mean: non-finite entry");
            }
            for (double v : g.variance) {
                if (!(std::isfinite(v) && v > 0.0)) throw ConfigError(path + ".variance: entries must be > 0");
            }
            if (!std::isfinite(g.coefficient) || g.coefficient == 0.0) {
                throw ConfigError(path + ".coefficient: must be finite and nonzero");
            }
            if (positive_only && g.coefficient < 0.0) {
                throw ConfigError(path + ".coefficient: reference coefficients must be positive");
            }
            sum += g.coefficient;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ConfigError(name + ": coefficients sum to " + std::to_string(sum) + ", expected 1");
        }
    };
    check(reference, "reference", true);
    check(target, "target", false);
}

namespace {

nlohmann::json mixture_to_json(const SignedMixture& m) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& g : m.components) {
        arr.push_back({{"mean", g.mean}, {"variance", g.variance}, {"coefficient", g.coefficient}});
    }
    return arr;
}

std::vector<double> read_vector(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
        out.push_back(j[i].get<double>());
    }
    return out;
}

SignedMixture mixture_from_json(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of components");
    SignedMixture m;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const std::string cpath = path + "[" + std::to_string(k) + "]";
        const auto& c = j[k];
        if (!c.is_object()) throw ConfigError(cpath + ": expected an object");
        for (const char* key : {"mean", "variance", "coefficient"}) {
            if (!c.contains(key)) throw ConfigError(cpath + "." + key + ": missing");
        }
        GaussianComponent g;
        g.mean = read_vector(c["mean"], cpath + ".mean");
        g.variance = read_vector(c["variance"], cpath + ".variance");
        if (!c["coefficient"].is_number()) throw ConfigError(cpath + ".coefficient: expected a number");
        g.coefficient = c["coefficient"].get<double>();
        m.components.push_back(std::move(g));
    }
    return m;
}

}  // namespace

void to_json(nlohmann::json& j, const SignedMixtureSpec& spec) {
    j = {{"reference", mixture_to_json(spec.reference)}, {"target", mixture_to_json(spec.target)}};
}

void from_json(const nlohmann::json& j, SignedMixtureSpec& spec) {
    if (!j.is_object()) throw ConfigError("mixture spec: expected an object");
    for (const char* key : {"reference", "target"}) {
        if (!j.contains(key)) throw ConfigError(std::string(key) + ": missing");
    }
    spec.reference = mixture_from_json(j["reference"], "reference");
    spec.target = mixture_from_json(j["target"], "target");
}

Dataset sample_mixture(const SignedMixtureSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n == 0) throw ConfigError("sample count must be at least 1");
    const std::size_t d = spec.dim();
    Dataset out(d);
    for (int y : {0, 1}) {
        const auto& mixture = spec.for_class(y);
        const double total = mixture.abs_coefficient_sum();
        std::vector<double> cumulative;
        double acc = 0.0;
        for (const auto& g : mixture.components) {
            acc += std::abs(g.coefficient) / total;
            cumulative.push_back(acc);
        }
        cumulative.back() = 1.0;

        Rng rng(derive_seed(seed, y == 0 ? "sample/reference" : "sample/target"));
        for (std::size_t i = 0; i < n; ++i) {
            const double u = rng.uniform();
            const auto k = static_cast<std::size_t>(
                std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
            const auto& g = mixture.components[std::min(k, cumulative.size() - 1)];
            WeightedSample s;
            s.features.resize(d);
            for (std::size_t j = 0; j < d; ++j) {
                s.features[j] = g.mean[j] + std::sqrt(g.variance[j]) * rng.normal();
            }
            s.weight = std::copysign(total, g.coefficient);
            s.label = y;
            out.add(std::move(s));
        }
    }
    return out;
}

double analytic_density(const SignedMixtureSpec& spec, int y, std::span<const double> x) {
    return spec.for_class(y).density(x);
}

double analytic_ratio(const SignedMixtureSpec& spec, std::span<const double> x) {
    const double q0 = spec.reference.density(x);
    if (std::abs(q0) < 1e-300) throw NumericalError("reference density vanishes; ratio undefined");
    return spec.target.density(x) / q0;
}

double SubRatioOracle::r_pp(std::span<const double> x) const {
    return positive_part.density(x) / reference.density(x);
}

double SubRatioOracle::r_pm(std::span<const double> x) const {
    if (negative_part.components.empty()) return 0.0;
    return negative_part.density(x) / reference.density(x);
}

SubRatioOracle sub_ratio_oracle(const SignedMixtureSpec& spec) {
    spec.validate();
    SubRatioOracle oracle;
    oracle.reference = spec.reference;
    double pos = 0.0;
    double neg = 0.0;
    for (const auto& g : spec.target.components) {
        (g.coefficient > 0.0 ? pos : neg) += std::abs(g.coefficient);
    }
    for (auto g : spec.target.components) {
        if (g.coefficient > 0.0) {
            g.coefficient /= pos;
            oracle.positive_part.components.push_back(std::move(g));
        } else {
            g.coefficient = -g.coefficient / neg;
            oracle.negative_part.components.push_back(std::move(g));
        }
    }
    oracle.coefficient = pos;
    return oracle;
}

// ---------------------------------------------------------------------------
// Splitting

namespace {

// Largest-remainder apportionment of n items by fractions.
std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& fractions) {
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> remainders{};
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double quota = fractions[i] * static_cast<double>(n);
        const double whole = std::floor(quota + 1e-9);
        counts[i] = static_cast<std::size_t>(whole);
        remainders[i] = quota - whole;
        assigned += counts[i];
    }
    while (assigned < n) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < 3; ++i) {
            if (remainders[i] > remainders[best]) best = i;
        }
        ++counts[best];
        remainders[best] = -1.0;
        ++assigned;
    }
    return counts;
}

}  // namespace

DatasetSplit split(const Dataset& data, const SplitFractions& fractions, std::uint64_t seed) {
    const std::array<double, 3> f{fractions.train, fractions.validation, fractions.test};
    for (double v : f) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("split fractions must lie in [0, 1]");
    }
    if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");

    // Shuffle each class, then interleave the classes by relative position so
    // every prefix of the merged order is stratified to within one sample.
    struct Keyed {
        double key;
        int label;
        std::size_t index;
    };
    std::vector<Keyed> order;
    order.reserve(data.size());
    for (int y : {0, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (data[i].label == y) idx.push_back(i);
        }
        Rng rng(derive_seed(seed, y == 0 ? "split/reference" : "split/target"));
        rng.shuffle(std::span(idx));
        const double n = static_cast<double>(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            order.push_back({(static_cast<double>(j) + 0.5) / n, y, idx[j]});
        }
    }
    std::stable_sort(order.begin(), order.end(), [](const Keyed& a, const Keyed& b) {
        if (a.key != b.key) return a.key < b.key;
        return a.label < b.label;
    });

    const auto counts = apportion(data.size(), f);
    DatasetSplit out{Dataset(data.dim()), Dataset(data.dim()), Dataset(data.dim())};
    Dataset* parts[3] = {&out.train, &out.validation, &out.test};
    std::size_t pos = 0;
    for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t k = 0; k < counts[p]; ++k, ++pos) parts[p]->add(data[order[pos].index]);
    }

    static const char* names[3] = {"train", "validation", "test"};
    for (int y : {0, 1}) {
        if (data.count(y) == 0) continue;
        for (std::size_t p = 0; p < 3; ++p) {
            if (f[p] > 0.0 && parts[p]->count(y) == 0) {
                throw DataError(std::string("class ") + std::to_string(y) + " is empty in the " + names[p] +
                                " split");
            }
        }
    }
    return out;
}

}  // namespace qdre
