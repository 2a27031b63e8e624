#include "qdre/metrics/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qdre/errors.hpp"
#include "qdre/random.hpp"

namespace qdre::metrics {

void SignedEmpiricalMeasure::add(std::span<const double> x, double w) {
    if (x.size() != dim) {
        throw DataError("measure point has dimension " + std::to_string(x.size()) + ", expected " +
                        std::to_string(dim));
    }
    if (!std::isfinite(w) || !std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
        throw DataError("measure point has a non-finite entry");
    }
    points.insert(points.end(), x.begin(), x.end());
    weights.push_back(w);
}

SignedEmpiricalMeasure SignedEmpiricalMeasure::from_dataset(const Dataset& data, int label) {
    SignedEmpiricalMeasure m(data.dim());
    for (const auto& s : data) {
        if (label < 0 || s.label == label) m.add(s.features, s.weight);
    }
    return m;
}

void SwConfig::validate() const {
    if (n_projections == 0) throw ConfigError("sw: n_projections must be at least 1");
    if (n_repeats == 0) throw ConfigError("sw: n_repeats must be at least 1");
}

namespace {

double checked_mass(std::span<const double> w, const char* name) {
    double m = 0.0;
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DataError(std::string("w1_1d: ") + name + " has a negative or non-finite weight");
        m += v;
    }
    return m;
}

std::vector<std::size_t> sorted_order(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    return idx;
}

}  // namespace

double w1_1d(std::span<const double> xu, std::span<const double> wu, std::span<const double> xv,
             std::span<const double> wv) {
    if (xu.size() != wu.size() || xv.size() != wv.size()) throw DataError("w1_1d: points and weights differ in length");
    const double mu = checked_mass(wu, "u");
    const double mv = checked_mass(wv, "v");
    if (std::abs(mu - mv) > 1e-9 * std::max({1.0, mu, mv})) {
        throw DataError("w1_1d: total weights differ (" + std::to_string(mu) + " vs " + std::to_string(mv) + ")");
    }
    for (double x : xu) {
        if (!std::isfinite(x)) throw DataError("w1_1d: non-finite support point");
    }
    for (double x : xv) {
        if (!std::isfinite(x)) throw DataError("w1_1d: non-finite support point");
    }

    const auto iu = sorted_order(xu);
    const auto iv = sorted_order(xv);
    std::size_t i = 0;
    std::size_t j = 0;
    double fu = 0.0;
    double fv = 0.0;
    double cost = 0.0;
    double prev = 0.0;
    bool started = false;
    while (i < iu.size() || j < iv.size()) {
        double x;
        if (i == iu.size()) {
            x = xv[iv[j]];
        } else if (j == iv.size()) {
            x = xu[iu[i]];
        } else {
            x = std::min(xu[iu[i]], xv[iv[j]]);
        }
        if (started) cost += std::abs(fu - fv) * (x - prev);
        while (i < iu.size() && xu[iu[i]] == x) fu += wu[iu[i++]];
        while (j < iv.size() && xv[iv[j]] == x) fv += wv[iv[j++]];
        prev = x;
        started = true;
    }
    return cost;
}

std::vector<double> sample_directions(std::size_t d, std::size_t n, std::uint64_t seed) {
    if (d == 0) throw DataError("sample_directions: dimension must be positive");
    Rng rng(seed);
    std::vector<double> out(d * n);
    for (std::size_t k = 0; k < n; ++k) {
        std::span<double> v(out.data() + k * d, d);
        double norm = 0.0;
        while (norm == 0.0) {
            norm = 0.0;
            for (double& c : v) {
                c = rng.normal();
                norm += c * c;
            }
        }
        norm = std::sqrt(norm);
        for (double& c : v) c /= norm;
    }
    return out;
}

namespace {

std::vector<double> project(const SignedEmpiricalMeasure& m, std::span<const double> theta) {
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto x = m.point(i);
        double s = 0.0;
        for (std::size_t k = 0; k < m.dim; ++k) s += x[k] * theta[k];
        out[i] = s;
    }
    return out;
}

}  // namespace

double sliced_w1(const SignedEmpiricalMeasure& a, const SignedEmpiricalMeasure& b, std::span<const double> directions) {
    if (a.dim != b.dim) throw DataError("sliced_w1: dimension mismatch");
    const std::size_t d = a.dim;
    if (d == 0 || directions.empty() || directions.size() % d != 0) {
        throw DataError("sliced_w1: directions do not match the dimension");
    }
    const std::size_t n = directions.size() / d;
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto theta = directions.subspan(k * d, d);
        total += w1_1d(project(a, theta), a.weights, project(b, theta), b.weights);
    }
    return total / static_cast<double>(n);
}

namespace {

void append_part(SignedEmpiricalMeasure& dst, const SignedEmpiricalMeasure& src, int sign) {
    for (std::size_t i = 0; i < src.size(); ++i) {
        const double w = src.weights[i];
        if ((sign > 0 && w > 0.0) || (sign < 0 && w < 0.0)) dst.add(src.point(i), std::abs(w));
    }
}

void normalize_to_unit(SignedEmpiricalMeasure& m, const char* name) {
    double total = 0.0;
    for (double w : m.weights) total += w;
    if (!(total > 0.0)) throw DataError(std::string("extended_sw1: merged cloud ") + name + " has no mass");
    for (double& w : m.weights) w /= total;
}

}  // namespace

SwResult extended_sw1(const SignedEmpiricalMeasure& mu, const SignedEmpiricalMeasure& nu, const SwConfig& cfg) {
    cfg.validate();
    if (mu.dim != nu.dim) throw DataError("extended_sw1: dimension mismatch");
    SignedEmpiricalMeasure a(mu.dim);
    SignedEmpiricalMeasure b(mu.dim);
    append_part(a, mu, +1);
    append_part(a, nu, -1);
    append_part(b, nu, +1);
    append_part(b, mu, -1);
    if (cfg.normalize) {
        normalize_to_unit(a, "mu+ + nu-");
        normalize_to_unit(b, "nu+ + mu-");
    } else if (a.size() == 0 || b.size() == 0) {
        throw DataError("extended_sw1: a merged cloud is empty");
    }

    SwResult out;
    out.repeats.reserve(cfg.n_repeats);
    for (std::size_t r = 0; r < cfg.n_repeats; ++r) {
        const auto dirs = sample_directions(mu.dim, cfg.n_projections, derive_seed(cfg.seed, std::uint64_t{r}));
        out.repeats.push_back(sliced_w1(a, b, dirs));
    }
    for (double v : out.repeats) out.mean += v;
    out.mean /= static_cast<double>(out.repeats.size());
    double var = 0.0;
    for (double v : out.repeats) var += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(var / static_cast<double>(out.repeats.size()));
    return out;
}

}  // namespace qdre::metrics
