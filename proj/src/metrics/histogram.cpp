#include "qdre/metrics/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qdre/errors.hpp"

namespace qdre::metrics {

Histogram::Histogram(std::vector<double> bin_edges) : edges(std::move(bin_edges)) {
    if (edges.size() < 2) throw std::invalid_argument("histogram needs at least one bin");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) throw std::invalid_argument("histogram edges must be strictly increasing");
    }
    sum_w.assign(edges.size() - 1, 0.0);
    sum_w2.assign(edges.size() - 1, 0.0);
}

void Histogram::fill(double x, double w) {
    if (!(x >= edges.front() && x <= edges.back())) {
        overflow += w;
        return;
    }
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    std::size_t b = static_cast<std::size_t>(it - edges.begin());
    b = b == 0 ? 0 : b - 1;
    if (b >= bins()) b = bins() - 1;  // x == last edge
    sum_w[b] += w;
    sum_w2[b] += w * w;
}

double Histogram::total() const {
    double t = 0.0;
    for (double v : sum_w) t += v;
    return t;
}

Histogram Histogram::scaled(double factor) const {
    Histogram h = *this;
    for (double& v : h.sum_w) v *= factor;
    for (double& v : h.sum_w2) v *= factor * factor;
    h.overflow *= factor;
    return h;
}

Histogram make_histogram(std::vector<double> edges, std::span<const double> x, std::span<const double> w) {
    if (x.size() != w.size()) throw DataError("histogram: values and weights differ in length");
    Histogram h(std::move(edges));
    for (std::size_t i = 0; i < x.size(); ++i) h.fill(x[i], w[i]);
    return h;
}

double percentile(std::vector<double> values, double pct) {
    if (values.empty()) throw DataError("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> percentile_edges(std::span<const double> pooled, std::size_t bins, double lo_pct, double hi_pct) {
    if (bins == 0) throw ConfigError("histogram: bins must be positive");
    std::vector<double> values(pooled.begin(), pooled.end());
    double lo = percentile(values, lo_pct);
    double hi = percentile(std::move(values), hi_pct);
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    edges.back() = hi;
    return edges;
}

namespace {

void require_same_binning(const Histogram& a, const Histogram& b) {
    if (a.edges != b.edges) throw DataError("histograms use different binning");
}

}  // namespace

double chi2_score(const Histogram& target, const Histogram& reweighted) {
    require_same_binning(target, reweighted);
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t b = 0; b < target.bins(); ++b) {
        const double var = target.sum_w2[b] + reweighted.sum_w2[b];
        if (var == 0.0) continue;
        const double d = target.sum_w[b] - reweighted.sum_w[b];
        sum += d * d / var;
        ++used;
    }
    if (used == 0) throw DataError("chi2: every bin is empty");
    return sum / static_cast<double>(used);
}

TsallisResult tsallis_d2(const Histogram& target, const Histogram& reweighted) {
    require_same_binning(target, reweighted);
    const double tp = target.total();
    const double tq = reweighted.total();
    if (!(tp > 0.0) || !(tq > 0.0)) throw DataError("tsallis: histogram totals must be positive");
    TsallisResult out;
    std::size_t used = 0;
    for (std::size_t b = 0; b < target.bins(); ++b) {
        const double q = reweighted.sum_w[b] / tq;
        if (!(q > 0.0)) {
            ++out.excluded_bins;
            continue;
        }
        const double d = target.sum_w[b] / tp - q;
        out.value += d * d / q;
        ++used;
    }
    if (used == 0) throw DataError("tsallis: every bin is excluded");
    return out;
}

}  // namespace qdre::metrics
