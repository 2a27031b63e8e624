#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qdre::metrics {

/// Weighted 1-D histogram over fixed edges; keeps sum w and sum w^2 per bin.
/// Entries outside [edges.front(), edges.back()] are counted in `overflow`.
struct Histogram {
    std::vector<double> edges;
    std::vector<double> sum_w;
    std::vector<double> sum_w2;
    double overflow = 0.0;

    Histogram() = default;
    /// Throws std::invalid_argument unless edges are strictly increasing and
    /// there is at least one bin.
    explicit Histogram(std::vector<double> bin_edges);

    std::size_t bins() const { return sum_w.size(); }
    void fill(double x, double w);
    double total() const;
    Histogram scaled(double factor) const;
};

Histogram make_histogram(std::vector<double> edges, std::span<const double> x, std::span<const double> w);

/// Linear-interpolation percentile (0..100) of the values.
double percentile(std::vector<double> values, double pct);

/// `bins` uniform bins spanning the [lo_pct, hi_pct] percentiles of the
/// pooled values. A degenerate range is widened by 0.5 on each side.
std::vector<double> percentile_edges(std::span<const double> pooled, std::size_t bins = 50, double lo_pct = 0.5,
                                     double hi_pct = 99.5);

/// Mean over bins of (T - R)^2 / (var_T + var_R), var = sum w^2; bins with
/// both variances zero are skipped. Throws DataError on mismatched binning
/// or when every bin is skipped.
double chi2_score(const Histogram& target, const Histogram& reweighted);

struct TsallisResult {
    double value = 0.0;
    std::size_t excluded_bins = 0;
};

/// sum (p - q)^2 / q with p, q the histograms scaled to unit total; bins with
/// q <= 0 are excluded and counted. Throws DataError on mismatched binning,
/// a nonpositive total, or when every bin is excluded.
TsallisResult tsallis_d2(const Histogram& target, const Histogram& reweighted);

}  // namespace qdre::metrics
