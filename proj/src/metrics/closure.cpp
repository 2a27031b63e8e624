#include "qdre/metrics/closure.hpp"

#include <cmath>
#include <string>

#include "qdre/errors.hpp"

namespace qdre::metrics {

ClosureReport reweight_closure(const Dataset& reference, const RatioFunction& ratio, const Dataset& target,
                               std::span<const std::size_t> features, const ClosureOptions& options) {
    if (reference.empty()) throw DataError("closure: reference sample is empty");
    if (target.empty()) throw DataError("closure: target sample is empty");
    if (reference.dim() != target.dim()) throw DataError("closure: reference and target dimensions differ");
    for (std::size_t f : features) {
        if (f >= target.dim()) throw DataError("closure: feature " + std::to_string(f) + " out of range");
    }

    ClosureReport report;
    report.reweighted_weights.reserve(reference.size());
    std::vector<double> raw_w;
    raw_w.reserve(reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double r = ratio(reference[i].features);
        if (!std::isfinite(r)) throw NumericalError("closure: non-finite ratio at reference sample " + std::to_string(i));
        raw_w.push_back(reference[i].weight);
        report.reweighted_weights.push_back(reference[i].weight * r);
    }
    std::vector<double> target_w;
    target_w.reserve(target.size());
    for (const auto& s : target) target_w.push_back(s.weight);

    double t_total = 0.0;
    double raw_total = 0.0;
    double rw_total = 0.0;
    for (double w : target_w) t_total += w;
    for (double w : raw_w) raw_total += w;
    for (double w : report.reweighted_weights) rw_total += w;
    if (!(t_total > 0.0) || !(raw_total > 0.0)) throw DataError("closure: sample weights must have a positive sum");
    if (!(rw_total > 0.0)) throw NumericalError("closure: reweighted reference has a nonpositive total weight");

    for (std::size_t f : features) {
        std::vector<double> xt;
        std::vector<double> xr;
        xt.reserve(target.size());
        xr.reserve(reference.size());
        for (const auto& s : target) xt.push_back(s.features[f]);
        for (const auto& s : reference) xr.push_back(s.features[f]);
        std::vector<double> pooled = xt;
        pooled.insert(pooled.end(), xr.begin(), xr.end());
        const auto edges = percentile_edges(pooled, options.bins);

        FeatureClosure fc;
        fc.feature = f;
        fc.target = make_histogram(edges, xt, target_w);
        fc.reference = make_histogram(edges, xr, raw_w).scaled(t_total / raw_total);
        fc.reweighted = make_histogram(edges, xr, report.reweighted_weights).scaled(t_total / rw_total);
        fc.chi2 = chi2_score(fc.target, fc.reweighted);
        const auto ts = tsallis_d2(fc.target, fc.reweighted);
        fc.tsallis = ts.value;
        fc.tsallis_excluded = ts.excluded_bins;
        report.features.push_back(std::move(fc));
    }

    if (options.sw) {
        const auto mu = SignedEmpiricalMeasure::from_dataset(target);
        SignedEmpiricalMeasure nu(reference.dim());
        for (std::size_t i = 0; i < reference.size(); ++i) nu.add(reference[i].features, report.reweighted_weights[i]);
        report.sw = extended_sw1(mu, nu, *options.sw);
    }
    return report;
}

}  // namespace qdre::metrics
