#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qdre/data.hpp"
#include "qdre/metrics/histogram.hpp"
#include "qdre/metrics/wasserstein.hpp"

namespace qdre::metrics {

using RatioFunction = std::function<double(std::span<const double>)>;

struct FeatureClosure {
    std::size_t feature = 0;
    Histogram target;
    Histogram reference;   ///< raw reference, scaled to the target total
    Histogram reweighted;  ///< reference times ratio, scaled to the target total
    double chi2 = 0.0;
    double tsallis = 0.0;
    std::size_t tsallis_excluded = 0;
};

struct ClosureReport {
    std::vector<FeatureClosure> features;
    std::optional<SwResult> sw;
    std::vector<double> reweighted_weights;
};

struct ClosureOptions {
    std::size_t bins = 50;
    std::optional<SwConfig> sw;  ///< extended SW1 of target vs reweighted reference
};

/// Reweights every reference sample by ratio(x) and compares the result with
/// the target, feature by feature. All samples of both datasets are used.
/// Binning is shared per feature and taken from the pooled target and
/// reference values. Throws NumericalError (with the sample index) on a
/// non-finite ratio, DataError on an empty dataset, a dimension mismatch or
/// a feature index out of range.
ClosureReport reweight_closure(const Dataset& reference, const RatioFunction& ratio, const Dataset& target,
                               std::span<const std::size_t> features, const ClosureOptions& options = {});

}  // namespace qdre::metrics
