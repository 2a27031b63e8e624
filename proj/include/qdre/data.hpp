#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

#include "json.hpp"

namespace qdre {

/// One event: feature vector, signed event weight and class label
/// (0 = reference, 1 = target).
struct WeightedSample {
    std::vector<double> features;
    double weight = 1.0;
    int label = 0;

    bool operator==(const WeightedSample&) const = default;
};

/// A collection of weighted samples of a fixed feature dimension.
///
/// Zero-weight samples carry no information and are dropped on insertion;
/// non-finite entries, bad labels and dimension mismatches throw DataError.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::size_t dim) : dim_(dim) {}
    Dataset(std::size_t dim, std::vector<WeightedSample> samples);

    /// Returns false if the sample was dropped for having zero weight.
    bool add(WeightedSample sample);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const WeightedSample& operator[](std::size_t i) const { return samples_[i]; }
    std::span<const WeightedSample> samples() const { return samples_; }
    auto begin() const { return samples_.begin(); }
    auto end() const { return samples_.end(); }

    std::size_t count(int label) const;
    double weight_sum(int label) const;
    double abs_weight_sum() const;

    /// Samples of one class, optionally restricted to a weight sign
    /// (+1: w > 0, -1: w < 0, 0: all).
    Dataset select(int label, int weight_sign = 0) const;

    /// Rescales class-1 weights so both classes carry the same signed total,
    /// which makes the empirical class priors equal. Throws DataError if a
    /// class is empty or has a nonpositive weight sum.
    void balance_classes();
    bool is_balanced(double rel_tol = 1e-9) const;

    bool operator==(const Dataset&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<WeightedSample> samples_;
};

/// Concatenate datasets of equal dimension.
Dataset concat(const Dataset& a, const Dataset& b);

/// Axis-aligned Gaussian with a signed mixture coefficient.
struct GaussianComponent {
    std::vector<double> mean;
    std::vector<double> variance;
    double coefficient = 1.0;

    bool operator==(const GaussianComponent&) const = default;
};

/// q(x|y) = sum_k c_k N(x; mean_k, diag(variance_k)), coefficients summing to one.
struct SignedMixture {
    std::vector<GaussianComponent> components;

    double density(std::span<const double> x) const;
    double abs_coefficient_sum() const;
    bool operator==(const SignedMixture&) const = default;
};

/// Reference (Y=0) and target (Y=1) signed mixtures with an analytic ratio.
///
/// The reference must be a proper density (all coefficients positive);
/// otherwise the ratio crosses a pole wherever q(x|0) changes sign.
struct SignedMixtureSpec {
    SignedMixture reference;
    SignedMixture target;

    std::size_t dim() const;
    const SignedMixture& for_class(int y) const { return y == 0 ? reference : target; }

    /// Throws ConfigError describing the first violated constraint.
    void validate() const;

    bool operator==(const SignedMixtureSpec&) const = default;
};

void to_json(nlohmann::json& j, const SignedMixtureSpec& spec);
void from_json(const nlohmann::json& j, SignedMixtureSpec& spec);

/// Draws n samples per class. Component k is picked with probability
/// |c_k| / sum|c_j| and the sample gets weight sign(c_k) * sum|c_j|, so
/// (1/n) sum_i w_i phi(x_i) is an unbiased estimate of \int phi q.
/// Deterministic in `seed`.
Dataset sample_mixture(const SignedMixtureSpec& spec, std::size_t n, std::uint64_t seed);

double analytic_density(const SignedMixtureSpec& spec, int y, std::span<const double> x);

/// q(x|1) / q(x|0). Throws NumericalError when |q(x|0)| < 1e-300.
double analytic_ratio(const SignedMixtureSpec& spec, std::span<const double> x);

/// Sub-ratios of the positive and negative parts of the target against the
/// reference, each part normalised to unit mass:
/// r_pp = p_{w+}(x|1)/q(x|0), r_pm = p_{w-}(x|1)/q(x|0). The target's
/// positive mass is returned as the mixture coefficient c, so that
/// analytic_ratio = c r_pp + (1 - c) r_pm.
struct SubRatioOracle {
    double coefficient = 1.0;
    double r_pp(std::span<const double> x) const;
    double r_pm(std::span<const double> x) const;

    SignedMixture positive_part;
    SignedMixture negative_part;
    SignedMixture reference;
};

SubRatioOracle sub_ratio_oracle(const SignedMixtureSpec& spec);

struct SplitFractions {
    double train = 0.65;
    double validation = 0.15;
    double test = 0.20;
};

struct DatasetSplit {
    Dataset train;
    Dataset validation;
    Dataset test;
};

/// Stratified, seeded partition. Per-split totals are apportioned with the
/// largest-remainder rule, first across splits and then across classes, so
/// sizes are exact whenever fraction * n is integral. Throws DataError if a
/// class that is present ends up empty in a split with a positive fraction.
DatasetSplit split(const Dataset& data, const SplitFractions& fractions, std::uint64_t seed);

}  // namespace qdre
