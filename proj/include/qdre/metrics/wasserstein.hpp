#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qdre/data.hpp"

namespace qdre::metrics {

/// Weighted point cloud with signed weights; points are stored row-major.
struct SignedEmpiricalMeasure {
    std::size_t dim = 0;
    std::vector<double> points;
    std::vector<double> weights;

    SignedEmpiricalMeasure() = default;
    explicit SignedEmpiricalMeasure(std::size_t d) : dim(d) {}

    /// Throws DataError on a non-finite entry or a dimension mismatch.
    void add(std::span<const double> x, double w);
    std::size_t size() const { return weights.size(); }
    std::span<const double> point(std::size_t i) const { return {points.data() + i * dim, dim}; }

    /// Every sample of `data`, or only one class when label >= 0.
    static SignedEmpiricalMeasure from_dataset(const Dataset& data, int label = -1);
};

struct SwConfig {
    std::size_t n_projections = 50;
    std::size_t n_repeats = 1000;
    std::uint64_t seed = 0;
    /// Rescale each merged cloud to unit weight before transport.
    bool normalize = true;

    /// Throws ConfigError when either count is zero.
    void validate() const;
};

struct SwResult {
    double mean = 0.0;
    double std = 0.0;  ///< population standard deviation over repeats
    std::vector<double> repeats;
};

/// Exact 1-D transport cost between two nonnegative weighted point sets of
/// equal total mass: the integral of |F_u - F_v| over the line. Throws
/// DataError on negative or non-finite weights, or if the masses differ by
/// more than 1e-9 (relative to the larger mass when it exceeds one).
double w1_1d(std::span<const double> xu, std::span<const double> wu, std::span<const double> xv,
             std::span<const double> wv);

/// n unit vectors in R^d, uniform on the sphere (normalised Gaussians).
/// Returned row-major, n x d.
std::vector<double> sample_directions(std::size_t d, std::size_t n, std::uint64_t seed);

/// Sliced W1 between nonnegative clouds for one fixed set of directions.
double sliced_w1(const SignedEmpiricalMeasure& a, const SignedEmpiricalMeasure& b, std::span<const double> directions);

/// Sliced W1 between signed measures, computed as SW1(mu+ + nu-, nu+ + mu-).
/// Repeat r draws its directions from derive_seed(cfg.seed, r). Throws
/// DataError if a merged cloud has no positive mass.
SwResult extended_sw1(const SignedEmpiricalMeasure& mu, const SignedEmpiricalMeasure& nu, const SwConfig& cfg);

}  // namespace qdre::metrics
