#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qdre::nn {

struct AdamConstants {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First/second moment estimates and the step counter.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t step = 0;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update, in place:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr,
               const AdamConstants& constants = {});

}  // namespace qdre::nn
