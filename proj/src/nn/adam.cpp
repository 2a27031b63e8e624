#include "qdre/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace qdre::nn {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr,
               const AdamConstants& c) {
    if (state.m.size() != params.size() || state.v.size() != params.size() || grads.size() != params.size()) {
        throw std::invalid_argument("Adam state, parameters and gradients must have the same size");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
        const double m_hat = state.m[i] / correction1;
        const double v_hat = state.v[i] / correction2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
}

}  // namespace qdre::nn
