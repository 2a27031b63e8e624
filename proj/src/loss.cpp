#include "qdre/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qdre {

void RatioTrickTransform::validate() const {
    if (!(std::isfinite(a) && std::isfinite(b) && a < b)) {
        throw std::invalid_argument("ratio-trick transform needs finite a < b");
    }
    if (orientation != 1 && orientation != -1) {
        throw std::invalid_argument("ratio-trick orientation must be +1 or -1");
    }
}

bool RatioTrickTransform::clamp(double& s) const {
    const double lo = a + kClampEpsilon;
    const double hi = b - kClampEpsilon;
    if (s < lo) {
        s = lo;
        return true;
    }
    if (s > hi) {
        s = hi;
        return true;
    }
    return false;
}

namespace {

void check_domain(const RatioTrickTransform& t, double s) {
    if (!(s >= t.a && s <= t.b)) {
        throw std::domain_error("classifier output " + std::to_string(s) + " outside [" +
                                std::to_string(t.a) + ", " + std::to_string(t.b) + "]");
    }
}

}  // namespace

double RatioTrickTransform::operator()(double s) const {
    check_domain(*this, s);
    clamp(s);
    return orientation * (1.0 / (s - a) + 1.0 / (s - b));
}

double RatioTrickTransform::derivative(double s) const {
    check_domain(*this, s);
    clamp(s);
    const double da = s - a;
    const double db = s - b;
    return -orientation * (1.0 / (da * da) + 1.0 / (db * db));
}

double RatioTrickTransform::inverse(double r) const {
    // With u = s - m and h the half width, T(s) = orientation * 2u / (u^2 - h^2).
    // Solving the quadratic for the root with |u| < h and rationalising gives
    // u = -rho h^2 / (1 + sqrt(1 + rho^2 h^2)), which has no cancellation and
    // no singularity at rho = 0.
    const double h = half_width();
    const double rho = orientation * r;
    const double u = -rho * h * h / (1.0 + std::hypot(1.0, rho * h));
    return midpoint() + u;
}

double RatioTrickTransform::antiderivative_of_negative(double s) const {
    clamp(s);
    return -orientation * (std::log(s - a) + std::log(b - s));
}

double transform(const RatioTrickTransform& t, double s) { return t(s); }

double inverse_transform(const RatioTrickTransform& t, double r) { return t.inverse(r); }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double logit_to_ratio(double z) { return -2.0 * std::sinh(z); }

std::string to_string(LossKind kind) {
    return kind == LossKind::Revert ? "REVERT" : "BCE";
}

LossKind loss_kind_from_string(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "revert") return LossKind::Revert;
    if (lower == "bce") return LossKind::Bce;
    throw std::invalid_argument("unknown loss '" + name + "' (expected REVERT or BCE)");
}

namespace {

void check_label(int y) {
    if (y != 0 && y != 1) throw std::invalid_argument("class label must be 0 or 1");
}

double clamp_output(const LossSpec& spec, double s, std::size_t* clamped) {
    const double lo = spec.lower() + kClampEpsilon;
    const double hi = spec.upper() - kClampEpsilon;
    if (s < lo || s > hi) {
        if (clamped) ++*clamped;
        return std::clamp(s, lo, hi);
    }
    return s;
}

}  // namespace

double LossSpec::value(double s, int y, std::size_t* clamped) const {
    check_label(y);
    s = clamp_output(*this, s, clamped);
    if (kind == LossKind::Bce) {
        return y == 1 ? -std::log(s) : -std::log1p(-s);
    }
    return y == 1 ? s : transform.antiderivative_of_negative(s);
}

double LossSpec::gradient(double s, int y, std::size_t* clamped) const {
    check_label(y);
    s = clamp_output(*this, s, clamped);
    if (kind == LossKind::Bce) {
        return y == 1 ? -1.0 / s : 1.0 / (1.0 - s);
    }
    // g' = -T
    return y == 1 ? 1.0 : -transform(s);
}

double LossSpec::implied_ratio(double s) const {
    s = clamp_output(*this, s, nullptr);
    if (kind == LossKind::Bce) return s / (1.0 - s);
    return transform(s);
}

double revert_loss(const LossSpec& spec, double s, int y) { return spec.value(s, y); }

double revert_loss_grad(const LossSpec& spec, double s, int y) { return spec.gradient(s, y); }

void LagrangianProbe::validate() const {
    if (!(prior0 >= 0.0 && prior1 >= 0.0) || std::abs(prior0 + prior1 - 1.0) > 1e-12) {
        throw std::invalid_argument("class priors must be nonnegative and sum to one");
    }
}

double lagrangian_value(const LagrangianProbe& probe, const LossSpec& spec, double s) {
    return spec.value(s, 0) * probe.q0 * probe.prior0 + spec.value(s, 1) * probe.q1 * probe.prior1;
}

ConvexityReport convexity_scan(const LagrangianProbe& probe, const LossSpec& spec,
                               std::span<const double> grid, double tolerance) {
    probe.validate();
    if (grid.size() < 3) throw std::invalid_argument("convexity scan needs at least 3 grid points");
    const double lo = spec.lower() + kClampEpsilon;
    const double hi = spec.upper() - kClampEpsilon;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= lo && grid[i] <= hi)) {
            throw std::invalid_argument("convexity grid leaves the clamped domain");
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("convexity grid must be strictly increasing");
        }
    }

    ConvexityReport report;
    report.min_second_derivative = std::numeric_limits<double>::infinity();
    double f_prev = lagrangian_value(probe, spec, grid[0]);
    double f_mid = lagrangian_value(probe, spec, grid[1]);
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double f_next = lagrangian_value(probe, spec, grid[i + 1]);
        const double h1 = grid[i] - grid[i - 1];
        const double h2 = grid[i + 1] - grid[i];
        const double second =
            2.0 * (h1 * f_next - (h1 + h2) * f_mid + h2 * f_prev) / (h1 * h2 * (h1 + h2));
        report.min_second_derivative = std::min(report.min_second_derivative, second);
        f_prev = f_mid;
        f_mid = f_next;
    }
    report.is_convex = report.min_second_derivative >= -tolerance;
    return report;
}

}  // namespace qdre
