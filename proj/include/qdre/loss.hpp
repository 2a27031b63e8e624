#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace qdre {

/// Margin kept between a classifier output and the ends of (a, b) before any
/// logarithm is taken.
inline constexpr double kClampEpsilon = 1e-7;

/// Absolute tolerance on second differences when deciding convexity.
inline constexpr double kConvexTolerance = 1e-9;

/// The ratio-trick homeomorphism T : (a, b) -> R,
///
///     T(s) = orientation * (1/(s - a) + 1/(s - b)),
///
/// which maps a bounded classifier output onto the whole real line. With
/// orientation +1 it is strictly decreasing, so g = -\int T is convex.
/// The midpoint (a + b)/2 maps to zero.
struct RatioTrickTransform {
    double a = 0.0;
    double b = 1.0;
    int orientation = +1;

    /// (0, 1): the sigmoid-output case.
    static RatioTrickTransform unit() { return {0.0, 1.0, +1}; }
    /// (-1, 1): the tanh-output case.
    static RatioTrickTransform symmetric() { return {-1.0, 1.0, +1}; }

    /// Throws std::invalid_argument unless a < b and orientation is +-1.
    void validate() const;

    double midpoint() const { return 0.5 * (a + b); }
    double half_width() const { return 0.5 * (b - a); }

    /// Clamp s into [a + eps, b - eps]. Returns true if s was moved.
    bool clamp(double& s) const;

    /// T(s). Throws std::domain_error if s lies outside [a, b]; values in the
    /// boundary margin are clamped first.
    double operator()(double s) const;
    /// dT/ds, same domain handling.
    double derivative(double s) const;
    /// The unique s in (a, b) with T(s) = r.
    double inverse(double r) const;

    /// g(s) = -orientation * (log(s - a) + log(b - s)), an antiderivative of -T.
    double antiderivative_of_negative(double s) const;

    bool operator==(const RatioTrickTransform&) const = default;
};

/// Free-function spellings of the transform.
double transform(const RatioTrickTransform& t, double s);
double inverse_transform(const RatioTrickTransform& t, double r);

double sigmoid(double z);

/// r = -2 sinh(z): the ratio implied by a sigmoid logit under T on (0, 1).
double logit_to_ratio(double z);

enum class LossKind { Revert, Bce };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

/// A binary classification loss L(s, y) together with the ratio trick it induces.
///
/// Revert: L(s, y) = y s + (1 - y) g(s) with g = -\int T, implied ratio T(s).
/// Bce:    L(s, y) = -y log s - (1 - y) log(1 - s) on (0, 1), implied ratio s/(1-s).
struct LossSpec {
    RatioTrickTransform transform = RatioTrickTransform::unit();
    LossKind kind = LossKind::Revert;

    static LossSpec revert(RatioTrickTransform t = RatioTrickTransform::unit()) {
        return {t, LossKind::Revert};
    }
    static LossSpec bce() { return {RatioTrickTransform::unit(), LossKind::Bce}; }

    /// Output interval of the classifier this loss expects.
    double lower() const { return kind == LossKind::Bce ? 0.0 : transform.a; }
    double upper() const { return kind == LossKind::Bce ? 1.0 : transform.b; }

    /// Loss value. s is clamped into the open interval first; `clamped` (if
    /// given) is incremented when that happens.
    double value(double s, int y, std::size_t* clamped = nullptr) const;
    /// dL/ds at the clamped s.
    double gradient(double s, int y, std::size_t* clamped = nullptr) const;
    /// Density ratio implied by classifier output s.
    double implied_ratio(double s) const;

    bool operator==(const LossSpec&) const = default;
};

double revert_loss(const LossSpec& spec, double s, int y);
double revert_loss_grad(const LossSpec& spec, double s, int y);

/// Pointwise integrand of the risk functional at one x: the class densities
/// q(x|Y=1), q(x|Y=0) (possibly negative) and the class priors.
struct LagrangianProbe {
    double q1 = 0.0;
    double q0 = 0.0;
    double prior0 = 0.5;
    double prior1 = 0.5;

    /// Throws std::invalid_argument if priors are negative or do not sum to one.
    void validate() const;
};

/// L(s) = L(s, 0) q0 p0 + L(s, 1) q1 p1.
double lagrangian_value(const LagrangianProbe& probe, const LossSpec& spec, double s);

struct ConvexityReport {
    double min_second_derivative = 0.0;
    bool is_convex = true;
};

/// Central second differences of lagrangian_value over a strictly increasing
/// grid (non-uniform spacing allowed). The grid must have at least three
/// points, all strictly inside the clamped domain.
ConvexityReport convexity_scan(const LagrangianProbe& probe, const LossSpec& spec,
                               std::span<const double> grid,
                               double tolerance = kConvexTolerance);

}  // namespace qdre
