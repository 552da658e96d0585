#pragma once

// Parametric dose-response families with closed-form evaluation, analytic
// parameter gradients, dose derivatives, and (for monotone curves) inverses.
//
//   linear       theta1 + theta2*d
//   quadratic    theta1 + theta2*d + theta3*d^2
//   emax         theta1 + theta2*d/(theta3 + d),            theta3 > 0
//   logistic     theta1 + theta2/(1 + exp((theta3 - d)/theta4)), theta4 != 0
//   exponential  theta1 + theta2*(exp(d/theta3) - 1),       theta3 != 0

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curveq/error.hpp"

namespace curveq {

enum class ModelFamily { linear, quadratic, emax, logistic, exponential };

inline constexpr int param_count(ModelFamily family) {
    switch (family) {
        case ModelFamily::linear: return 2;
        case ModelFamily::quadratic: return 3;
        case ModelFamily::emax: return 3;
        case ModelFamily::logistic: return 4;
        case ModelFamily::exponential: return 3;
    }
    return 0;
}

inline constexpr std::string_view family_name(ModelFamily family) {
    switch (family) {
        case ModelFamily::linear: return "linear";
        case ModelFamily::quadratic: return "quadratic";
        case ModelFamily::emax: return "emax";
        case ModelFamily::logistic: return "logistic";
        case ModelFamily::exponential: return "exponential";
    }
    return "?";
}

inline std::optional<ModelFamily> parse_family(std::string_view name) {
    if (name == "linear") return ModelFamily::linear;
    if (name == "quadratic") return ModelFamily::quadratic;
    if (name == "emax") return ModelFamily::emax;
    if (name == "logistic") return ModelFamily::logistic;
    if (name == "exponential") return ModelFamily::exponential;
    return std::nullopt;
}

using Params = std::vector<double>;

inline void check_params(ModelFamily family, std::span<const double> theta) {
    if (static_cast<int>(theta.size()) != param_count(family))
        throw DomainError(std::string(family_name(family)) + ": expected " +
                          std::to_string(param_count(family)) + " parameters, got " +
                          std::to_string(theta.size()));
    for (double v : theta)
        if (!std::isfinite(v))
            throw DomainError(std::string(family_name(family)) + ": non-finite parameter");
    if (family == ModelFamily::logistic && theta[3] == 0.0)
        throw DomainError("logistic: theta4 must be nonzero");
    if (family == ModelFamily::exponential && theta[2] == 0.0)
        throw DomainError("exponential: theta3 must be nonzero");
}

inline double evaluate(ModelFamily family, std::span<const double> theta, double d) {
    check_params(family, theta);
    if (!std::isfinite(d)) throw DomainError("evaluate: dose must be finite");
    switch (family) {
        case ModelFamily::linear:
            return theta[0] + theta[1] * d;
        case ModelFamily::quadratic:
            return theta[0] + theta[1] * d + theta[2] * d * d;
        case ModelFamily::emax: {
            const double denom = theta[2] + d;
            if (denom == 0.0)
                throw DomainError("emax: theta3 + d == 0, model undefined at this dose");
            return theta[0] + theta[1] * d / denom;
        }
        case ModelFamily::logistic:
            return theta[0] + theta[1] / (1.0 + std::exp((theta[2] - d) / theta[3]));
        case ModelFamily::exponential:
            return theta[0] + theta[1] * std::expm1(d / theta[2]);
    }
    throw DomainError("evaluate: unknown family");
}

// Partial derivatives of the mean response with respect to the parameters;
// out must hold param_count(family) doubles.
inline void gradient(ModelFamily family, std::span<const double> theta, double d, double* out) {
    check_params(family, theta);
    if (!std::isfinite(d)) throw DomainError("gradient: dose must be finite");
    switch (family) {
        case ModelFamily::linear:
            out[0] = 1.0;
            out[1] = d;
            return;
        case ModelFamily::quadratic:
            out[0] = 1.0;
            out[1] = d;
            out[2] = d * d;
            return;
        case ModelFamily::emax: {
            const double denom = theta[2] + d;
            if (denom == 0.0)
                throw DomainError("emax: theta3 + d == 0, model undefined at this dose");
            out[0] = 1.0;
            out[1] = d / denom;
            out[2] = -theta[1] * d / (denom * denom);
            return;
        }
        case ModelFamily::logistic: {
            const double z = (theta[2] - d) / theta[3];
            const double ez = std::exp(z);
            const double s = 1.0 / (1.0 + ez);
            out[0] = 1.0;
            out[1] = s;
            out[2] = -theta[1] * ez * s * s / theta[3];
            out[3] = theta[1] * z * ez * s * s / theta[3];
            return;
        }
        case ModelFamily::exponential: {
            const double e = std::exp(d / theta[2]);
            out[0] = 1.0;
            out[1] = e - 1.0;
            out[2] = -theta[1] * e * d / (theta[2] * theta[2]);
            return;
        }
    }
    throw DomainError("gradient: unknown family");
}

inline Params gradient(ModelFamily family, std::span<const double> theta, double d) {
    Params g(param_count(family));
    gradient(family, theta, d, g.data());
    return g;
}

// d m(theta, d) / d d.
inline double dose_derivative(ModelFamily family, std::span<const double> theta, double d) {
    check_params(family, theta);
    switch (family) {
        case ModelFamily::linear:
            return theta[1];
        case ModelFamily::quadratic:
            return theta[1] + 2.0 * theta[2] * d;
        case ModelFamily::emax: {
            const double denom = theta[2] + d;
            if (denom == 0.0)
                throw DomainError("emax: theta3 + d == 0, model undefined at this dose");
            return theta[1] * theta[2] / (denom * denom);
        }
        case ModelFamily::logistic: {
            const double z = (theta[2] - d) / theta[3];
            const double ez = std::exp(z);
            const double s = 1.0 / (1.0 + ez);
            return theta[1] * ez * s * s / theta[3];
        }
        case ModelFamily::exponential:
            return theta[1] * std::exp(d / theta[2]) / theta[2];
    }
    throw DomainError("dose_derivative: unknown family");
}

// Sign of the dose derivative on [0, inf): +1 increasing, -1 decreasing,
// 0 when the curve is not strictly monotone there.
inline int monotone_direction(ModelFamily family, std::span<const double> theta) {
    check_params(family, theta);
    auto sign = [](double v) { return (v > 0.0) ? 1 : (v < 0.0 ? -1 : 0); };
    switch (family) {
        case ModelFamily::linear:
            return sign(theta[1]);
        case ModelFamily::quadratic:
            if (theta[2] == 0.0) return sign(theta[1]);
            // Derivative theta2 + 2*theta3*d keeps its sign on [0, inf) only
            // when it does not cross zero there.
            if (theta[2] > 0.0) return (theta[1] >= 0.0) ? sign(theta[1] + theta[2]) : 0;
            return (theta[1] <= 0.0) ? -1 : 0;
        case ModelFamily::emax:
            if (!(theta[2] > 0.0)) return 0;
            return sign(theta[1]);
        case ModelFamily::logistic:
            return sign(theta[1] / theta[3]);
        case ModelFamily::exponential:
            return sign(theta[1] / theta[2]);
    }
    return 0;
}

namespace detail {

// Bracketed bisection with Newton polish for families without a closed-form
// inverse. Assumes the model is strictly monotone on [0, inf).
inline double inverse_by_bracket(ModelFamily family, std::span<const double> theta,
                                 double y, int direction) {
    const double at_zero = evaluate(family, theta, 0.0);
    if (y == at_zero) return 0.0;
    if (direction * (y - at_zero) < 0.0)
        throw NotAttainableError(std::string(family_name(family)) +
                                 ": target response lies on the wrong side of the placebo response");

    double lo = 0.0, hi = 1.0;
    constexpr double dose_cap = 1e12;
    while (direction * (evaluate(family, theta, hi) - y) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > dose_cap)
            throw NotAttainableError(std::string(family_name(family)) +
                                     ": target response is never attained (at or beyond the asymptote)");
    }

    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (direction * (evaluate(family, theta, mid) - y) < 0.0)
            lo = mid;
        else
            hi = mid;
    }

    // Newton polish to push the residual toward machine precision.
    double d = 0.5 * (lo + hi);
    for (int i = 0; i < 8; ++i) {
        const double f = evaluate(family, theta, d) - y;
        const double slope = dose_derivative(family, theta, d);
        if (slope == 0.0) break;
        const double next = d - f / slope;
        if (!(next >= lo - 1e-9 && next <= hi + 1e-9)) break;
        if (next == d) break;
        d = next;
    }
    return std::max(d, 0.0);
}

} // namespace detail

// Unique d >= 0 with evaluate(family, theta, d) == y. Closed form for linear
// and emax, bracketed root solve otherwise. Throws NotAttainableError when y
// lies outside the attainable response range and UnsupportedModelError when
// the curve is not strictly monotone on [0, inf).
inline double inverse(ModelFamily family, std::span<const double> theta, double y) {
    check_params(family, theta);
    if (!std::isfinite(y)) throw DomainError("inverse: target response must be finite");

    const int direction = monotone_direction(family, theta);
    if (direction == 0)
        throw UnsupportedModelError(std::string(family_name(family)) +
                                    ": curve is not strictly monotone on [0, inf), inverse undefined");

    switch (family) {
        case ModelFamily::linear: {
            const double d = (y - theta[0]) / theta[1];
            if (d < 0.0)
                throw NotAttainableError(
                    "linear: target response lies on the wrong side of the placebo response");
            return d;
        }
        case ModelFamily::emax: {
            const double asymptote = theta[0] + theta[1];
            if (y == asymptote)
                throw NotAttainableError("emax: target response equals the asymptote theta1 + theta2");
            const double d = theta[2] * (y - theta[0]) / (asymptote - y);
            if (d < 0.0)
                throw NotAttainableError("emax: target response outside the attainable range");
            return d;
        }
        default:
            return detail::inverse_by_bracket(family, theta, y, direction);
    }
}

// Closed dose interval with an equally spaced evaluation grid including both
// endpoints.
struct DoseRange {
    double lower = 0.0;
    double upper = 1.0;
    int grid_points = 1001;

    void validate() const {
        if (!(lower < upper)) throw ConfigError("dose range: lower must be below upper");
        if (grid_points < 2) throw ConfigError("dose range: need at least 2 grid points");
        if (!std::isfinite(lower) || !std::isfinite(upper))
            throw ConfigError("dose range: bounds must be finite");
    }

    double dose_at(int i) const {
        if (i == grid_points - 1) return upper;  // exact endpoint, no fp drift
        return lower + (upper - lower) * static_cast<double>(i) /
                           static_cast<double>(grid_points - 1);
    }

    std::vector<double> grid() const {
        validate();
        std::vector<double> g(static_cast<size_t>(grid_points));
        for (int i = 0; i < grid_points; ++i) g[static_cast<size_t>(i)] = dose_at(i);
        return g;
    }
};

} // namespace curveq
