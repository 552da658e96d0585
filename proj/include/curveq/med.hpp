#pragma once

// Minimum effective dose inference. The MED of a strictly monotone curve for
// a clinically relevant effect Delta is
//
//   MED(theta) = m^{-1}(theta, m(theta, 0) + Delta),
//
// estimated by plugging in the least-squares estimate. Its delta-method
// variance uses the gradient of MED(theta), obtained from the implicit
// identity m(theta, MED(theta)) = m(theta, 0) + Delta:
//
//   dMED/dtheta = (g(0) - g(MED)) / m'(theta, MED),
//
// where g is the parameter gradient and m' the dose derivative. Dropping the
// g(0) term gives the fixed-target variant (the target response treated as a
// constant), kept available for sensitivity analysis.
//
// The equivalence test rejects |MED1 - MED2| >= eta when the estimated
// difference falls below the critical constant c solving
//
//   alpha = Phi((c - eta)/tau) - Phi((-c - eta)/tau).

#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "curveq/error.hpp"
#include "curveq/fit.hpp"
#include "curveq/linalg.hpp"
#include "curveq/models.hpp"
#include "curveq/stats.hpp"

namespace curveq {

enum class MedGradient { total, fixed_target };

struct MedEstimate {
    double med = std::numeric_limits<double>::quiet_NaN();
    double delta_clinical = 0.0;
    bool attainable = false;
};

inline MedEstimate estimate_med(const FitResult& fit, double delta_clinical) {
    if (delta_clinical == 0.0)
        throw ConfigError("estimate_med: clinically relevant effect must be nonzero");
    MedEstimate out;
    out.delta_clinical = delta_clinical;
    const double target = evaluate(fit.family, fit.theta, 0.0) + delta_clinical;
    try {
        out.med = inverse(fit.family, fit.theta, target);
        out.attainable = true;
    } catch (const NotAttainableError&) {
        out.attainable = false;
    }
    return out;
}

// Gradient of MED(theta) at the estimate; MED must be attainable.
inline Params med_gradient(const FitResult& fit, double delta_clinical,
                           MedGradient kind = MedGradient::total) {
    const MedEstimate med = estimate_med(fit, delta_clinical);
    if (!med.attainable)
        throw NotAttainableError("med_gradient: estimated MED is not attainable for '" +
                                 fit.label + "'");
    const int p = param_count(fit.family);
    const double slope = dose_derivative(fit.family, fit.theta, med.med);
    if (slope == 0.0)
        throw DomainError("med_gradient: zero dose derivative at the MED");
    Params g_med = gradient(fit.family, fit.theta, med.med);
    Params out(static_cast<size_t>(p));
    if (kind == MedGradient::total) {
        const Params g0 = gradient(fit.family, fit.theta, 0.0);
        for (int i = 0; i < p; ++i)
            out[i] = (g0[i] - g_med[i]) / slope;
    } else {
        for (int i = 0; i < p; ++i) out[i] = -g_med[i] / slope;
    }
    return out;
}

// Delta-method standard error of MED1_hat - MED2_hat.
inline double tau_hat(const FitResult& fit1, const FitResult& fit2, double delta_clinical,
                      MedGradient kind = MedGradient::total) {
    double tau2 = 0.0;
    for (const FitResult* fit : {&fit1, &fit2}) {
        const Params grad = med_gradient(*fit, delta_clinical, kind);
        const SymMatrix info_inv = invert_spd(fit->info, "information matrix");
        tau2 += fit->sigma2 / static_cast<double>(fit->n_total) *
                quadratic_form(info_inv, grad.data());
    }
    return std::sqrt(std::max(tau2, 0.0));
}

// Two-sided (1 - alpha) confidence interval for MED1 - MED2.
inline std::pair<double, double> med_ci(double diff_hat, double tau, double alpha) {
    if (!(tau >= 0.0)) throw DomainError("med_ci: tau must be nonnegative");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("med_ci: alpha must lie in (0,1)");
    const double half_width = normal_quantile(1.0 - 0.5 * alpha) * tau;
    return {diff_hat - half_width, diff_hat + half_width};
}

// Unique c > 0 with Phi((c-eta)/tau) - Phi((-c-eta)/tau) = alpha, found by a
// bracketed Newton iteration (the left side is strictly increasing in c).
inline double critical_constant(double eta, double tau, double alpha) {
    if (!(eta >= 0.0)) throw ConfigError("critical_constant: eta must be nonnegative");
    if (!(tau > 0.0)) throw DomainError("critical_constant: tau must be positive");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("critical_constant: alpha must lie in (0,1)");

    const auto f = [&](double c) {
        return normal_cdf((c - eta) / tau) - normal_cdf((-c - eta) / tau) - alpha;
    };
    const auto fprime = [&](double c) {
        return (normal_pdf((c - eta) / tau) + normal_pdf((-c - eta) / tau)) / tau;
    };

    double lo = 0.0;                    // f(0) = -alpha < 0
    double hi = eta + 10.0 * tau;
    while (f(hi) < 0.0) hi *= 2.0;

    double c = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double fc = f(c);
        if (std::abs(fc) < 1e-14) return c;
        if (fc > 0.0) hi = c; else lo = c;
        const double deriv = fprime(c);
        double next = (deriv > 0.0) ? c - fc / deriv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection fallback
        if (next == c) break;
        c = next;
    }
    return c;
}

struct MedInference {
    MedEstimate med1, med2;
    double diff_hat = 0.0;  // MED1_hat - MED2_hat
    double tau = 0.0;
    std::pair<double, double> ci{0.0, 0.0};
    double eta = 0.0;
    double c_critical = 0.0;
    bool reject = false;  // true: claim dose similarity
    double alpha = 0.0;
};

// Equivalence test for |MED1 - MED2| >= eta vs < eta. eta = 0 is accepted
// (the rejection region then collapses to |diff| < tau * z_{(1+alpha)/2}),
// which is useful for size studies at the boundary.
inline MedInference test_med(const MedEstimate& med1, const MedEstimate& med2, double tau,
                             double eta, double alpha) {
    if (!med1.attainable || !med2.attainable)
        throw NotAttainableError("test_med: both MED estimates must be attainable");
    MedInference out;
    out.med1 = med1;
    out.med2 = med2;
    out.diff_hat = med1.med - med2.med;
    out.tau = tau;
    out.eta = eta;
    out.alpha = alpha;
    out.ci = med_ci(out.diff_hat, tau, alpha);
    out.c_critical = critical_constant(eta, tau, alpha);
    out.reject = std::abs(out.diff_hat) < out.c_critical;
    return out;
}

// Full pipeline from two fits.
inline MedInference med_inference(const FitResult& fit1, const FitResult& fit2,
                                  double delta_clinical, double eta, double alpha,
                                  MedGradient kind = MedGradient::total) {
    const MedEstimate med1 = estimate_med(fit1, delta_clinical);
    const MedEstimate med2 = estimate_med(fit2, delta_clinical);
    if (!med1.attainable || !med2.attainable)
        throw NotAttainableError("med_inference: estimated MED not attainable in group '" +
                                 (med1.attainable ? fit2.label : fit1.label) + "'");
    return test_med(med1, med2, tau_hat(fit1, fit2, delta_clinical, kind), eta, alpha);
}

} // namespace curveq
