#pragma once

// Distribution functions used throughout: standard normal CDF/quantile and
// Student t CDF/quantile. Self-contained double-precision implementations.

#include <cmath>
#include <limits>

#include "curveq/error.hpp"

namespace curveq {

// Standard normal CDF, accurate to machine precision via erfc.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

inline double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779399461;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

// Standard normal quantile, Wichura's PPND16 rational approximation
// (algorithm AS 241), absolute error below 1e-15 over (0,1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("normal_quantile: p must lie strictly in (0,1)");

    const double q = p - 0.5;
    double r;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }

    r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        value = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        value = num / den;
    }
    return (q < 0.0) ? -value : value;
}

namespace detail {

// Regularized incomplete beta I_x(a,b) via Lentz's continued fraction.
inline double incomplete_beta_cf(double x, double a, double b) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-15;
    constexpr int max_iter = 500;

    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;

    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;

        aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

inline double regularized_incomplete_beta(double x, double a, double b) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) -
                                  (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * incomplete_beta_cf(x, a, b) / a;
    return 1.0 - front * incomplete_beta_cf(1.0 - x, b, a) / b;
}

} // namespace detail

inline double student_t_pdf(double x, double df) {
    if (!(df > 0.0)) throw DomainError("student_t_pdf: df must be positive");
    return std::exp(std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                    0.5 * std::log(df * M_PI) -
                    0.5 * (df + 1.0) * std::log1p(x * x / df));
}

inline double student_t_cdf(double x, double df) {
    if (!(df > 0.0)) throw DomainError("student_t_cdf: df must be positive");
    const double ib = detail::regularized_incomplete_beta(df / (df + x * x), 0.5 * df, 0.5);
    return (x >= 0.0) ? 1.0 - 0.5 * ib : 0.5 * ib;
}

// Student t quantile: safeguarded Newton on the CDF starting from the normal
// quantile, with a bisection bracket for robustness at small df.
inline double student_t_quantile(double p, double df) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("student_t_quantile: p must lie strictly in (0,1)");
    if (!(df > 0.0)) throw DomainError("student_t_quantile: df must be positive");

    double lo = -1.0, hi = 1.0;
    while (student_t_cdf(lo, df) > p) lo *= 2.0;
    while (student_t_cdf(hi, df) < p) hi *= 2.0;

    double x = normal_quantile(p);
    if (x < lo || x > hi) x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 100; ++iter) {
        const double f = student_t_cdf(x, df) - p;
        if (f > 0.0) hi = x; else lo = x;
        const double deriv = student_t_pdf(x, df);
        double next = (deriv > 0.0) ? x - f / deriv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-14 * std::max(1.0, std::abs(x))) return next;
        x = next;
    }
    return x;
}

// Binomial standard error of an estimated proportion.
inline double proportion_standard_error(double p, long n) {
    if (n <= 0) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

} // namespace curveq
