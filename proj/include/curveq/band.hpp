#pragma once

// Delta-method pointwise confidence bounds on the difference curve
// m2(theta2, d) - m1(theta1, d), the induced interval for the maximum
// absolute difference, and the curve equivalence test:
//
//   rho2(d) = (s1^2/n1) g1' S1^-1 g1 + (s2^2/n2) g2' S2^-1 g2
//   U(d)    = diff(d) + q * rho(d),  L(d) = diff(d) - q * rho(d)
//   reject  <=> -delta < min L  and  max U < delta.
//
// The placebo-adjusted variant replaces the difference by
// (m2(d)-m2(0)) - (m1(d)-m1(0)) and each gradient by g(d) - g(0).

#include <array>
#include <cmath>
#include <vector>

#include "curveq/error.hpp"
#include "curveq/fit.hpp"
#include "curveq/linalg.hpp"
#include "curveq/models.hpp"
#include "curveq/stats.hpp"

namespace curveq {

enum class QuantileSource { normal, student_t };

namespace detail {

struct GroupDelta {
    const FitResult* fit;
    SymMatrix info_inv;
    double weight;  // sigma2_hat / n
    std::array<double, kMaxParams> g0{};

    GroupDelta(const FitResult& f, bool placebo_adjusted) : fit(&f) {
        info_inv = invert_spd(f.info, "information matrix");
        weight = f.sigma2 / static_cast<double>(f.n_total);
        if (placebo_adjusted) gradient(f.family, f.theta, 0.0, g0.data());
    }

    // Contribution of this group to rho2 at dose d.
    double variance_at(double d, bool placebo_adjusted) const {
        std::array<double, kMaxParams> g{};
        gradient(fit->family, fit->theta, d, g.data());
        if (placebo_adjusted)
            for (int i = 0; i < info_inv.n; ++i) g[i] -= g0[i];
        return weight * quadratic_form(info_inv, g.data());
    }
};

} // namespace detail

// Delta-method standard error of m2(theta2_hat, d) - m1(theta1_hat, d).
inline double rho_hat(const FitResult& fit1, const FitResult& fit2, double d,
                      bool placebo_adjusted = false) {
    detail::GroupDelta g1(fit1, placebo_adjusted), g2(fit2, placebo_adjusted);
    const double v = g1.variance_at(d, placebo_adjusted) + g2.variance_at(d, placebo_adjusted);
    return std::sqrt(std::max(v, 0.0));
}

struct BandResult {
    std::vector<double> grid;
    std::vector<double> diff;   // m2 - m1 on the grid
    std::vector<double> rho;    // standard error on the grid
    std::vector<double> upper;  // U
    std::vector<double> lower;  // L
    double max_upper_dose = 0.0;
    double max_upper_value = 0.0;
    double min_lower_dose = 0.0;
    double min_lower_value = 0.0;
    double ci_for_max_abs = 0.0;  // max(max U, -min L)
    double alpha = 0.0;
    bool placebo_adjusted = false;
    QuantileSource quantile = QuantileSource::normal;
    double quantile_value = 0.0;
};

inline BandResult band(const FitResult& fit1, const FitResult& fit2, const DoseRange& range,
                       double alpha, bool placebo_adjusted = false,
                       QuantileSource quantile = QuantileSource::normal) {
    range.validate();
    if (!(alpha > 0.0 && alpha < 0.5))
        throw ConfigError("band: alpha must lie in (0, 0.5)");
    if (placebo_adjusted) {
        // The adjusted contrast needs the placebo response of both fits.
        (void)evaluate(fit1.family, fit1.theta, 0.0);
        (void)evaluate(fit2.family, fit2.theta, 0.0);
    }

    BandResult out;
    out.alpha = alpha;
    out.placebo_adjusted = placebo_adjusted;
    out.quantile = quantile;
    if (quantile == QuantileSource::normal) {
        out.quantile_value = normal_quantile(1.0 - alpha);
    } else {
        const int df = fit1.n_total + fit2.n_total - param_count(fit1.family) -
                       param_count(fit2.family);
        if (df <= 0) throw ConfigError("band: nonpositive degrees of freedom for t quantile");
        out.quantile_value = student_t_quantile(1.0 - alpha, static_cast<double>(df));
    }

    detail::GroupDelta g1(fit1, placebo_adjusted), g2(fit2, placebo_adjusted);
    const double base1 = placebo_adjusted ? evaluate(fit1.family, fit1.theta, 0.0) : 0.0;
    const double base2 = placebo_adjusted ? evaluate(fit2.family, fit2.theta, 0.0) : 0.0;

    const size_t n = static_cast<size_t>(range.grid_points);
    out.grid.resize(n);
    out.diff.resize(n);
    out.rho.resize(n);
    out.upper.resize(n);
    out.lower.resize(n);

    size_t argmax_u = 0, argmin_l = 0;
    for (size_t i = 0; i < n; ++i) {
        const double d = range.dose_at(static_cast<int>(i));
        const double diff = (evaluate(fit2.family, fit2.theta, d) - base2) -
                            (evaluate(fit1.family, fit1.theta, d) - base1);
        const double v =
            g1.variance_at(d, placebo_adjusted) + g2.variance_at(d, placebo_adjusted);
        const double rho = std::sqrt(std::max(v, 0.0));
        out.grid[i] = d;
        out.diff[i] = diff;
        out.rho[i] = rho;
        out.upper[i] = diff + out.quantile_value * rho;
        out.lower[i] = diff - out.quantile_value * rho;
        if (out.upper[i] > out.upper[argmax_u]) argmax_u = i;  // first occurrence wins
        if (out.lower[i] < out.lower[argmin_l]) argmin_l = i;
    }

    out.max_upper_dose = out.grid[argmax_u];
    out.max_upper_value = out.upper[argmax_u];
    out.min_lower_dose = out.grid[argmin_l];
    out.min_lower_value = out.lower[argmin_l];
    out.ci_for_max_abs = std::max(out.max_upper_value, -out.min_lower_value);
    return out;
}

struct CurveTestResult {
    double delta = 0.0;  // equivalence margin in response units
    bool reject = false; // true: claim similarity
    BandResult band;
};

inline CurveTestResult test_curves(BandResult band_result, double delta) {
    if (!(delta > 0.0)) throw ConfigError("test_curves: margin delta must be positive");
    CurveTestResult out;
    out.delta = delta;
    out.reject = (-delta < band_result.min_lower_value) && (band_result.max_upper_value < delta);
    out.band = std::move(band_result);
    return out;
}

} // namespace curveq
