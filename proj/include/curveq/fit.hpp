#pragma once

// Nonlinear least squares per group: damped Gauss-Newton (Levenberg-Marquardt)
// with analytic Jacobians, profiled-OLS starting values, residual variance and
// the normalized information matrix
//
//   Sigma_hat = sum_i (n_i / n) g_i g_i',   g_i = dm/dtheta(theta_hat, d_i),
//
// whose scaled inverse (sigma2_hat / n) Sigma_hat^{-1} estimates the
// covariance of theta_hat.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "curveq/data.hpp"
#include "curveq/error.hpp"
#include "curveq/linalg.hpp"
#include "curveq/models.hpp"

namespace curveq {

enum class VarianceDivisor { n_minus_p, n };

struct FitOptions {
    std::optional<Params> start;
    int max_iterations = 200;
    double rss_rel_tol = 1e-10;   // stop when the relative RSS change drops below this
    double grad_tol = 1e-8;       // or when ||grad RSS|| drops below this
    VarianceDivisor divisor = VarianceDivisor::n_minus_p;
};

struct FitResult {
    ModelFamily family = ModelFamily::linear;
    Params theta;          // least-squares estimate
    double sigma2 = 0.0;   // residual variance, RSS / (n - p) by default
    SymMatrix info;        // normalized information matrix Sigma_hat
    int n_total = 0;
    bool converged = false;
    double rss = 0.0;
    int iterations = 0;
    double grad_norm = 0.0;
    std::string label;
};

namespace detail {

inline double rss_of(const GroupDataset& data, ModelFamily family,
                     std::span<const double> theta) {
    double rss = 0.0;
    for (size_t i = 0; i < data.dose_levels.size(); ++i) {
        const double m = evaluate(family, theta, data.dose_levels[i]);
        for (double y : data.responses[i]) {
            const double r = y - m;
            rss += r * r;
        }
    }
    return rss;
}

inline bool params_valid(ModelFamily family, std::span<const double> theta) {
    for (double v : theta)
        if (!std::isfinite(v)) return false;
    if (family == ModelFamily::emax && !(theta[2] > 0.0)) return false;
    if (family == ModelFamily::logistic && theta[3] == 0.0) return false;
    if (family == ModelFamily::exponential && theta[2] == 0.0) return false;
    return true;
}

// Ordinary least squares on caller-supplied regressor columns; the families
// that are linear in all or a subset of their parameters reuse this.
template <typename RegressorFn>
inline std::optional<Params> profiled_ols(const GroupDataset& data, int p, RegressorFn&& basis) {
    SymMatrix xtx(p);
    std::array<double, kMaxParams> xty{};
    std::array<double, kMaxParams> x{};
    for (size_t i = 0; i < data.dose_levels.size(); ++i) {
        basis(data.dose_levels[i], x.data());
        const double ni = static_cast<double>(data.responses[i].size());
        double ysum = 0.0;
        for (double y : data.responses[i]) ysum += y;
        for (int a = 0; a < p; ++a) {
            for (int b = 0; b < p; ++b) xtx(a, b) += ni * x[a] * x[b];
            xty[a] += x[a] * ysum;
        }
    }
    std::array<double, kMaxParams> beta{};
    if (!solve_spd(xtx, xty.data(), beta.data())) return std::nullopt;
    return Params(beta.begin(), beta.begin() + p);
}

// Candidate starting values. Linear-in-parameter families use plain OLS; the
// nonlinear families profile their linear parameters over a grid of the
// nonlinear ones, lowest candidate RSS first, ties broken by smaller theta.
inline Params starting_values(const GroupDataset& data, ModelFamily family) {
    const double dmin = data.dose_levels.front();
    const double dmax = data.dose_levels.back();
    const double width = std::max(dmax - dmin, 1e-12);

    std::vector<Params> candidates;
    switch (family) {
        case ModelFamily::linear: {
            auto ols = profiled_ols(data, 2, [](double d, double* x) {
                x[0] = 1.0;
                x[1] = d;
            });
            if (ols) candidates.push_back(*ols);
            break;
        }
        case ModelFamily::quadratic: {
            auto ols = profiled_ols(data, 3, [](double d, double* x) {
                x[0] = 1.0;
                x[1] = d;
                x[2] = d * d;
            });
            if (ols) candidates.push_back(*ols);
            break;
        }
        case ModelFamily::emax: {
            for (double scale : {0.1, 0.5, 1.0, 2.0}) {
                const double ed50 = scale * width;
                auto ols = profiled_ols(data, 2, [ed50](double d, double* x) {
                    x[0] = 1.0;
                    x[1] = d / (ed50 + d);
                });
                if (ols) candidates.push_back({(*ols)[0], (*ols)[1], ed50});
            }
            break;
        }
        case ModelFamily::logistic: {
            for (double pos : {0.25, 0.5, 0.75}) {
                for (double sc : {0.1, 0.25, 0.5}) {
                    const double mid = dmin + pos * width;
                    const double slope = sc * width;
                    auto ols = profiled_ols(data, 2, [mid, slope](double d, double* x) {
                        x[0] = 1.0;
                        x[1] = 1.0 / (1.0 + std::exp((mid - d) / slope));
                    });
                    if (ols) candidates.push_back({(*ols)[0], (*ols)[1], mid, slope});
                }
            }
            break;
        }
        case ModelFamily::exponential: {
            for (double scale : {0.1, 0.5, 1.0, 2.0}) {
                const double rate = scale * width;
                auto ols = profiled_ols(data, 2, [rate](double d, double* x) {
                    x[0] = 1.0;
                    x[1] = std::expm1(d / rate);
                });
                if (ols) candidates.push_back({(*ols)[0], (*ols)[1], rate});
            }
            break;
        }
    }

    if (candidates.empty())
        throw RankDeficiencyError("fit '" + data.label + "' (" + std::string(family_name(family)) +
                                  "): singular design, no valid starting value");

    const Params* best = nullptr;
    double best_rss = 0.0;
    for (const auto& c : candidates) {
        if (!params_valid(family, c)) continue;
        const double rss = rss_of(data, family, c);
        if (!std::isfinite(rss)) continue;
        if (best == nullptr || rss < best_rss || (rss == best_rss && c < *best)) {
            best = &c;
            best_rss = rss;
        }
    }
    if (best == nullptr)
        throw RankDeficiencyError("fit '" + data.label + "' (" + std::string(family_name(family)) +
                                  "): no finite starting value");
    return *best;
}

} // namespace detail

// Normalized information matrix at theta: sum_i (n_i/n) g_i g_i'.
inline SymMatrix information_matrix(const GroupDataset& data, ModelFamily family,
                                    std::span<const double> theta) {
    const int p = param_count(family);
    const double n = static_cast<double>(data.n_total());
    SymMatrix info(p);
    std::array<double, kMaxParams> g{};
    for (size_t i = 0; i < data.dose_levels.size(); ++i) {
        gradient(family, theta, data.dose_levels[i], g.data());
        const double w = static_cast<double>(data.responses[i].size()) / n;
        for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) info(a, b) += w * g[a] * g[b];
    }
    return info;
}

inline FitResult fit(const GroupDataset& data, ModelFamily family, const FitOptions& options = {}) {
    data.validate();
    const int p = param_count(family);
    if (data.dose_count() < p)
        throw DomainError("fit '" + data.label + "': " + std::to_string(data.dose_count()) +
                          " dose levels cannot identify " + std::to_string(p) + " " +
                          std::string(family_name(family)) + " parameters");

    Params theta = options.start ? *options.start : detail::starting_values(data, family);
    if (static_cast<int>(theta.size()) != p)
        throw DomainError("fit '" + data.label + "': starting value has wrong length");
    if (!detail::params_valid(family, theta))
        throw DomainError("fit '" + data.label + "': starting value outside the valid range");

    const int n = data.n_total();
    double rss = detail::rss_of(data, family, theta);
    double lambda = 1e-3;
    double grad_norm = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iter = 0;

    std::array<double, kMaxParams> g{}, jtr{}, step{};
    for (; iter < options.max_iterations; ++iter) {
        // Gauss-Newton pieces from dose-level sums: A = J'J, jtr = J'r.
        SymMatrix jtj(p);
        jtr.fill(0.0);
        for (size_t i = 0; i < data.dose_levels.size(); ++i) {
            const double d = data.dose_levels[i];
            const double m = evaluate(family, theta, d);
            gradient(family, theta, d, g.data());
            const double ni = static_cast<double>(data.responses[i].size());
            double rsum = 0.0;
            for (double y : data.responses[i]) rsum += y - m;
            for (int a = 0; a < p; ++a) {
                for (int b = 0; b < p; ++b) jtj(a, b) += ni * g[a] * g[b];
                jtr[a] += g[a] * rsum;
            }
        }

        grad_norm = 0.0;
        for (int a = 0; a < p; ++a) grad_norm += 4.0 * jtr[a] * jtr[a];
        grad_norm = std::sqrt(grad_norm);  // ||grad RSS|| = ||2 J'r||
        if (grad_norm < options.grad_tol) {
            converged = true;
            break;
        }

        bool accepted = false;
        while (lambda <= 1e12) {
            SymMatrix damped = jtj;
            for (int a = 0; a < p; ++a)
                damped(a, a) += lambda * std::max(jtj(a, a), 1e-12);
            if (!solve_spd(damped, jtr.data(), step.data())) {
                lambda *= 4.0;
                continue;
            }
            Params candidate = theta;
            for (int a = 0; a < p; ++a) candidate[a] += step[a];
            if (!detail::params_valid(family, candidate)) {
                lambda *= 4.0;
                continue;
            }
            double candidate_rss;
            try {
                candidate_rss = detail::rss_of(data, family, candidate);
            } catch (const DomainError&) {
                lambda *= 4.0;
                continue;
            }
            if (!std::isfinite(candidate_rss) || candidate_rss > rss) {
                lambda *= 4.0;
                continue;
            }
            const double rel_change = (rss - candidate_rss) / std::max(rss, 1.0);
            theta = std::move(candidate);
            rss = candidate_rss;
            lambda = std::max(lambda / 3.0, 1e-12);
            accepted = true;
            if (rel_change < options.rss_rel_tol) converged = true;
            break;
        }
        if (!accepted) {
            // No downhill step available: converged only if the gradient says so.
            converged = grad_norm < options.grad_tol;
            break;
        }
        if (converged) break;
    }

    FitResult result;
    result.family = family;
    result.theta = theta;
    result.n_total = n;
    result.converged = converged;
    result.rss = rss;
    result.iterations = iter;
    result.grad_norm = grad_norm;
    result.label = data.label;
    const int divisor = (options.divisor == VarianceDivisor::n_minus_p) ? n - p : n;
    if (divisor <= 0)
        throw DomainError("fit '" + data.label + "': sample size too small for the variance divisor");
    result.sigma2 = rss / static_cast<double>(divisor);
    result.info = information_matrix(data, family, theta);

    SymMatrix probe;
    if (!detail::cholesky(result.info, probe))
        throw RankDeficiencyError("fit '" + data.label + "' (" + std::string(family_name(family)) +
                                  "): singular information matrix at the estimate");
    return result;
}

// Covariance estimate of theta_hat: (sigma2_hat / n) Sigma_hat^{-1}.
inline SymMatrix covariance_of_estimate(const FitResult& fit) {
    SymMatrix cov = invert_spd(fit.info, "information matrix");
    const double scale = fit.sigma2 / static_cast<double>(fit.n_total);
    for (int i = 0; i < cov.n; ++i)
        for (int j = 0; j < cov.n; ++j) cov(i, j) *= scale;
    return cov;
}

} // namespace curveq
