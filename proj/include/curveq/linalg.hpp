#pragma once

// Small dense symmetric matrices (models have at most 4 parameters).
// Cholesky-based solve/inverse with explicit singularity detection.

#include <array>
#include <cmath>
#include <cstring>
#include <span>

#include "curveq/error.hpp"

namespace curveq {

inline constexpr int kMaxParams = 4;

struct SymMatrix {
    int n = 0;
    std::array<double, kMaxParams * kMaxParams> a{};

    SymMatrix() = default;
    explicit SymMatrix(int dim) : n(dim) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * kMaxParams + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * kMaxParams + j]; }

    static SymMatrix identity(int dim) {
        SymMatrix m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    double max_abs_diag() const {
        double mx = 0.0;
        for (int i = 0; i < n; ++i) mx = std::max(mx, std::abs((*this)(i, i)));
        return mx;
    }
};

namespace detail {

// Lower Cholesky factor; returns false when a pivot falls below
// rel_tol * max diagonal (rank deficient within tolerance).
inline bool cholesky(const SymMatrix& m, SymMatrix& lower, double rel_tol = 1e-12) {
    const int n = m.n;
    lower = SymMatrix(n);
    const double floor = rel_tol * std::max(m.max_abs_diag(), 1e-300);
    for (int j = 0; j < n; ++j) {
        double diag = m(j, j);
        for (int k = 0; k < j; ++k) diag -= lower(j, k) * lower(j, k);
        if (!(diag > floor)) return false;
        lower(j, j) = std::sqrt(diag);
        for (int i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            lower(i, j) = s / lower(j, j);
        }
    }
    return true;
}

inline void solve_with_factor(const SymMatrix& lower, const double* b, double* x) {
    const int n = lower.n;
    std::array<double, kMaxParams> y{};
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= lower(i, k) * y[k];
        y[i] = s / lower(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= lower(k, i) * x[k];
        x[i] = s / lower(i, i);
    }
}

} // namespace detail

// Solves A x = b for symmetric positive definite A. Returns false when A is
// singular within tolerance.
inline bool solve_spd(const SymMatrix& m, const double* b, double* x) {
    SymMatrix lower;
    if (!detail::cholesky(m, lower)) return false;
    detail::solve_with_factor(lower, b, x);
    return true;
}

// Inverse of a symmetric positive definite matrix; throws on rank deficiency.
inline SymMatrix invert_spd(const SymMatrix& m, const char* what = "matrix") {
    SymMatrix lower;
    if (!detail::cholesky(m, lower))
        throw RankDeficiencyError(std::string("singular ") + what +
                                  ": Cholesky pivot below tolerance");
    SymMatrix inv(m.n);
    std::array<double, kMaxParams> e{}, col{};
    for (int j = 0; j < m.n; ++j) {
        e.fill(0.0);
        e[j] = 1.0;
        detail::solve_with_factor(lower, e.data(), col.data());
        for (int i = 0; i < m.n; ++i) inv(i, j) = col[i];
    }
    // Symmetrize away round-off.
    for (int i = 0; i < m.n; ++i)
        for (int j = i + 1; j < m.n; ++j) {
            const double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = v;
            inv(j, i) = v;
        }
    return inv;
}

// g' M g for symmetric M.
inline double quadratic_form(const SymMatrix& m, const double* g) {
    double q = 0.0;
    for (int i = 0; i < m.n; ++i) {
        double row = 0.0;
        for (int j = 0; j < m.n; ++j) row += m(i, j) * g[j];
        q += g[i] * row;
    }
    return q;
}

} // namespace curveq
