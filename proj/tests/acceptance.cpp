// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. The Monte Carlo criteria check simulated operating
// characteristics of the two equivalence tests against frozen reference
// values at 2000 replications with fixed seeds.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "curveq/curveq.hpp"

using namespace curveq;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s  (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* spec, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), spec, a, b, c, d);
    return buf;
}

SimSummary curve_study(double delta1, double sigma2, int n, double alpha, double margin,
                       std::uint64_t seed, int reps = 2000) {
    ScenarioOptions opt;
    opt.delta1 = delta1;
    opt.sigma2 = sigma2;
    opt.n_per_group = n;
    const ScenarioSpec s = make_scenario("scenario1", opt);
    StudyConfig config;
    config.replications = reps;
    config.alpha = alpha;
    config.kind = StudyKind::curve_max_diff;
    config.margin = margin;
    config.seed = seed;
    return run_study(s, config);
}

// --- criterion 1: coverage and size for the linear/quadratic comparison ---

void criterion_1() {
    struct Cell {
        double delta1, sigma2;
        // coverage at (alpha=.05, n=30), (.05, 150), (.1, 30), (.1, 150)
        double cov[4];
        // size at the same four cells
        double t1e[4];
    };
    // reference operating characteristics for the linear-vs-quadratic pair
    const Cell cells[] = {
        {1, 1, {0.987, 0.950, 0.953, 0.906}, {0.012, 0.050, 0.046, 0.095}},
        {2, 2, {0.960, 0.951, 0.913, 0.901}, {0.039, 0.048, 0.079, 0.095}},
        {3, 1, {0.951, 0.954, 0.906, 0.908}, {0.053, 0.048, 0.102, 0.100}},
        {3, 3, {0.949, 0.952, 0.900, 0.903}, {0.052, 0.049, 0.098, 0.099}},
    };

    const auto start = std::chrono::steady_clock::now();
    bool pass = true;
    std::string worst;
    double worst_gap = -1.0;
    std::uint64_t seed = 4200;
    for (const Cell& cell : cells) {
        int k = 0;
        for (double alpha : {0.05, 0.10}) {
            for (int n : {30, 150}) {
                const SimSummary r =
                    curve_study(cell.delta1, cell.sigma2, n, alpha, cell.delta1, ++seed);
                const double cov_gap = std::abs(*r.coverage - cell.cov[k]);
                const bool cov_ok = cov_gap <= 0.02;
                const bool size_ok = *r.rejection_rate <= alpha + 0.015;
                if (!cov_ok || !size_ok) pass = false;
                if (cov_gap > worst_gap) {
                    worst_gap = cov_gap;
                    worst = fmt("worst cell d1=%.0f s2=%.0f", cell.delta1, cell.sigma2) +
                            fmt(" a=%.2f n=%.0f", alpha, n) +
                            fmt(": cov %.3f vs %.3f, size %.3f", *r.coverage, cell.cov[k],
                                *r.rejection_rate);
                }
                ++k;
            }
        }
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed >= 300.0) pass = false;
    report(1, "coverage/size of the curve test, linear vs quadratic", pass,
           worst + fmt("; 32 studies in %.1f s", elapsed));
}

// --- criterion 2: the most conservative emax pair ---

void criterion_2() {
    ScenarioOptions opt;
    opt.sigma2 = 1.0;
    opt.n_per_group = 150;
    const ScenarioSpec s = make_scenario("scenario2-h1", opt);
    bool pass = true;
    std::string detail;
    std::uint64_t seed = 4300;
    for (double alpha : {0.05, 0.10}) {
        StudyConfig config;
        config.replications = 2000;
        config.alpha = alpha;
        config.kind = StudyKind::curve_max_diff;
        config.margin = s.true_max_diff;
        config.seed = ++seed;
        const SimSummary r = run_study(s, config);
        if (!(*r.coverage >= 0.995) || !(*r.rejection_rate <= 0.005)) pass = false;
        detail += fmt("a=%.2f cov=%.4f size=%.4f ", alpha, *r.coverage, *r.rejection_rate);
    }
    report(2, "deeply conservative regime of the closest emax pair", pass, detail);
}

// --- criterion 3: power of the curve test ---

void criterion_3() {
    const SimSummary high = curve_study(0.0, 1.0, 150, 0.05, 1.0, 4401);
    const SimSummary mid = curve_study(0.75, 1.0, 150, 0.05, 1.0, 4402);
    const bool pass =
        *high.rejection_rate >= 0.99 && std::abs(*mid.rejection_rate - 0.444) <= 0.04;
    report(3, "power of the curve test at margin 1", pass,
           fmt("power(d1=0)=%.4f (need >=0.99), power(d1=0.75)=%.4f (ref 0.444+-0.04)",
               *high.rejection_rate, *mid.rejection_rate));
}

// --- criterion 4: size of the MED test across six configurations ---

void criterion_4() {
    bool pass = true;
    double worst_gap = -1.0;
    std::string worst;
    std::uint64_t seed = 4500;
    for (double alpha : {0.05, 0.10}) {
        for (double delta1 : {1.0, 2.0, 3.0}) {
            for (double sigma2 : {1.0, 2.0}) {
                ScenarioOptions opt;
                opt.delta1 = delta1;
                opt.sigma2 = sigma2;
                opt.n_per_group = 150;
                opt.delta_clinical = 1.0;
                const ScenarioSpec s = make_scenario("scenario3", opt);
                const SimSummary r =
                    run_size_power_study(s, 2000, alpha, 0.0, StudyKind::med_diff, ++seed);
                const double gap = std::abs(*r.rejection_rate - alpha);
                if (gap > 0.015) pass = false;
                if (gap > worst_gap) {
                    worst_gap = gap;
                    worst = fmt("worst: d1=%.0f s2=%.0f a=%.2f rate=%.4f", delta1, sigma2,
                                alpha, *r.rejection_rate);
                }
            }
        }
    }
    report(4, "size of the MED test at the null boundary (eta = 0)", pass, worst);
}

// --- criterion 5: power of the MED test ---

void criterion_5() {
    ScenarioOptions opt;
    opt.delta1 = 1.0;
    opt.sigma2 = 1.0;
    opt.n_per_group = 150;
    opt.delta_clinical = 1.0;
    const ScenarioSpec s = make_scenario("scenario3", opt);
    const SimSummary high = run_size_power_study(s, 2000, 0.05, 0.5, StudyKind::med_diff, 4601);
    const SimSummary mid = run_size_power_study(s, 2000, 0.05, 0.2, StudyKind::med_diff, 4602);
    const bool pass =
        *high.rejection_rate >= 0.99 && std::abs(*mid.rejection_rate - 0.641) <= 0.04;
    report(5, "power of the MED test for the shifted emax pair", pass,
           fmt("power(eta=0.5)=%.4f (need >=0.99), power(eta=0.2)=%.4f (ref 0.641+-0.04)",
               *high.rejection_rate, *mid.rejection_rate));
}

// --- criterion 6: the critical constant ---

void criterion_6() {
    const double c = critical_constant(0.3, 0.119, 0.05);
    bool pass = (c >= 0.100 && c <= 0.106);

    double max_residual = 0.0;
    int points = 0;
    for (double eta : {0.0, 0.1, 0.3, 0.7, 1.5}) {
        for (double tau : {0.02, 0.119, 0.4, 1.0, 3.0}) {
            for (double alpha : {0.01, 0.05, 0.1, 0.25}) {
                const double ci = critical_constant(eta, tau, alpha);
                const double residual = std::abs(
                    normal_cdf((ci - eta) / tau) - normal_cdf((-ci - eta) / tau) - alpha);
                max_residual = std::max(max_residual, residual);
                ++points;
            }
        }
    }
    if (max_residual >= 1e-10) pass = false;
    report(6, "critical constant of the MED test", pass,
           fmt("c(0.3,0.119,0.05)=%.6f in [0.100,0.106]; max residual %.2e over %.0f pts", c,
               max_residual, static_cast<double>(points)));
}

// --- criterion 7: MED confidence interval arithmetic ---

void criterion_7() {
    const auto [lo, hi] = med_ci(-0.103, 0.119, 0.05);
    const bool pass = std::abs(lo - (-0.338)) <= 0.005 && std::abs(hi - 0.133) <= 0.005;
    report(7, "MED confidence interval arithmetic", pass,
           fmt("ci=(%.4f, %.4f) vs reference (-0.338, 0.133) within 0.005", lo, hi));
}

// --- criterion 8: delta-method standard errors against Monte Carlo ---

void criterion_8() {
    // rho at dose 2 for the linear/quadratic pair
    double rho_mean = 0.0, diff_sum = 0.0, diff_sum2 = 0.0;
    int completed = 0;
    {
        ScenarioOptions opt;
        opt.delta1 = 1.0;
        opt.sigma2 = 1.0;
        opt.n_per_group = 150;
        const ScenarioSpec s = make_scenario("scenario1", opt);
        for (int rep = 0; rep < 2000; ++rep) {
            RngStream rng(4700, static_cast<std::uint64_t>(rep));
            auto [g1, g2] = generate_data(s, rng);
            try {
                const FitResult f1 = fit(g1, s.family1);
                const FitResult f2 = fit(g2, s.family2);
                const double diff = evaluate(f2.family, f2.theta, 2.0) -
                                    evaluate(f1.family, f1.theta, 2.0);
                rho_mean += rho_hat(f1, f2, 2.0);
                diff_sum += diff;
                diff_sum2 += diff * diff;
                ++completed;
            } catch (const Error&) {
            }
        }
    }
    rho_mean /= completed;
    const double mc_sd_diff = std::sqrt(
        (diff_sum2 - diff_sum * diff_sum / completed) / (completed - 1));
    const double rho_rel = std::abs(rho_mean - mc_sd_diff) / mc_sd_diff;

    // tau for the shifted emax pair
    double tau_mean = 0.0, med_sum = 0.0, med_sum2 = 0.0;
    int med_completed = 0;
    {
        ScenarioOptions opt;
        opt.delta1 = 1.0;
        opt.sigma2 = 1.0;
        opt.n_per_group = 150;
        opt.delta_clinical = 1.0;
        const ScenarioSpec s = make_scenario("scenario3", opt);
        for (int rep = 0; rep < 2000; ++rep) {
            RngStream rng(4800, static_cast<std::uint64_t>(rep));
            auto [g1, g2] = generate_data(s, rng);
            try {
                const FitResult f1 = fit(g1, s.family1);
                const FitResult f2 = fit(g2, s.family2);
                const MedEstimate m1 = estimate_med(f1, 1.0);
                const MedEstimate m2 = estimate_med(f2, 1.0);
                if (!m1.attainable || !m2.attainable) continue;
                tau_mean += tau_hat(f1, f2, 1.0);
                const double diff = m1.med - m2.med;
                med_sum += diff;
                med_sum2 += diff * diff;
                ++med_completed;
            } catch (const Error&) {
            }
        }
    }
    tau_mean /= med_completed;
    const double mc_sd_med = std::sqrt(
        (med_sum2 - med_sum * med_sum / med_completed) / (med_completed - 1));
    const double tau_rel = std::abs(tau_mean - mc_sd_med) / mc_sd_med;

    const bool pass = rho_rel <= 0.10 && tau_rel <= 0.10;
    report(8, "delta-method standard errors match Monte Carlo dispersion", pass,
           fmt("rho: mean %.4f vs MC sd %.4f (%.1f%%); ", rho_mean, mc_sd_diff,
               100.0 * rho_rel) +
               fmt("tau: mean %.4f vs MC sd %.4f (%.1f%%)", tau_mean, mc_sd_med,
                   100.0 * tau_rel));
}

// --- criterion 9: analytic gradients against central differences ---

void criterion_9() {
    RngStream rng(4900, 0);
    auto unif = [&](double lo, double hi) { return lo + (hi - lo) * rng.next_uniform(); };
    const ModelFamily families[] = {ModelFamily::linear, ModelFamily::quadratic,
                                    ModelFamily::emax, ModelFamily::logistic,
                                    ModelFamily::exponential};
    int checked = 0;
    double worst = 0.0;
    for (int draw = 0; draw < 1000; ++draw) {
        const ModelFamily family = families[draw % 5];
        Params theta;
        double d = 0.0;
        switch (family) {
            case ModelFamily::linear:
                theta = {unif(-5, 5), unif(-5, 5)};
                d = unif(0, 10);
                break;
            case ModelFamily::quadratic:
                theta = {unif(-5, 5), unif(-5, 5), unif(-2, 2)};
                d = unif(0, 5);
                break;
            case ModelFamily::emax: {
                const double ed50 = unif(0.2, 10.0);
                theta = {unif(-5, 5), unif(-5, 5), ed50};
                d = unif(0, 4.0 * ed50);
                break;
            }
            case ModelFamily::logistic:
                theta = {unif(-5, 5), unif(-5, 5), unif(0, 5), unif(0.3, 5)};
                d = unif(0, 10);
                break;
            case ModelFamily::exponential: {
                const double rate = unif(0.5, 10.0);
                theta = {unif(-5, 5), unif(-5, 5), rate};
                d = unif(0, 2.0 * rate);
                break;
            }
        }
        const Params analytic = gradient(family, theta, d);
        for (size_t j = 0; j < theta.size(); ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(theta[j]));
            Params up = theta, down = theta;
            up[j] += h;
            down[j] -= h;
            const double numeric =
                (evaluate(family, up, d) - evaluate(family, down, d)) / (2.0 * h);
            const double rel =
                std::abs(analytic[j] - numeric) / std::max(1.0, std::abs(analytic[j]));
            worst = std::max(worst, rel);
        }
        ++checked;
    }
    report(9, "analytic gradients agree with central differences", worst <= 1e-5,
           fmt("%.0f randomized draws, worst relative gap %.2e", static_cast<double>(checked),
               worst));
}

// --- criterion 10: a regenerated seven-arm trial runs end to end ---

void criterion_10() {
    // Two emax regimens over [0,1]; the placebo arm is shared by both groups.
    // Reference numbers for this design came from a dataset that is not
    // available, so the pipeline is validated for completion and qualitative
    // band shape instead. The realization is pinned: this design is weakly
    // identified, and a sizeable fraction of realizations have no interior
    // three-parameter optimum (the fit then reports rank deficiency, which
    // is exercised in the unit tests).
    const Params theta1{0.03, -5.17, 7.94};
    const Params theta2{-0.09, -6.56, 31.24};
    const double sigma = 1.0;
    const int per_arm = 50;

    RngStream rng(5003, 0);
    GroupDataset g1, g2;
    g1.label = "od";
    g2.label = "bid";
    std::vector<double> placebo(per_arm);
    for (auto& y : placebo) y = theta1[0] + sigma * rng.next_normal();
    for (double y : placebo) {
        g1.add_observation(0.0, y);
        g2.add_observation(0.0, y);
    }
    for (double dose : {0.033, 0.1, 1.0})
        for (int i = 0; i < per_arm; ++i)
            g1.add_observation(dose, evaluate(ModelFamily::emax, theta1, dose) +
                                         sigma * rng.next_normal());
    for (double dose : {0.067, 0.3, 1.0})
        for (int i = 0; i < per_arm; ++i)
            g2.add_observation(dose, evaluate(ModelFamily::emax, theta2, dose) +
                                         sigma * rng.next_normal());

    bool pass = true;
    std::string detail;
    try {
        const FitResult f1 = fit(g1, ModelFamily::emax);
        const FitResult f2 = fit(g2, ModelFamily::emax);
        const DoseRange range{0.0, 1.0, 1001};
        const BandResult b = band(f1, f2, range, 0.10);
        const BandResult adj = band(f1, f2, range, 0.10, true);

        double max_abs_diff = 0.0;
        for (size_t i = 0; i < b.grid.size(); ++i) {
            if (!std::isfinite(b.upper[i]) || !std::isfinite(b.lower[i])) pass = false;
            if (std::abs((b.upper[i] - b.diff[i]) - (b.diff[i] - b.lower[i])) > 1e-12)
                pass = false;
            max_abs_diff = std::max(max_abs_diff, std::abs(b.diff[i]));
        }
        if (!(b.ci_for_max_abs >= max_abs_diff)) pass = false;
        if (!(b.max_upper_dose >= 0.0 && b.max_upper_dose <= 1.0)) pass = false;
        if (!(adj.upper.front() == 0.0 && adj.lower.front() == 0.0)) pass = false;
        const CurveTestResult t = test_curves(b, 3.0);
        detail = fmt("bounds [%.3f, %.3f], extrema at d=%.3f/d=%.3f, ", b.min_lower_value,
                     b.max_upper_value, b.min_lower_dose, b.max_upper_dose) +
                 std::string(t.reject ? "margin 3 rejects" : "margin 3 retains") +
                 "; reference per-trial numbers depend on data that is unavailable";
    } catch (const Error& e) {
        pass = false;
        detail = std::string("pipeline error: ") + e.what();
    }
    report(10, "regenerated seven-arm trial completes with a well-formed band", pass, detail);
}

} // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d of 10 criteria passed in %.1f s\n", 10 - failures, elapsed);
    return failures == 0 ? 0 : 1;
}
