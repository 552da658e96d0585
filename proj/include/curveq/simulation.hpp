#pragma once

// Monte Carlo harness: scenario catalog, data generation, and coverage /
// size / power studies for the curve and MED equivalence tests.
//
// Data generation: Y = m(theta, d) + sigma * Z per observation, Z standard
// normal, drawn group 1 first, dose levels in order, replicates in order.
// Replication r uses RngStream(seed, r); studies are therefore reproducible
// bit for bit regardless of worker count.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "curveq/band.hpp"
#include "curveq/data.hpp"
#include "curveq/error.hpp"
#include "curveq/fit.hpp"
#include "curveq/med.hpp"
#include "curveq/models.hpp"
#include "curveq/rng.hpp"

namespace curveq {

struct ScenarioSpec {
    std::string name;
    ModelFamily family1 = ModelFamily::linear;
    ModelFamily family2 = ModelFamily::linear;
    Params theta1;
    Params theta2;
    std::vector<double> dose_levels;  // identical for both groups
    int reps_per_dose = 10;           // balanced design
    double sigma2 = 1.0;
    DoseRange range;
    std::optional<double> true_max_diff;  // max_d |m2 - m1| over the range
    std::optional<double> true_med_diff;  // MED1 - MED2
    double delta_clinical = 1.0;          // effect defining the MEDs

    int n_per_group() const {
        return reps_per_dose * static_cast<int>(dose_levels.size());
    }
};

struct ScenarioOptions {
    double delta1 = 1.0;          // scenario shape parameter (scenarios 1, 3)
    double sigma2 = 1.0;
    int n_per_group = 150;
    double delta_clinical = 1.0;  // clinically relevant effect (scenarios 3, 4)
    int grid_points = 1001;
};

namespace detail {

inline int reps_per_dose_for(int n_per_group, int dose_count, const std::string& name) {
    if (n_per_group <= 0 || n_per_group % dose_count != 0)
        throw ConfigError(name + ": group size " + std::to_string(n_per_group) +
                          " is not a multiple of the " + std::to_string(dose_count) +
                          " dose levels");
    return n_per_group / dose_count;
}

// Fine-grid maximum of |m2 - m1| with the attaining dose.
inline std::pair<double, double> grid_max_abs_diff(const ScenarioSpec& s, int points) {
    DoseRange fine{s.range.lower, s.range.upper, points};
    double best = -1.0, best_dose = s.range.lower;
    for (int i = 0; i < points; ++i) {
        const double d = fine.dose_at(i);
        const double v = std::abs(evaluate(s.family2, s.theta2, d) -
                                  evaluate(s.family1, s.theta1, d));
        if (v > best) {
            best = v;
            best_dose = d;
        }
    }
    return {best, best_dose};
}

} // namespace detail

// Catalog of the built-in simulation scenarios:
//   scenario1       linear m1(d)=d vs quadratic m2(d)=3a+(1-4a)d+ad^2 on [1,3],
//                   doses {1,2,3}; max |m2-m1| = a at d=2 (a = delta1)
//   scenario2-h1..5 reference emax 1+9.70d/(6.70+d) vs five emax alternatives
//                   on [0,4], doses {0..4}; max diffs 0.25/0.5/1/1.5/2
//   scenario3       emax shifted by delta1: delta1+5d/(1+d) vs 5d/(1+d) on [0,4],
//                   doses {0..4}; MED difference 0 for every Delta
//   scenario4       emax 1+4d/(2+d) vs linear 1+0.8d on [0,4], doses {0..4};
//                   responses coincide at d=0 and d=3
inline ScenarioSpec make_scenario(const std::string& name, const ScenarioOptions& opt = {}) {
    ScenarioSpec s;
    s.name = name;
    s.sigma2 = opt.sigma2;
    if (!(opt.sigma2 >= 0.0)) throw ConfigError("scenario: sigma2 must be nonnegative");

    if (name == "scenario1") {
        const double a = opt.delta1;
        s.family1 = ModelFamily::linear;
        s.theta1 = {0.0, 1.0};
        s.family2 = ModelFamily::quadratic;
        s.theta2 = {3.0 * a, 1.0 - 4.0 * a, a};
        s.dose_levels = {1.0, 2.0, 3.0};
        s.range = {1.0, 3.0, opt.grid_points};
        s.true_max_diff = std::abs(a);
    } else if (name.rfind("scenario2-h", 0) == 0 && name.size() == 12 &&
               name[11] >= '1' && name[11] <= '5') {
        const int h = name[11] - '1';
        static constexpr double emax_alt[5][2] = {
            {6.88, 3.60}, {5.66, 2.25}, {4.52, 1.00}, {4.05, 0.48}, {3.82, 0.22}};
        static constexpr double max_diff[5] = {0.25, 0.5, 1.0, 1.5, 2.0};
        s.family1 = ModelFamily::emax;
        s.theta1 = {1.0, 9.70, 6.70};
        s.family2 = ModelFamily::emax;
        s.theta2 = {1.0, emax_alt[h][0], emax_alt[h][1]};
        s.dose_levels = {0.0, 1.0, 2.0, 3.0, 4.0};
        s.range = {0.0, 4.0, opt.grid_points};
        // The catalog value is nominal; recompute and cross-check on a fine grid.
        const auto [value, dose] = detail::grid_max_abs_diff(s, 200001);
        if (std::abs(value - max_diff[h]) > 5e-3)
            throw Error("scenario2: fine-grid max difference " + std::to_string(value) +
                        " disagrees with the catalog value " + std::to_string(max_diff[h]));
        (void)dose;
        s.true_max_diff = value;
    } else if (name == "scenario3") {
        s.family1 = ModelFamily::emax;
        s.theta1 = {opt.delta1, 5.0, 1.0};
        s.family2 = ModelFamily::emax;
        s.theta2 = {0.0, 5.0, 1.0};
        s.dose_levels = {0.0, 1.0, 2.0, 3.0, 4.0};
        s.range = {0.0, 4.0, opt.grid_points};
        s.true_max_diff = std::abs(opt.delta1);  // constant vertical shift
        s.true_med_diff = 0.0;
        s.delta_clinical = opt.delta_clinical;
    } else if (name == "scenario4") {
        s.family1 = ModelFamily::emax;
        s.theta1 = {1.0, 4.0, 2.0};
        s.family2 = ModelFamily::linear;
        s.theta2 = {1.0, 0.8};
        s.dose_levels = {0.0, 1.0, 2.0, 3.0, 4.0};
        s.range = {0.0, 4.0, opt.grid_points};
        s.delta_clinical = opt.delta_clinical;
        const double delta = opt.delta_clinical;
        if (!(delta > 0.0 && delta < 4.0))
            throw ConfigError("scenario4: delta_clinical must lie in (0,4)");
        s.true_med_diff = 2.0 * delta / (4.0 - delta) - delta / 0.8;
    } else {
        throw ConfigError("unknown scenario '" + name +
                          "' (expected scenario1, scenario2-h1..h5, scenario3, scenario4)");
    }

    s.reps_per_dose = detail::reps_per_dose_for(opt.n_per_group,
                                                static_cast<int>(s.dose_levels.size()), name);
    return s;
}

inline std::pair<GroupDataset, GroupDataset> generate_data(const ScenarioSpec& s,
                                                           RngStream& rng) {
    const double sigma = std::sqrt(s.sigma2);
    auto gen_group = [&](ModelFamily family, const Params& theta,
                         const std::string& label) {
        GroupDataset g;
        g.label = label;
        g.dose_levels = s.dose_levels;
        g.responses.resize(s.dose_levels.size());
        for (size_t i = 0; i < s.dose_levels.size(); ++i) {
            const double mean = evaluate(family, theta, s.dose_levels[i]);
            auto& col = g.responses[i];
            col.reserve(static_cast<size_t>(s.reps_per_dose));
            for (int j = 0; j < s.reps_per_dose; ++j)
                col.push_back(mean + sigma * rng.next_normal());
        }
        return g;
    };
    GroupDataset g1 = gen_group(s.family1, s.theta1, "group1");
    GroupDataset g2 = gen_group(s.family2, s.theta2, "group2");
    return {std::move(g1), std::move(g2)};
}

enum class StudyKind { curve_max_diff, med_diff };

struct StudyConfig {
    int replications = 2000;
    double alpha = 0.05;
    StudyKind kind = StudyKind::curve_max_diff;
    std::optional<double> margin;  // delta (curve) or eta (MED); enables the test
    std::uint64_t seed = 42;
    QuantileSource quantile = QuantileSource::normal;
    bool placebo_adjusted = false;
    MedGradient med_gradient_kind = MedGradient::total;
};

struct SimSummary {
    std::string scenario;
    StudyKind kind = StudyKind::curve_max_diff;
    int replications = 0;  // requested
    int completed = 0;     // entering the proportions' denominator
    std::optional<double> coverage;
    double coverage_se = 0.0;
    std::optional<double> rejection_rate;
    double rejection_se = 0.0;
    std::map<std::string, int> failure_reasons;
    int failed = 0;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    std::optional<double> margin;
    double sigma2 = 0.0;
    int n_per_group = 0;
};

// Worker pool size: hardware concurrency capped by CURVEQ_THREADS.
inline unsigned worker_count() {
    unsigned n = std::max(std::thread::hardware_concurrency(), 1u);
    if (const char* env = std::getenv("CURVEQ_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
    }
    return n;
}

// Runs the Monte Carlo study. Coverage is reported whenever the scenario
// knows the true quantity; the rejection rate whenever a margin is given.
// Replications whose fit or MED computation fails are excluded from the
// denominator and tallied by reason.
inline SimSummary run_study(const ScenarioSpec& scenario, const StudyConfig& config) {
    if (config.replications <= 0) throw ConfigError("study: replications must be positive");
    if (!(scenario.sigma2 > 0.0)) throw ConfigError("study: sigma2 must be positive");
    if (config.kind == StudyKind::curve_max_diff && !scenario.true_max_diff &&
        !config.margin)
        throw ConfigError("study: scenario lacks a true max difference and no margin given");
    if (config.kind == StudyKind::med_diff && !scenario.true_med_diff && !config.margin)
        throw ConfigError("study: scenario lacks a true MED difference and no margin given");

    struct Tally {
        long completed = 0;
        long covered = 0;
        long rejected = 0;
        std::map<std::string, int> failures;
    };

    const unsigned workers =
        std::min<unsigned>(worker_count(), static_cast<unsigned>(config.replications));
    std::vector<Tally> tallies(workers);
    std::atomic<int> next_rep{0};

    auto run_replication = [&](int rep, Tally& tally) {
        RngStream rng(config.seed, static_cast<std::uint64_t>(rep));
        auto [g1, g2] = generate_data(scenario, rng);
        try {
            const FitResult fit1 = fit(g1, scenario.family1);
            const FitResult fit2 = fit(g2, scenario.family2);
            if (!fit1.converged || !fit2.converged) {
                ++tally.failures["fit did not converge"];
                return;
            }
            if (config.kind == StudyKind::curve_max_diff) {
                const BandResult b = band(fit1, fit2, scenario.range, config.alpha,
                                          config.placebo_adjusted, config.quantile);
                ++tally.completed;
                if (scenario.true_max_diff && *scenario.true_max_diff <= b.ci_for_max_abs)
                    ++tally.covered;
                if (config.margin && test_curves(b, *config.margin).reject) ++tally.rejected;
            } else {
                const MedEstimate med1 = estimate_med(fit1, scenario.delta_clinical);
                const MedEstimate med2 = estimate_med(fit2, scenario.delta_clinical);
                if (!med1.attainable || !med2.attainable) {
                    ++tally.failures["MED not attainable"];
                    return;
                }
                const double tau = tau_hat(fit1, fit2, scenario.delta_clinical,
                                           config.med_gradient_kind);
                const double diff = med1.med - med2.med;
                ++tally.completed;
                if (scenario.true_med_diff) {
                    const auto ci = med_ci(diff, tau, config.alpha);
                    if (ci.first <= *scenario.true_med_diff &&
                        *scenario.true_med_diff <= ci.second)
                        ++tally.covered;
                }
                if (config.margin) {
                    const double c = critical_constant(*config.margin, tau, config.alpha);
                    if (std::abs(diff) < c) ++tally.rejected;
                }
            }
        } catch (const RankDeficiencyError&) {
            ++tally.failures["rank-deficient fit"];
        } catch (const NotAttainableError&) {
            ++tally.failures["MED not attainable"];
        } catch (const Error& e) {
            ++tally.failures[std::string("error: ") + e.what()];
        }
    };

    auto worker = [&](unsigned w) {
        for (;;) {
            const int rep = next_rep.fetch_add(1);
            if (rep >= config.replications) break;
            run_replication(rep, tallies[w]);
        }
    };

    if (workers <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker, w);
        for (auto& t : pool) t.join();
    }

    Tally total;
    for (const auto& t : tallies) {
        total.completed += t.completed;
        total.covered += t.covered;
        total.rejected += t.rejected;
        for (const auto& [reason, count] : t.failures) total.failures[reason] += count;
    }

    SimSummary out;
    out.scenario = scenario.name;
    out.kind = config.kind;
    out.replications = config.replications;
    out.completed = static_cast<int>(total.completed);
    out.seed = config.seed;
    out.alpha = config.alpha;
    out.margin = config.margin;
    out.sigma2 = scenario.sigma2;
    out.n_per_group = scenario.n_per_group();
    out.failure_reasons = total.failures;
    for (const auto& [reason, count] : total.failures) out.failed += count;

    const bool truth_known = (config.kind == StudyKind::curve_max_diff)
                                 ? scenario.true_max_diff.has_value()
                                 : scenario.true_med_diff.has_value();
    if (truth_known && total.completed > 0) {
        out.coverage = static_cast<double>(total.covered) / static_cast<double>(total.completed);
        out.coverage_se = proportion_standard_error(*out.coverage, total.completed);
    }
    if (config.margin && total.completed > 0) {
        out.rejection_rate =
            static_cast<double>(total.rejected) / static_cast<double>(total.completed);
        out.rejection_se = proportion_standard_error(*out.rejection_rate, total.completed);
    }
    return out;
}

inline SimSummary run_coverage_study(const ScenarioSpec& scenario, int replications,
                                     double alpha, StudyKind kind, std::uint64_t seed = 42) {
    StudyConfig config;
    config.replications = replications;
    config.alpha = alpha;
    config.kind = kind;
    config.seed = seed;
    return run_study(scenario, config);
}

inline SimSummary run_size_power_study(const ScenarioSpec& scenario, int replications,
                                       double alpha, double margin, StudyKind kind,
                                       std::uint64_t seed = 42) {
    if (!(margin >= 0.0)) throw ConfigError("study: margin must be nonnegative");
    if (kind == StudyKind::curve_max_diff && !(margin > 0.0))
        throw ConfigError("study: the curve test needs a positive margin");
    StudyConfig config;
    config.replications = replications;
    config.alpha = alpha;
    config.kind = kind;
    config.margin = margin;
    config.seed = seed;
    return run_study(scenario, config);
}

} // namespace curveq
