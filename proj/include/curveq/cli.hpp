#pragma once

// Analysis configuration and subcommand dispatch shared by the command-line
// tool and the tests. Configuration comes from flags, from a flat key=value
// config file, or both; flags win on conflict. Unknown keys are errors.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <utility>

#include "curveq/band.hpp"
#include "curveq/csv.hpp"
#include "curveq/data.hpp"
#include "curveq/error.hpp"
#include "curveq/fit.hpp"
#include "curveq/med.hpp"
#include "curveq/models.hpp"
#include "curveq/report.hpp"
#include "curveq/simulation.hpp"

namespace curveq {

struct AnalysisConfig {
    // analysis inputs
    std::optional<std::string> data;    // dataset path
    std::optional<std::string> model1;  // family per group
    std::optional<std::string> model2;
    std::optional<double> lower;  // dose range; defaults to the data range
    std::optional<double> upper;
    std::optional<double> alpha;
    std::optional<double> margin;          // delta (curves) / eta (MEDs)
    std::optional<double> delta_clinical;  // effect defining the MEDs
    std::optional<bool> placebo_adjusted;
    std::optional<int> grid_points;
    std::optional<std::string> quantile;      // normal | t
    std::optional<std::string> med_gradient;  // total | fixed
    // simulation inputs
    std::optional<std::string> scenario;
    std::optional<int> reps;
    std::optional<int> n;  // per-group sample size
    std::optional<double> sigma2;
    std::optional<double> delta1;
    std::optional<std::string> kind;  // curve | med
    std::optional<std::uint64_t> seed;
};

namespace detail {

inline void set_config_field(AnalysisConfig& cfg, const std::string& key,
                             const std::string& value, const std::string& context) {
    auto as_double = [&] { return parse_double(value, context); };
    auto as_int = [&] {
        const double v = parse_double(value, context);
        if (v != static_cast<double>(static_cast<long long>(v)))
            throw ParseError(context + ": expected an integer for '" + key + "'");
        return static_cast<int>(v);
    };
    auto as_bool = [&] {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        throw ParseError(context + ": expected true/false for '" + key + "'");
    };

    if (key == "data") cfg.data = value;
    else if (key == "model1") cfg.model1 = value;
    else if (key == "model2") cfg.model2 = value;
    else if (key == "lower") cfg.lower = as_double();
    else if (key == "upper") cfg.upper = as_double();
    else if (key == "alpha") cfg.alpha = as_double();
    else if (key == "margin") cfg.margin = as_double();
    else if (key == "delta_clinical") cfg.delta_clinical = as_double();
    else if (key == "placebo_adjusted") cfg.placebo_adjusted = as_bool();
    else if (key == "grid_points") cfg.grid_points = as_int();
    else if (key == "quantile") cfg.quantile = value;
    else if (key == "med_gradient") cfg.med_gradient = value;
    else if (key == "scenario") cfg.scenario = value;
    else if (key == "reps") cfg.reps = as_int();
    else if (key == "n") cfg.n = as_int();
    else if (key == "sigma2") cfg.sigma2 = as_double();
    else if (key == "delta1") cfg.delta1 = as_double();
    else if (key == "kind") cfg.kind = value;
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_int());
    else throw ParseError(context + ": unknown configuration key '" + key + "'");
}

} // namespace detail

// Flat key=value file; '#' starts a comment. Keys already present in cfg
// (set by flags) win over file values.
inline void load_config_file(AnalysisConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open config file");
    AnalysisConfig from_file;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = detail::trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto eq = s.find('=');
        const std::string context = path + ":" + std::to_string(lineno);
        if (eq == std::string_view::npos)
            throw ParseError(context + ": expected key=value");
        const std::string key(detail::trim(s.substr(0, eq)));
        const std::string value(detail::trim(s.substr(eq + 1)));
        detail::set_config_field(from_file, key, value, context);
    }

    auto fill = [](auto& dst, const auto& src) {
        if (!dst && src) dst = src;
    };
    fill(cfg.data, from_file.data);
    fill(cfg.model1, from_file.model1);
    fill(cfg.model2, from_file.model2);
    fill(cfg.lower, from_file.lower);
    fill(cfg.upper, from_file.upper);
    fill(cfg.alpha, from_file.alpha);
    fill(cfg.margin, from_file.margin);
    fill(cfg.delta_clinical, from_file.delta_clinical);
    fill(cfg.placebo_adjusted, from_file.placebo_adjusted);
    fill(cfg.grid_points, from_file.grid_points);
    fill(cfg.quantile, from_file.quantile);
    fill(cfg.med_gradient, from_file.med_gradient);
    fill(cfg.scenario, from_file.scenario);
    fill(cfg.reps, from_file.reps);
    fill(cfg.n, from_file.n);
    fill(cfg.sigma2, from_file.sigma2);
    fill(cfg.delta1, from_file.delta1);
    fill(cfg.kind, from_file.kind);
    fill(cfg.seed, from_file.seed);
}

namespace detail {

inline ModelFamily family_or_throw(const std::optional<std::string>& name, const char* which) {
    if (!name) throw ConfigError(std::string("missing required option '") + which + "'");
    const auto family = parse_family(*name);
    if (!family)
        throw ConfigError(std::string(which) + ": unknown model family '" + *name +
                          "' (linear, quadratic, emax, logistic, exponential)");
    return *family;
}

inline QuantileSource quantile_or_default(const AnalysisConfig& cfg) {
    if (!cfg.quantile || *cfg.quantile == "normal") return QuantileSource::normal;
    if (*cfg.quantile == "t") return QuantileSource::student_t;
    throw ConfigError("quantile: expected 'normal' or 't', got '" + *cfg.quantile + "'");
}

inline MedGradient med_gradient_or_default(const AnalysisConfig& cfg) {
    if (!cfg.med_gradient || *cfg.med_gradient == "total") return MedGradient::total;
    if (*cfg.med_gradient == "fixed") return MedGradient::fixed_target;
    throw ConfigError("med_gradient: expected 'total' or 'fixed', got '" + *cfg.med_gradient + "'");
}

inline double alpha_or_default(const AnalysisConfig& cfg) {
    const double alpha = cfg.alpha.value_or(0.05);
    if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("alpha must lie in (0, 0.5)");
    return alpha;
}

inline DoseRange range_for(const AnalysisConfig& cfg, const GroupDataset& g1,
                           const GroupDataset& g2) {
    DoseRange range;
    range.lower = cfg.lower.value_or(std::min(g1.dose_levels.front(), g2.dose_levels.front()));
    range.upper = cfg.upper.value_or(std::max(g1.dose_levels.back(), g2.dose_levels.back()));
    range.grid_points = cfg.grid_points.value_or(1001);
    range.validate();
    return range;
}

inline void report_fit(ReportWriter& w, const FitResult& fit, int index) {
    const std::string suffix = "_" + std::to_string(index);
    w.add("label" + suffix, fit.label);
    w.add("family" + suffix, std::string(family_name(fit.family)));
    w.add("theta_hat" + suffix, fit.theta);
    w.add("sigma2_hat" + suffix, fit.sigma2);
    w.add("rss" + suffix, fit.rss);
    w.add("n" + suffix, fit.n_total);
    w.add("converged" + suffix, fit.converged);
    w.add("iterations" + suffix, fit.iterations);
}

inline void report_band(ReportWriter& w, const BandResult& band) {
    w.add("alpha", band.alpha);
    w.add("quantile",
          std::string(band.quantile == QuantileSource::normal ? "normal" : "t"));
    w.add("quantile_value", band.quantile_value);
    w.add("placebo_adjusted", band.placebo_adjusted);
    w.add("grid_points", static_cast<int>(band.grid.size()));
    w.add("range_lower", band.grid.front());
    w.add("range_upper", band.grid.back());
    w.add("max_upper_dose", band.max_upper_dose);
    w.add("max_upper_value", band.max_upper_value);
    w.add("min_lower_dose", band.min_lower_dose);
    w.add("min_lower_value", band.min_lower_value);
    w.add("ci_for_max_abs", band.ci_for_max_abs);
}

struct FittedPair {
    GroupDataset g1, g2;
    FitResult fit1, fit2;
};

inline FittedPair fit_from_config(const AnalysisConfig& cfg) {
    if (!cfg.data) throw ConfigError("missing required option 'data'");
    const ModelFamily family1 = family_or_throw(cfg.model1, "model1");
    const ModelFamily family2 = family_or_throw(cfg.model2, "model2");
    FittedPair out;
    std::tie(out.g1, out.g2) = ingest_dataset(*cfg.data);
    out.fit1 = fit(out.g1, family1);
    out.fit2 = fit(out.g2, family2);
    return out;
}

} // namespace detail

// Executes one subcommand (fit, band, test-curves, test-med, simulate).
// Statistical non-rejection is a successful run; errors are thrown.
inline ReportBundle run_subcommand(const std::string& name, const AnalysisConfig& cfg) {
    ReportBundle bundle;

    if (name == "fit") {
        auto fitted = detail::fit_from_config(cfg);
        ReportWriter w("least-squares fit");
        w.add("command", std::string("fit"));
        detail::report_fit(w, fitted.fit1, 1);
        detail::report_fit(w, fitted.fit2, 2);
        bundle.machine = w.machine_text();
        bundle.human = w.human_text();
        return bundle;
    }

    if (name == "band" || name == "test-curves") {
        auto fitted = detail::fit_from_config(cfg);
        const DoseRange range = detail::range_for(cfg, fitted.g1, fitted.g2);
        const BandResult b =
            band(fitted.fit1, fitted.fit2, range, detail::alpha_or_default(cfg),
                 cfg.placebo_adjusted.value_or(false), detail::quantile_or_default(cfg));
        ReportWriter w(name == "band" ? "confidence band for the difference curve"
                                      : "curve similarity test");
        w.add("command", name);
        detail::report_fit(w, fitted.fit1, 1);
        detail::report_fit(w, fitted.fit2, 2);
        w.section("band");
        detail::report_band(w, b);
        if (name == "test-curves") {
            if (!cfg.margin) throw ConfigError("test-curves: missing required option 'margin'");
            const CurveTestResult t = test_curves(b, *cfg.margin);
            w.section("decision");
            w.add("margin", t.delta);
            w.add("reject_null", t.reject);
            w.add("decision", std::string(t.reject ? "similarity claimed"
                                                   : "similarity not demonstrated"));
        }
        bundle.machine = w.machine_text();
        bundle.human = w.human_text();
        bundle.band_csv = band_to_csv(b);
        return bundle;
    }

    if (name == "test-med") {
        auto fitted = detail::fit_from_config(cfg);
        if (!cfg.delta_clinical)
            throw ConfigError("test-med: missing required option 'delta_clinical'");
        if (!cfg.margin) throw ConfigError("test-med: missing required option 'margin'");
        if (!(*cfg.margin >= 0.0)) throw ConfigError("test-med: margin must be nonnegative");
        const MedInference inference =
            med_inference(fitted.fit1, fitted.fit2, *cfg.delta_clinical, *cfg.margin,
                          detail::alpha_or_default(cfg), detail::med_gradient_or_default(cfg));
        ReportWriter w("MED similarity test");
        w.add("command", std::string("test-med"));
        detail::report_fit(w, fitted.fit1, 1);
        detail::report_fit(w, fitted.fit2, 2);
        w.section("MED inference");
        w.add("delta_clinical", *cfg.delta_clinical);
        w.add("med_1", inference.med1.med);
        w.add("med_2", inference.med2.med);
        w.add("diff_hat", inference.diff_hat);
        w.add("tau_hat", inference.tau);
        w.add("alpha", inference.alpha);
        w.add("ci_lower", inference.ci.first);
        w.add("ci_upper", inference.ci.second);
        w.add("eta", inference.eta);
        w.add("c_critical", inference.c_critical);
        w.add("reject_null", inference.reject);
        w.add("decision", std::string(inference.reject ? "dose similarity claimed"
                                                       : "dose similarity not demonstrated"));
        bundle.machine = w.machine_text();
        bundle.human = w.human_text();
        return bundle;
    }

    if (name == "simulate") {
        if (!cfg.scenario) throw ConfigError("simulate: missing required option 'scenario'");
        ScenarioOptions opt;
        if (cfg.delta1) opt.delta1 = *cfg.delta1;
        if (cfg.sigma2) opt.sigma2 = *cfg.sigma2;
        if (cfg.n) opt.n_per_group = *cfg.n;
        if (cfg.delta_clinical) opt.delta_clinical = *cfg.delta_clinical;
        if (cfg.grid_points) opt.grid_points = *cfg.grid_points;
        const ScenarioSpec scenario = make_scenario(*cfg.scenario, opt);

        StudyConfig study;
        study.replications = cfg.reps.value_or(2000);
        study.alpha = detail::alpha_or_default(cfg);
        study.seed = cfg.seed.value_or(42);
        study.quantile = detail::quantile_or_default(cfg);
        study.placebo_adjusted = cfg.placebo_adjusted.value_or(false);
        study.med_gradient_kind = detail::med_gradient_or_default(cfg);
        if (cfg.kind) {
            if (*cfg.kind == "curve") study.kind = StudyKind::curve_max_diff;
            else if (*cfg.kind == "med") study.kind = StudyKind::med_diff;
            else throw ConfigError("kind: expected 'curve' or 'med', got '" + *cfg.kind + "'");
        } else {
            study.kind = scenario.true_med_diff.has_value() ? StudyKind::med_diff
                                                            : StudyKind::curve_max_diff;
        }
        if (cfg.margin) {
            study.margin = *cfg.margin;
        } else {
            // Default to the boundary margin: the size study of the test.
            study.margin = (study.kind == StudyKind::curve_max_diff)
                               ? scenario.true_max_diff
                               : (scenario.true_med_diff
                                      ? std::optional<double>(std::abs(*scenario.true_med_diff))
                                      : std::nullopt);
        }

        const SimSummary summary = run_study(scenario, study);
        ReportWriter w("simulation study");
        w.add("command", std::string("simulate"));
        w.add("scenario", summary.scenario);
        w.add("kind", std::string(summary.kind == StudyKind::curve_max_diff ? "curve" : "med"));
        w.add("model_1", std::string(family_name(scenario.family1)));
        w.add("theta_1", scenario.theta1);
        w.add("model_2", std::string(family_name(scenario.family2)));
        w.add("theta_2", scenario.theta2);
        w.add("sigma2", summary.sigma2);
        w.add("n_per_group", summary.n_per_group);
        w.add("alpha", summary.alpha);
        w.add("replications", summary.replications);
        w.add("completed", summary.completed);
        w.add("failed", summary.failed);
        for (const auto& [reason, count] : summary.failure_reasons)
            w.add("failed[" + reason + "]", count);
        w.add("seed", static_cast<long>(summary.seed));
        if (scenario.true_max_diff) w.add("true_max_diff", *scenario.true_max_diff);
        if (scenario.true_med_diff) w.add("true_med_diff", *scenario.true_med_diff);
        if (summary.kind == StudyKind::med_diff) w.add("delta_clinical", scenario.delta_clinical);
        if (summary.margin) w.add("margin", *summary.margin);
        if (summary.coverage) {
            w.add("coverage", *summary.coverage);
            w.add("coverage_se", summary.coverage_se);
        }
        if (summary.rejection_rate) {
            w.add("rejection_rate", *summary.rejection_rate);
            w.add("rejection_se", summary.rejection_se);
        }
        bundle.machine = w.machine_text();
        bundle.human = w.human_text();
        return bundle;
    }

    throw ConfigError("unknown subcommand '" + name + "'");
}

} // namespace curveq
