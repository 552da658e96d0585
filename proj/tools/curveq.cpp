// curveq: equivalence tests for dose-response curves and minimum effective
// doses, plus a Monte Carlo harness for their operating characteristics.
//
// Exit codes: 0 completed analysis (whatever the statistical decision),
// 2 configuration or input errors, 3 numerical failures during the analysis.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "curveq/curveq.hpp"

namespace {

struct OutputOptions {
    std::string machine_path;  // '-' for stdout
    std::string band_path;
};

void write_or_print(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) throw curveq::ParseError(path + ": cannot open file for writing");
    out << content;
}

void emit(const curveq::ReportBundle& bundle, const OutputOptions& output) {
    std::cout << bundle.human;
    if (!output.machine_path.empty()) write_or_print(output.machine_path, bundle.machine);
    if (!output.band_path.empty()) {
        if (bundle.band_csv.empty())
            throw curveq::ConfigError("--export-band: this command produces no band");
        write_or_print(output.band_path, bundle.band_csv);
    }
}

void add_common_options(CLI::App* cmd, curveq::AnalysisConfig& cfg, std::string& config_path,
                        OutputOptions& output) {
    cmd->add_option("--config", config_path, "key=value config file (flags win on conflict)");
    cmd->add_option("--machine", output.machine_path,
                    "write the machine-readable report to this file ('-' for stdout)");
    cmd->add_option("--alpha", cfg.alpha, "significance level in (0, 0.5)");
    cmd->add_option("--grid-points", cfg.grid_points, "dose grid resolution (default 1001)");
    cmd->add_option("--quantile", cfg.quantile, "pointwise-bound quantile: normal (default) or t");
}

void add_data_options(CLI::App* cmd, curveq::AnalysisConfig& cfg) {
    cmd->add_option("--data", cfg.data, "dataset file with header group,dose,response");
    cmd->add_option("--model1", cfg.model1,
                    "family for the first group: linear, quadratic, emax, logistic, exponential");
    cmd->add_option("--model2", cfg.model2, "family for the second group");
    cmd->add_option("--lower", cfg.lower, "dose range lower end (default: data minimum)");
    cmd->add_option("--upper", cfg.upper, "dose range upper end (default: data maximum)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"equivalence tests for dose-response curves and target doses"};
    app.require_subcommand(1);

    curveq::AnalysisConfig cfg;
    std::string config_path;
    OutputOptions output;
    bool placebo_flag = false;

    auto* cmd_fit = app.add_subcommand("fit", "nonlinear least-squares fit per group");
    add_data_options(cmd_fit, cfg);
    add_common_options(cmd_fit, cfg, config_path, output);

    auto* cmd_band =
        app.add_subcommand("band", "pointwise confidence bounds on the difference curve");
    add_data_options(cmd_band, cfg);
    add_common_options(cmd_band, cfg, config_path, output);
    cmd_band->add_flag("--placebo-adjusted", placebo_flag,
                       "compare placebo-adjusted curves m(d) - m(0)");
    cmd_band->add_option("--export-band", output.band_path,
                         "write dose,diff,lower,upper rows to this file");

    auto* cmd_curves = app.add_subcommand("test-curves", "maximum-difference equivalence test");
    add_data_options(cmd_curves, cfg);
    add_common_options(cmd_curves, cfg, config_path, output);
    cmd_curves->add_flag("--placebo-adjusted", placebo_flag,
                         "compare placebo-adjusted curves m(d) - m(0)");
    cmd_curves->add_option("--delta", cfg.margin, "equivalence margin for the curve difference");
    cmd_curves->add_option("--export-band", output.band_path,
                           "write dose,diff,lower,upper rows to this file");

    auto* cmd_med = app.add_subcommand("test-med", "MED-difference equivalence test");
    add_data_options(cmd_med, cfg);
    add_common_options(cmd_med, cfg, config_path, output);
    cmd_med->add_option("--eta", cfg.margin, "equivalence margin for the MED difference");
    cmd_med->add_option("--delta-clinical", cfg.delta_clinical,
                        "clinically relevant effect over placebo defining the MED");
    cmd_med->add_option("--med-gradient", cfg.med_gradient,
                        "MED gradient variant: total (default) or fixed");

    auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo operating characteristics");
    add_common_options(cmd_sim, cfg, config_path, output);
    cmd_sim->add_option("scenario", cfg.scenario,
                        "scenario1, scenario2-h1..h5, scenario3, scenario4");
    cmd_sim->add_option("--delta1", cfg.delta1, "scenario shape parameter (scenarios 1 and 3)");
    cmd_sim->add_option("--sigma2", cfg.sigma2, "error variance (default 1)");
    cmd_sim->add_option("--n", cfg.n, "per-group sample size (default 150)");
    cmd_sim->add_option("--reps", cfg.reps, "Monte Carlo replications (default 2000)");
    cmd_sim->add_option("--seed", cfg.seed, "RNG seed (default 42)");
    cmd_sim->add_option("--margin", cfg.margin,
                        "test margin; defaults to the boundary of the null hypothesis");
    cmd_sim->add_option("--delta-clinical", cfg.delta_clinical,
                        "clinically relevant effect for MED scenarios (default 1)");
    cmd_sim->add_option("--kind", cfg.kind, "study kind: curve or med (default per scenario)");
    cmd_sim->add_flag("--placebo-adjusted", placebo_flag,
                      "use the placebo-adjusted curve test");
    cmd_sim->add_option("--med-gradient", cfg.med_gradient,
                        "MED gradient variant: total (default) or fixed");

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    if (placebo_flag) cfg.placebo_adjusted = true;

    try {
        if (!config_path.empty()) curveq::load_config_file(cfg, config_path);
        emit(curveq::run_subcommand(name, cfg), output);
        return 0;
    } catch (const curveq::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const curveq::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const curveq::Error& e) {
        // Numerical failure: emit a partial report so scripts can see how far
        // the analysis got.
        curveq::ReportWriter w("analysis failed");
        w.add("command", name);
        w.section("failure");
        w.add("error", std::string(e.what()));
        curveq::ReportBundle bundle;
        bundle.machine = w.machine_text();
        bundle.human = w.human_text();
        try {
            emit(bundle, output);
        } catch (...) {
        }
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
