#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "curveq/cli.hpp"
#include "curveq/csv.hpp"
#include "curveq/simulation.hpp"

using namespace curveq;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content = "") {
        path = (std::filesystem::temp_directory_path() / name).string();
        if (!content.empty()) {
            std::ofstream out(path);
            out << content;
        }
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("dataset ingestion groups and sorts rows") {
    TempFile file("curveq_io_basic.csv",
                  "group,dose,response\n"
                  "g1,1,0.9\n"
                  "g1,0,0.1\n"
                  "g2,0,0.2\n"
                  "g1,0,0.15\n");
    const auto [g1, g2] = ingest_dataset(file.path);
    CHECK(g1.label == "g1");
    CHECK(g2.label == "g2");
    REQUIRE(g1.dose_levels == std::vector<double>{0.0, 1.0});
    CHECK(g1.responses[0] == std::vector<double>{0.1, 0.15});
    CHECK(g1.responses[1] == std::vector<double>{0.9});
    CHECK(g2.n_total() == 1);
    CHECK(g1.n_total() + g2.n_total() == 4);  // row count preserved
}

TEST_CASE("a group appearing once is still a valid ingestion") {
    TempFile file("curveq_io_single.csv",
                  "group,dose,response\n"
                  "a,0,0.1\na,1,0.9\nb,2,0.5\n");
    const auto [g1, g2] = ingest_dataset(file.path);
    CHECK(g2.n_total() == 1);
    // the fit will reject it later: 1 dose level cannot identify 2 parameters
    CHECK_THROWS_AS(fit(g2, ModelFamily::linear), DomainError);
    (void)g1;
}

TEST_CASE("ingestion errors carry the offending line") {
    TempFile bad_header("curveq_io_header.csv", "dose,response\n0,1\n");
    CHECK_THROWS_WITH(ingest_dataset(bad_header.path),
                      Catch::Matchers::ContainsSubstring(":1:"));

    TempFile bad_cell("curveq_io_cell.csv", "group,dose,response\ng1,abc,1\ng2,0,1\n");
    CHECK_THROWS_WITH(ingest_dataset(bad_cell.path),
                      Catch::Matchers::ContainsSubstring(":2:"));

    TempFile short_row("curveq_io_short.csv", "group,dose,response\ng1,1\n");
    CHECK_THROWS_WITH(ingest_dataset(short_row.path),
                      Catch::Matchers::ContainsSubstring("3 columns"));

    TempFile one_group("curveq_io_one.csv", "group,dose,response\ng1,0,1\ng1,1,2\n");
    CHECK_THROWS_AS(ingest_dataset(one_group.path), ParseError);

    TempFile three_groups("curveq_io_three.csv",
                          "group,dose,response\na,0,1\nb,0,1\nc,0,1\n");
    CHECK_THROWS_WITH(ingest_dataset(three_groups.path),
                      Catch::Matchers::ContainsSubstring("more than two group labels"));

    CHECK_THROWS_AS(ingest_dataset("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("generated data round-trips bit-exactly through the file format") {
    ScenarioOptions opt;
    opt.delta1 = 1.5;
    opt.sigma2 = 2.0;
    opt.n_per_group = 30;
    const ScenarioSpec s = make_scenario("scenario1", opt);
    RngStream rng(77, 3);
    const auto [g1, g2] = generate_data(s, rng);

    TempFile file("curveq_io_roundtrip.csv");
    write_dataset(file.path, g1, g2);
    const auto [r1, r2] = ingest_dataset(file.path);
    CHECK(r1.label == g1.label);
    CHECK(r1.dose_levels == g1.dose_levels);
    CHECK(r1.responses == g1.responses);  // bitwise equality
    CHECK(r2.responses == g2.responses);
}

TEST_CASE("band export carries the full grid") {
    ScenarioOptions opt;
    opt.n_per_group = 150;
    const ScenarioSpec s = make_scenario("scenario1", opt);
    RngStream rng(12, 0);
    const auto [g1, g2] = generate_data(s, rng);
    const BandResult b =
        band(fit(g1, s.family1), fit(g2, s.family2), DoseRange{1.0, 3.0, 51}, 0.05);
    const std::string csv = band_to_csv(b);
    CHECK(csv.rfind("dose,diff,lower,upper\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 52);
}

TEST_CASE("config files fill only unset fields") {
    TempFile file("curveq_io_config.cfg",
                  "# comment line\n"
                  "alpha = 0.1\n"
                  "model1=emax\n"
                  "grid_points = 501\n"
                  "placebo_adjusted = true\n"
                  "seed = 7\n");
    AnalysisConfig cfg;
    cfg.alpha = 0.05;  // set by a flag: must win
    load_config_file(cfg, file.path);
    CHECK(cfg.alpha == 0.05);
    CHECK(cfg.model1 == "emax");
    CHECK(cfg.grid_points == 501);
    CHECK(cfg.placebo_adjusted == true);
    CHECK(cfg.seed == 7);
}

TEST_CASE("config file rejects unknown keys and malformed lines") {
    TempFile unknown("curveq_io_unknown.cfg", "alpha=0.05\nbogus_key=1\n");
    AnalysisConfig cfg;
    CHECK_THROWS_WITH(load_config_file(cfg, unknown.path),
                      Catch::Matchers::ContainsSubstring("unknown configuration key"));

    TempFile noeq("curveq_io_noeq.cfg", "alpha 0.05\n");
    CHECK_THROWS_WITH(load_config_file(cfg, noeq.path),
                      Catch::Matchers::ContainsSubstring("key=value"));

    TempFile notnum("curveq_io_notnum.cfg", "alpha=zero\n");
    CHECK_THROWS_AS(load_config_file(cfg, notnum.path), ParseError);
}

TEST_CASE("fit subcommand reports both groups") {
    ScenarioOptions opt;
    opt.n_per_group = 150;
    const ScenarioSpec s = make_scenario("scenario4", opt);
    RngStream rng(3, 0);
    const auto [g1, g2] = generate_data(s, rng);
    TempFile file("curveq_io_fit.csv");
    write_dataset(file.path, g1, g2);

    AnalysisConfig cfg;
    cfg.data = file.path;
    cfg.model1 = "emax";
    cfg.model2 = "linear";
    const ReportBundle bundle = run_subcommand("fit", cfg);
    CHECK(bundle.machine.find("theta_hat_1=") != std::string::npos);
    CHECK(bundle.machine.find("converged_1=true") != std::string::npos);
    CHECK(bundle.machine.find("converged_2=true") != std::string::npos);
    CHECK(bundle.band_csv.empty());
    CHECK(bundle.human.find("least-squares fit") != std::string::npos);
}

TEST_CASE("band subcommand on two identical noiseless groups is symmetric") {
    GroupDataset g1, g2;
    g1.label = "a";
    g2.label = "b";
    g1.dose_levels = g2.dose_levels = {0, 1, 2, 3, 4};
    g1.responses.resize(5);
    g2.responses.resize(5);
    for (size_t i = 0; i < 5; ++i) {
        const double m =
            evaluate(ModelFamily::emax, Params{1.0, 4.0, 2.0}, g1.dose_levels[i]);
        g1.responses[i].assign(4, m);
        g2.responses[i].assign(4, m);
    }
    // tiny jitter so the information matrix is clean but sigma2 > 0
    g1.responses[0][0] += 1e-3;
    g2.responses[0][0] += 1e-3;
    TempFile file("curveq_io_band.csv");
    write_dataset(file.path, g1, g2);

    AnalysisConfig cfg;
    cfg.data = file.path;
    cfg.model1 = "emax";
    cfg.model2 = "emax";
    cfg.alpha = 0.1;
    const ReportBundle bundle = run_subcommand("band", cfg);
    CHECK(!bundle.band_csv.empty());

    // identical data gives identical fits, so the band is symmetric about 0
    const auto get = [&](const std::string& key) {
        const auto pos = bundle.machine.find(key + "=");
        REQUIRE(pos != std::string::npos);
        return std::stod(bundle.machine.substr(pos + key.size() + 1));
    };
    CHECK(get("max_upper_value") == Catch::Approx(-get("min_lower_value")).epsilon(1e-12));
}

TEST_CASE("test-med subcommand recovers the construction MEDs") {
    ScenarioOptions opt;
    opt.n_per_group = 150;
    opt.sigma2 = 0.01;
    opt.delta_clinical = 1.6;
    const ScenarioSpec s = make_scenario("scenario4", opt);
    RngStream rng(8, 0);
    const auto [g1, g2] = generate_data(s, rng);
    TempFile file("curveq_io_med.csv");
    write_dataset(file.path, g1, g2);

    AnalysisConfig cfg;
    cfg.data = file.path;
    cfg.model1 = "emax";
    cfg.model2 = "linear";
    cfg.delta_clinical = 1.6;
    cfg.margin = 1.0;
    const ReportBundle bundle = run_subcommand("test-med", cfg);
    const auto get = [&](const std::string& key) {
        const auto pos = bundle.machine.find(key + "=");
        REQUIRE(pos != std::string::npos);
        return std::stod(bundle.machine.substr(pos + key.size() + 1));
    };
    CHECK(get("med_1") == Catch::Approx(4.0 / 3.0).margin(0.05));
    CHECK(get("med_2") == Catch::Approx(2.0).margin(0.05));
    CHECK(bundle.machine.find("decision=") != std::string::npos);
}

TEST_CASE("simulate subcommand populates coverage and size") {
    AnalysisConfig cfg;
    cfg.scenario = "scenario1";
    cfg.delta1 = 3.0;
    cfg.sigma2 = 1.0;
    cfg.n = 150;
    cfg.alpha = 0.05;
    cfg.reps = 2000;
    cfg.seed = 42;
    const ReportBundle bundle = run_subcommand("simulate", cfg);
    CHECK(bundle.machine.find("margin=3\n") != std::string::npos);

    const auto get = [&](const std::string& key) {
        const auto pos = bundle.machine.find(key + "=");
        REQUIRE(pos != std::string::npos);
        return std::stod(bundle.machine.substr(pos + key.size() + 1));
    };
    // reference operating characteristics: coverage 0.954, size 0.048
    CHECK(std::abs(get("coverage") - 0.954) <= 0.02);
    CHECK(get("rejection_rate") <= 0.065);

    // byte-identical machine reports for identical configs
    const ReportBundle again = run_subcommand("simulate", cfg);
    CHECK(bundle.machine == again.machine);
}

TEST_CASE("test-curves subcommand embeds the decision") {
    ScenarioOptions opt;
    opt.delta1 = 0.25;
    opt.n_per_group = 150;
    const ScenarioSpec s = make_scenario("scenario1", opt);
    RngStream rng(14, 0);
    const auto [g1, g2] = generate_data(s, rng);
    TempFile file("curveq_io_curves.csv");
    write_dataset(file.path, g1, g2);

    AnalysisConfig cfg;
    cfg.data = file.path;
    cfg.model1 = "linear";
    cfg.model2 = "quadratic";
    cfg.lower = 1.0;
    cfg.upper = 3.0;
    cfg.margin = 2.0;  // generous margin: similarity should be claimed
    const ReportBundle bundle = run_subcommand("test-curves", cfg);
    CHECK(bundle.machine.find("reject_null=true") != std::string::npos);
    CHECK(bundle.machine.find("decision=similarity claimed") != std::string::npos);
    CHECK(!bundle.band_csv.empty());

    cfg.margin = 0.01;  // margin far below the attainable bound width
    const ReportBundle keep = run_subcommand("test-curves", cfg);
    CHECK(keep.machine.find("reject_null=false") != std::string::npos);
}

TEST_CASE("subcommand validation errors") {
    AnalysisConfig cfg;
    CHECK_THROWS_AS(run_subcommand("fit", cfg), ConfigError);
    CHECK_THROWS_AS(run_subcommand("nonsense", cfg), ConfigError);

    cfg.scenario = "scenario1";
    cfg.alpha = 0.9;
    CHECK_THROWS_AS(run_subcommand("simulate", cfg), ConfigError);

    AnalysisConfig med;
    med.data = "/nonexistent.csv";
    med.model1 = "emax";
    med.model2 = "linear";
    CHECK_THROWS_AS(run_subcommand("test-med", med), ParseError);
}

TEST_CASE("machine and human forms print the same numbers") {
    const double value = 0.12345678901234;
    ReportWriter w("demo");
    w.add("value", value);
    w.add("count", 42);
    const std::string machine = w.machine_text();
    const std::string human = w.human_text();

    // machine form round-trips the double exactly
    const auto pos = machine.find("value=");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(machine.substr(pos + 6)) == value);
    // human form shows the same number at 6 significant digits
    CHECK(human.find("0.123457") != std::string::npos);
    CHECK(machine.find("count=42") != std::string::npos);
    CHECK(human.find("42") != std::string::npos);
}
