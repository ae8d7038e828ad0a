#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"
#include "tep/csv.hpp"

namespace fs = std::filesystem;
using tep::testing::data_dir;

namespace {

// cell of a CSV table by column name
std::string at(const tep::csv::Table& t, std::size_t row, const char* col) { return t.cell(row, t.column(col)); }

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "tepcli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = tep::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("tep_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// Config pointing at a bundled data set, with extra lines appended.
fs::path config_for(const fs::path& dir, const std::string& dataset, const std::string& extra = "") {
    std::ifstream in(data_dir() / dataset / "config.txt");
    std::stringstream text;
    text << in.rdbuf();
    const auto path = dir / "config.txt";
    std::ofstream(path) << text.str() << "\ndata_dir = " << (data_dir() / dataset).string() << "\n" << extra;
    return path;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// delta.csv summed to expected values per country
std::map<std::string, double> expected_delta(const fs::path& dir) {
    const auto probs = tep::read_scenarios_csv(dir / "scenarios.csv");
    const auto d = tep::read_delta_csv(dir / "delta.csv", probs);
    std::map<std::string, double> m;
    for (std::size_t i = 0; i < d.countries.size(); ++i) m[d.countries[i]] = d.expected(i);
    return m;
}

}  // namespace

TEST(Compare, ThreeNodeDelta) {
    const auto dir = scratch("three_node");
    const auto r = run({"compare", "--config", config_for(dir, "three_node").string(), "--out", (dir / "out").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = expected_delta(dir / "out");
    EXPECT_NEAR(d.at("C1"), 3.5, 1e-6);
    EXPECT_NEAR(d.at("C2"), -2.5, 1e-6);
    EXPECT_NEAR(d.at("C3"), 2.0, 1e-6);
    for (const char* f : {"with/solution.csv", "with/prices.csv", "with/welfare.csv", "without/welfare.csv",
                          "line_observables.csv", "manifest.txt"})
        EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
}

TEST(Compare, CandidateDeniedInBothPlans) {
    const auto dir = scratch("denied");
    const auto r = run({"compare", "--config", config_for(dir, "three_node", "expand_candidate = 0\n").string(),
                        "--out", (dir / "out").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto& [c, v] : expected_delta(dir / "out")) EXPECT_EQ(v, 0.0) << c;
}

TEST(Compare, ManifestRecordsRun) {
    const auto dir = scratch("manifest");
    ASSERT_EQ(run({"compare", "--config", config_for(dir, "three_node").string(), "--out", (dir / "out").string()}).code, 0);
    const auto m = slurp(dir / "out" / "manifest.txt");
    for (const char* key : {"config_hash", "seed", "kkt_tol", "eigen", "output.delta.csv"})
        EXPECT_NE(m.find(key), std::string::npos) << key;
    EXPECT_EQ(m.find(dir.string()), std::string::npos);
}

TEST(Compare, SyntheticRunsAreByteIdentical) {
    const auto dir = scratch("synthetic");
    const auto cfg = config_for(dir, "synthetic_ne", "n_scenarios = 4\n").string();
    ASSERT_EQ(run({"compare", "--config", cfg, "--seed", "5", "--out", (dir / "a").string()}).code, 0);
    ASSERT_EQ(run({"compare", "--config", cfg, "--seed", "5", "--out", (dir / "b").string()}).code, 0);
    for (const char* f : {"delta.csv", "scenarios.csv", "line_observables.csv", "with/solution.csv", "with/prices.csv",
                          "without/welfare.csv", "manifest.txt"})
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    ASSERT_EQ(run({"compare", "--config", cfg, "--seed", "6", "--out", (dir / "c").string()}).code, 0);
    EXPECT_NE(slurp(dir / "a" / "delta.csv"), slurp(dir / "c" / "delta.csv"));
}

TEST(Compare, UnknownLineIsInputError) {
    const auto dir = scratch("badline");
    const auto r = run({"compare", "--config", config_for(dir, "three_node").string(), "--line", "L99", "--out",
                        (dir / "out").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("L99"), std::string::npos);
}

TEST(Compare, NonExpandableLineIsInputError) {
    const auto dir = scratch("fixedline");
    const auto r = run({"compare", "--config", config_for(dir, "three_node").string(), "--line", "L12", "--out",
                        (dir / "out").string()});
    EXPECT_EQ(r.code, 1);
}

TEST(Compare, NonconvergenceExitsTwo) {
    const auto dir = scratch("nonconv");
    const auto r = run({"compare", "--config", config_for(dir, "three_node", "max_iterations = 1\n").string(), "--out",
                        (dir / "out").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("residual"), std::string::npos) << r.err;
}

TEST(Compare, MissingConfigIsInputError) {
    EXPECT_EQ(run({"compare", "--config", "/nonexistent/config.txt"}).code, 1);
}

TEST(Compensate, PpaWorkedExample) {
    const auto dir = scratch("ppa");
    const auto r = run({"compensate", "--config", (data_dir() / "ppa_example" / "config.txt").string(), "--out",
                        (dir / "out").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = tep::csv::Table::read(dir / "out" / "parameters.csv");
    std::map<std::string, double> price;
    for (std::size_t k = 0; k < t.size(); ++k)
        if (at(t, k, "param") == "ppa_price") price[at(t, k, "mechanism")] = std::stod(at(t, k, "value"));
    EXPECT_EQ(price.at("ppa:A"), 3.0);
    EXPECT_EQ(price.at("ppa:B"), 4.5);
}

TEST(Compensate, IdealRowsIdentical) {
    const auto dir = scratch("ideal");
    const auto r = run({"compensate", "--config", (data_dir() / "ppa_example" / "config.txt").string(), "--mechanisms",
                        "ideal", "--out", (dir / "out").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = tep::csv::Table::read(dir / "out" / "risk_table.csv");
    ASSERT_EQ(t.size(), 2u);
    for (const char* col : {"std_ntw", "p_loss", "e_loss", "cvar80_loss"}) EXPECT_EQ(at(t, 0, col), at(t, 1, col)) << col;
}

TEST(Compensate, EmptyMechanismListIsUsageError) {
    const auto dir = scratch("empty");
    const auto cfg = config_for(dir, "ppa_example", "artifacts_dir = " + (data_dir() / "ppa_example").string() +
                                                        "\nmechanisms =\n");
    const auto r = run({"compensate", "--config", cfg.string(), "--out", (dir / "out").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("mechanism"), std::string::npos);
    EXPECT_NE(r.err.find("usage:"), std::string::npos) << r.err;
}

TEST(Compensate, SingularCalibrationIsSkipped) {
    const auto dir = scratch("singular");
    const auto art = dir / "art";
    fs::create_directories(art);
    fs::copy(data_dir() / "ppa_example", art, fs::copy_options::recursive);
    // zero flow through the line in both scenarios
    std::ofstream(art / "line_observables.csv")
        << "scenario,period,from_country,to_country,period_weight,flow_mw,price_from,price_to\n"
        << "0,0,A,B,1,0,1,2\n1,0,A,B,1,0,1,3\n";
    const auto cfg = dir / "config.txt";
    std::ofstream(cfg) << "artifacts_dir = art\nshares = A:0.5,B:0.5\nmechanisms = lump,flow,ideal\n";
    auto r = run({"compensate", "--config", cfg.string(), "--out", (dir / "out").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("warning: mechanism 'flow' skipped"), std::string::npos) << r.err;

    std::ofstream(cfg) << "artifacts_dir = art\nshares = A:0.5,B:0.5\nmechanisms = flow,value,ppa:A\n";
    r = run({"compensate", "--config", cfg.string(), "--out", (dir / "out2").string()});
    EXPECT_EQ(r.code, 2) << r.err;
}

TEST(Compensate, MultilateralPpaRejected) {
    const auto dir = scratch("multi");
    const auto cfg = config_for(dir, "three_node", "shares = equal:C1,C2,C3\nartifacts_dir = out\n");
    ASSERT_EQ(run({"compare", "--config", cfg.string(), "--out", (dir / "out").string()}).code, 0);
    const auto r = run({"compensate", "--config", cfg.string(), "--mechanisms", "ppa:C2,ideal,lump", "--out",
                        (dir / "out").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("multilateral"), std::string::npos) << r.err;
    const auto t = tep::csv::Table::read(dir / "out" / "risk_table.csv");
    EXPECT_EQ(t.size(), 6u);
}

TEST(Report, PrintsTables) {
    const auto dir = scratch("report");
    ASSERT_EQ(run({"compensate", "--config", (data_dir() / "ppa_example" / "config.txt").string(), "--out",
                   (dir / "out").string()})
                  .code,
              0);
    const auto r = run({"report", "--out", (dir / "out").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("ppa_price"), std::string::npos);
    EXPECT_NE(r.out.find("std_ntw"), std::string::npos);
}

TEST(Analytic, TwoNodeDefaults) {
    const auto r = run({"analytic", "two-node", "--cost", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("optimal_capacity=2.5"), std::string::npos) << r.out;
}

TEST(Analytic, ThreeNodeDefaults) {
    const auto r = run({"analytic", "three-node"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("new.system=12"), std::string::npos) << r.out;
}

TEST(Validate, ReportsViolations) {
    const auto ok = run({"validate", "--config", (data_dir() / "three_node" / "config.txt").string()});
    EXPECT_EQ(ok.code, 0) << ok.err;
    EXPECT_EQ(ok.out.rfind("ok:", 0), 0u) << ok.out;

    const auto dir = scratch("validate");
    fs::copy(data_dir() / "three_node", dir / "data", fs::copy_options::recursive);
    std::ofstream(dir / "data" / "scenarios.csv") << "scenario,probability\n0,0.6\n";
    const auto bad = run({"validate", "--config", (dir / "data" / "config.txt").string()});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("violation"), std::string::npos) << bad.err;
}

TEST(Cli, UnknownSubcommandIsUsageError) {
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({}).code, 1);
}

TEST(Cli, Fnv1a) {
    EXPECT_EQ(tep::cli::fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(tep::cli::fnv1a_hex("a"), "af63dc4c8601ec8c");
}
