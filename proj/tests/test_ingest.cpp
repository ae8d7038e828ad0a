#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "tep/errors.hpp"
#include "tep/ingest.hpp"

using namespace tep;
namespace fs = std::filesystem;
using namespace std::chrono;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tep_ingest_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

TimeSeriesTable synthetic_table(int first_year, int years, std::size_t nodes) {
    TimeSeriesTable t;
    const sys_seconds start = sys_days{year{first_year} / January / 1};
    const sys_seconds stop = sys_days{year{first_year + years} / January / 1};
    for (sys_seconds h = start; h < stop; h += hours{1}) t.hours.push_back(h);
    for (std::size_t n = 0; n < nodes; ++n) t.nodes.push_back("N" + std::to_string(n));
    const auto H = static_cast<Eigen::Index>(t.hours.size()), N = static_cast<Eigen::Index>(nodes);
    t.price.resize(H, N);
    t.demand.resize(H, N);
    for (Eigen::Index h = 0; h < H; ++h)
        for (Eigen::Index n = 0; n < N; ++n) {
            t.price(h, n) = 30.0 + static_cast<double>((h * 7 + n) % 40) - 5.0;
            t.demand(h, n) = 1000.0 + static_cast<double>(h % 24) * 10.0 + static_cast<double>(n);
        }
    t.renewables = {"W"};
    t.factors.resize(H, 1);
    for (Eigen::Index h = 0; h < H; ++h) t.factors(h, 0) = static_cast<double>(h % 100) / 100.0;
    return t;
}

}  // namespace

TEST(DemandCurveFit, Examples) {
    auto a = build_demand_curve(50, 1000, -0.05);
    EXPECT_NEAR(a.slope, -1.0, 1e-12);
    EXPECT_NEAR(a.intercept, 1050.0, 1e-9);
    EXPECT_NEAR(a.slope * 1000 + a.intercept, 50.0, 1e-9);

    auto b = build_demand_curve(100, 500, -0.05);
    EXPECT_NEAR(b.slope, -4.0, 1e-12);
    EXPECT_NEAR(b.intercept, 2100.0, 1e-9);
    EXPECT_NEAR(b.slope * 500 + b.intercept, 100.0, 1e-9);

    // negative historical price: fitted through |P|
    auto c = build_demand_curve(-10, 1000, -0.05);
    EXPECT_NEAR(c.slope, -0.2, 1e-12);
    EXPECT_NEAR(c.intercept, 210.0, 1e-9);
    EXPECT_NEAR(c.price_at(1000), 10.0, 1e-9);
}

TEST(DemandCurveFit, Errors) {
    EXPECT_THROW(build_demand_curve(50, 1000, 0.0), DomainError);
    EXPECT_THROW(build_demand_curve(50, 1000, 0.3), DomainError);
    EXPECT_THROW(build_demand_curve(50, 0, -0.05), DegenerateInputError);
    EXPECT_THROW(build_demand_curve(50, -3, -0.05), DegenerateInputError);
    EXPECT_THROW(build_demand_curve(0, 1000, -0.05), DegenerateInputError);
}

TEST(DemandCurveFit, PointAndElasticityProperty) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> price(-200, 400), demand(1, 80000), eps(-2.0, -0.001);
    for (int i = 0; i < 2000; ++i) {
        const double p = price(rng), d = demand(rng), e = eps(rng);
        if (p == 0.0) continue;
        const DemandCurve dc = build_demand_curve(p, d, e);
        ASSERT_LT(dc.slope, 0.0);
        EXPECT_NEAR(dc.price_at(d), std::abs(p), 1e-12 * std::max(1.0, std::abs(dc.intercept)));
        // dD/dP * P / D at the anchor point
        const double local = (1.0 / dc.slope) * std::abs(p) / d;
        EXPECT_NEAR(local, e, 1e-9 * std::abs(e));
    }
}

TEST(Seasons, CalendarMonths) {
    auto at = [](int m) { return sys_seconds{sys_days{year{2019} / month{static_cast<unsigned>(m)} / 10}}; };
    EXPECT_EQ(season_of(at(12)), Season::Winter);
    EXPECT_EQ(season_of(at(2)), Season::Winter);
    EXPECT_EQ(season_of(at(3)), Season::Spring);
    EXPECT_EQ(season_of(at(8)), Season::Summer);
    EXPECT_EQ(season_of(at(11)), Season::Autumn);
}

TEST(Sampling, FiveYearsGives672Periods) {
    const auto table = synthetic_table(2015, 5, 1);
    SamplingConfig cfg;
    cfg.n_scenarios = 30;
    cfg.hours_per_season = 168;
    const auto s = sample_scenarios(table, cfg);
    EXPECT_EQ(s.scenarios.num_scenarios(), 30u);
    EXPECT_EQ(s.scenarios.num_periods(), 672u);
    EXPECT_NEAR(s.scenarios.period_weight, 8760.0 / 672.0, 1e-12);
    EXPECT_TRUE(validate(Network{{{"N0", "X", {}, {}}}, {}, {}, {}}, s.scenarios).ok());
}

TEST(Sampling, BlocksStayInsideTheirSeason) {
    const auto table = synthetic_table(2019, 1, 2);
    SamplingConfig cfg;
    cfg.n_scenarios = 3;
    cfg.hours_per_season = 24;
    cfg.seed = 7;
    const auto s = sample_scenarios(table, cfg);
    for (std::size_t w = 0; w < 3; ++w)
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t start = s.block_starts[w][k];
            ASSERT_LT(start + 23, table.num_hours());
            EXPECT_EQ(static_cast<std::size_t>(season_of(table.hours[start])), k);
            EXPECT_EQ(static_cast<std::size_t>(season_of(table.hours[start + 23])), k);
            EXPECT_EQ(table.hours[start + 23] - table.hours[start], hours{23});
            // demand curve of period k*24 passes through the historical point
            const auto& dc = s.scenarios.demand(w, 1, k * 24);
            EXPECT_NEAR(dc.price_at(table.demand(static_cast<Eigen::Index>(start), 1)),
                        std::abs(table.price(static_cast<Eigen::Index>(start), 1)), 1e-9);
            EXPECT_DOUBLE_EQ(s.renewable_profiles[0](static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(k * 24 + 5)),
                             table.factors(static_cast<Eigen::Index>(start + 5), 0));
        }
}

TEST(Sampling, Deterministic) {
    const auto table = synthetic_table(2019, 1, 2);
    SamplingConfig cfg;
    cfg.n_scenarios = 5;
    cfg.hours_per_season = 12;
    cfg.seed = 99;
    const auto a = sample_scenarios(table, cfg), b = sample_scenarios(table, cfg);
    EXPECT_EQ(a.block_starts, b.block_starts);
    EXPECT_TRUE(a.scenarios.demand == b.scenarios.demand);
    cfg.seed = 100;
    const auto c = sample_scenarios(table, cfg);
    EXPECT_NE(a.block_starts, c.block_starts);
}

TEST(Sampling, YearWindowAndShortData) {
    const auto table = synthetic_table(2018, 2, 1);
    SamplingConfig cfg;
    cfg.n_scenarios = 20;
    cfg.hours_per_season = 48;
    cfg.year_first = 2019;
    cfg.year_last = 2019;
    const auto s = sample_scenarios(table, cfg);
    for (const auto& row : s.block_starts)
        for (auto start : row) EXPECT_EQ(year_month_day{floor<days>(table.hours[start])}.year(), year{2019});
    cfg.hours_per_season = 24 * 100;  // longer than any season
    EXPECT_THROW(sample_scenarios(table, cfg), InputError);
}

TEST(Config, ParsesKeyValues) {
    const auto cfg = Config::parse("# comment\nseed = 5\n\nelasticity=-0.1  # trailing\nname = x y\n");
    EXPECT_EQ(cfg.integer("seed", 0), 5);
    EXPECT_DOUBLE_EQ(cfg.number("elasticity", 0.0), -0.1);
    EXPECT_EQ(cfg.get_or("name", ""), "x y");
    EXPECT_EQ(cfg.get_or("missing", "d"), "d");
    EXPECT_EQ(cfg.sampling().seed, 5u);
    EXPECT_THROW(Config::parse("novalue\n"), ParseError);
    EXPECT_THROW(Config::parse("seed = abc\n").integer("seed", 0), ParseError);
}

TEST(LoadNetwork, ThreeNodeFixture) {
    const auto dir = tep::testing::data_dir() / "three_node";
    const auto inst = load_network(dir, Config::read(dir / "config.txt"));
    EXPECT_EQ(inst.network.nodes.size(), 3u);
    EXPECT_EQ(inst.network.lines.size(), 2u);
    EXPECT_TRUE(std::isinf(inst.network.lines[0].f_max));
    EXPECT_EQ(inst.scenarios.num_scenarios(), 1u);
    EXPECT_DOUBLE_EQ(inst.scenarios.demand(0, 2, 0).intercept, 6.0);
}

TEST(LoadNetwork, SyntheticFixture) {
    const auto dir = tep::testing::data_dir() / "synthetic_ne";
    auto cfg = Config::read(dir / "config.txt");
    cfg.set("n_scenarios", "2");
    const auto inst = load_network(dir, cfg);
    EXPECT_EQ(inst.network.nodes.size(), 10u);
    EXPECT_TRUE(inst.network.line_index("NO2-DE").has_value());
    EXPECT_EQ(inst.scenarios.num_periods(), 4u * 24u);
    EXPECT_TRUE(inst.sample.has_value());
    // per-scenario hydro budgets
    const auto g = *inst.network.generator_index("HYD_NO2");
    EXPECT_EQ(inst.network.generators[g].q_max_seasonal.rows(), 2);
}

TEST(LoadNetwork, UnknownNodeNamesIdAndRow) {
    const auto src = tep::testing::data_dir() / "three_node";
    const auto dir = scratch("unknown_node");
    for (const auto& e : fs::directory_iterator(src)) fs::copy_file(e.path(), dir / e.path().filename());
    {
        std::ofstream f(dir / "generators.csv", std::ios::trunc);
        f << "gen_id,node_id,g_max_mw,inv_cost_eur_per_mw_yr,expandable\n";
        f << "G1,N1,inf,0,0\n";
        f << "G2,N9,10,0,0\n";
    }
    try {
        load_network(dir, Config::read(dir / "config.txt"));
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("N9"), std::string::npos);
        EXPECT_EQ(e.row(), 3u);
        EXPECT_NE(e.file().find("generators.csv"), std::string::npos);
    }
}

TEST(LoadNetwork, MissingDirectory) {
    EXPECT_THROW(load_network("/nonexistent/tep"), InputError);
}

TEST(TimeSeries, ReadsLongFormat) {
    const auto dir = scratch("ts");
    {
        std::ofstream f(dir / "timeseries.csv");
        f << "timestamp_iso8601,node_id,price_eur_mwh,demand_mw,W:factor\n";
        f << "2019-03-01T00:00:00Z,A,10,100,0.5\n";
        f << "2019-03-01T00:00:00Z,B,-3,200,0.5\n";
        f << "2019-03-01T01:00:00Z,A,11,110,0.25\n";
        f << "2019-03-01T01:00:00Z,B,12,210,0.25\n";
    }
    const auto t = TimeSeriesTable::read(dir / "timeseries.csv");
    ASSERT_EQ(t.num_hours(), 2u);
    EXPECT_EQ(t.nodes, (std::vector<Id>{"A", "B"}));
    EXPECT_DOUBLE_EQ(t.price(0, 1), -3.0);
    EXPECT_DOUBLE_EQ(t.demand(1, 1), 210.0);
    EXPECT_EQ(t.renewables, std::vector<Id>{"W"});
    EXPECT_DOUBLE_EQ(t.factors(1, 0), 0.25);
    {
        std::ofstream f(dir / "bad.csv");
        f << "timestamp_iso8601,node_id,price_eur_mwh,demand_mw\n";
        f << "2019-13-01T00:00:00Z,A,10,100\n";
    }
    EXPECT_THROW(TimeSeriesTable::read(dir / "bad.csv"), ParseError);
}
