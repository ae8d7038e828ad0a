#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "tep/errors.hpp"

using namespace tep;
using tep::testing::three_node;

TEST(Validate, ThreeNodeIsClean) {
    const auto c = three_node();
    const auto rep = validate(c.network, c.scenarios);
    EXPECT_TRUE(rep.ok()) << ::testing::PrintToString(rep.messages());
    EXPECT_NO_THROW(require_valid(c.network, c.scenarios));
}

TEST(Validate, ProbabilitiesMustSumToOne) {
    auto c = three_node();
    c.scenarios.probabilities = {0.6, 0.6};
    c.scenarios.demand = Grid3<DemandCurve>(2, 3, 1, DemandCurve{-1.0, 6.0});
    const auto rep = validate(c.network, c.scenarios);
    EXPECT_TRUE(rep.has("probabilities_sum"));
    EXPECT_THROW(require_valid(c.network, c.scenarios), ValidationError);
}

TEST(Validate, SelfLoop) {
    auto c = three_node();
    c.network.lines[1].to_node = "N2";
    EXPECT_TRUE(validate(c.network, c.scenarios).has("self_loop"));
}

TEST(Validate, ReportsEachProblem) {
    auto c = three_node();
    c.network.generators[0].node = "N9";
    c.network.lines[0].f_max = -1.0;
    c.scenarios.demand(0, 1, 0).slope = 0.5;
    c.scenarios.probabilities = {-1.0};
    const auto rep = validate(c.network, c.scenarios);
    EXPECT_TRUE(rep.has("unknown_node"));
    EXPECT_TRUE(rep.has("negative_capacity"));
    EXPECT_TRUE(rep.has("demand_slope"));
    EXPECT_TRUE(rep.has("negative_probability"));
}

TEST(Validate, SeasonPartition) {
    auto c = three_node();
    c.scenarios.seasons = {{0}, {0}};
    c.scenarios.season_labels = {"a", "b"};
    EXPECT_TRUE(validate(c.network, c.scenarios).has("season_partition"));
}

TEST(Validate, ExpandableNeedsFiniteCapacity) {
    auto c = three_node();
    c.network.generators[0].expandable = true;
    EXPECT_TRUE(validate(c.network, c.scenarios).has("unbounded_expansion"));
}

TEST(Validate, IdempotentAndPure) {
    auto c = three_node();
    c.network.lines[1].to_node = "N2";
    c.scenarios.probabilities = {0.3};
    const Network before = c.network;
    const auto a = validate(c.network, c.scenarios);
    const auto b = validate(c.network, c.scenarios);
    EXPECT_EQ(a.messages(), b.messages());
    EXPECT_EQ(c.network.lines[1].to_node, before.lines[1].to_node);
    EXPECT_EQ(c.scenarios.probabilities, std::vector<double>{0.3});
}

TEST(DemandCurve, InverseAndClamp) {
    const DemandCurve dc{-2.0, 10.0};
    EXPECT_DOUBLE_EQ(dc.price_at(3.0), 4.0);
    EXPECT_DOUBLE_EQ(dc.demand_at(4.0), 3.0);
    EXPECT_DOUBLE_EQ(dc.demand_at(12.0), 0.0);
}

TEST(Network, CountriesSortedUnique) {
    auto c = three_node();
    c.network.nodes.push_back({"N4", "C1", {}, {}});
    EXPECT_EQ(c.network.countries(), (std::vector<std::string>{"C1", "C2", "C3"}));
    EXPECT_EQ(c.network.country_of("N4"), "C1");
}
