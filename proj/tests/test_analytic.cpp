#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "tep/analytic.hpp"
#include "tep/welfare.hpp"

using namespace tep;
using namespace tep::analytic;

namespace {

const LinearCurve kD1{10, -1}, kS1{2, 2}, kD2{10, -2}, kS2{1, 1};
const LinearCurve kSupply{0, 1}, kDemand{6, -1};

TwoNodeSolution at_cost(double c) { return solve_two_node(kD1, kS1, kD2, kS2, MarginalCost{c}); }

}  // namespace

TEST(TwoNode, ImportExportCurves) {
    // I1(pi) = 11 - 1.5 pi, E2(pi) = 1.5 pi - 6
    for (double p : {4.5, 5.0, 6.0, 7.0}) {
        EXPECT_NEAR(import_at(kD1, kS1, p), 11 - 1.5 * p, 1e-12);
        EXPECT_NEAR(export_at(kD2, kS2, p), 1.5 * p - 6, 1e-12);
    }
}

TEST(TwoNode, FreeTradeAtZeroCost) {
    const auto s = at_cost(0.0);
    EXPECT_NEAR(s.autarky_price1, 22.0 / 3.0, 1e-12);
    EXPECT_NEAR(s.autarky_price2, 4.0, 1e-12);
    EXPECT_NEAR(s.common_price, 17.0 / 3.0, 1e-12);
    EXPECT_NEAR(s.free_flow, 2.5, 1e-12);
    EXPECT_NEAR(s.optimal_capacity, 2.5, 1e-9);
}

TEST(TwoNode, NoInvestmentAboveAutarkySpread) {
    EXPECT_EQ(at_cost(10.0 / 3.0).optimal_capacity, 0.0);
    EXPECT_EQ(at_cost(4.0).optimal_capacity, 0.0);
    EXPECT_GT(at_cost(10.0 / 3.0 - 1e-3).optimal_capacity, 0.0);
}

TEST(TwoNode, GivenCapacity) {
    const auto s = solve_two_node(kD1, kS1, kD2, kS2, Capacity{1.53});
    // invert I1 and E2 at f = 1.53
    EXPECT_NEAR(s.price1, (11 - 1.53) / 1.5, 1e-12);
    EXPECT_NEAR(s.price2, (1.53 + 6) / 1.5, 1e-12);
    EXPECT_NEAR(s.price1, 6.313, 1e-3);
    EXPECT_NEAR(s.price2, 5.020, 1e-3);
    EXPECT_NEAR(s.congestion_rent, (s.price1 - s.price2) * 1.53, 1e-12);
}

TEST(TwoNode, ZeroProfitAtOptimum) {
    for (double c : {0.0, 0.5, 1.0, 1.3, 2.0, 3.0}) {
        const auto s = at_cost(c);
        // closed form: spread (17 - 3x)/... gives x* = (10/3 - C) * 3 / 4 for this pair
        EXPECT_NEAR(s.optimal_capacity, std::max(0.0, (10.0 / 3.0 - c) * 0.75), 1e-9) << c;
        EXPECT_NEAR(s.congestion_rent, c * s.optimal_capacity, 1e-9) << c;
    }
}

TEST(TwoNode, AreaIdentity) {
    for (double cap : {0.3, 1.0, 1.53, 2.5, 4.0}) {
        const auto s = solve_two_node(kD1, kS1, kD2, kS2, Capacity{cap});
        EXPECT_NEAR(s.gain1, s.gain1_area, 1e-12) << cap;
        EXPECT_NEAR(s.gain2, s.gain2_area, 1e-12) << cap;
    }
}

TEST(ThreeNode, TableOne) {
    const auto s = solve_three_node(kSupply, kDemand, kDemand);
    EXPECT_NEAR(s.before.price, 3.0, 1e-12);
    EXPECT_NEAR(s.before.tw[0], 4.5, 1e-12);
    EXPECT_NEAR(s.before.tw[1], 4.5, 1e-12);
    EXPECT_NEAR(s.before.tw[2], 0.0, 1e-12);
    EXPECT_NEAR(s.before.system, 9.0, 1e-12);
    EXPECT_NEAR(s.after.price, 4.0, 1e-12);
    EXPECT_NEAR(s.after.tw[0], 8.0, 1e-12);
    EXPECT_NEAR(s.after.tw[1], 2.0, 1e-12);
    EXPECT_NEAR(s.after.tw[2], 2.0, 1e-12);
    EXPECT_NEAR(s.after.system, 12.0, 1e-12);
    EXPECT_NEAR(s.after.ps[0], 8.0, 1e-12);
    EXPECT_NEAR(s.after.cs[1], 2.0, 1e-12);
    EXPECT_NEAR(s.delta_tw[0], 3.5, 1e-12);
    EXPECT_NEAR(s.delta_tw[1], -2.5, 1e-12);
    EXPECT_NEAR(s.delta_tw[2], 2.0, 1e-12);
}

TEST(ThreeNode, EmptyThirdNodeChangesNothing) {
    const auto s = solve_three_node(kSupply, kDemand, LinearCurve{0, -1});
    EXPECT_NEAR(s.after.price, s.before.price, 1e-12);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.after.tw[i], s.before.tw[i], 1e-12);
}

TEST(Oracles, EquilibriumReproducesTwoNode) {
    for (double c : {0.0, 1.0, 1.3, 4.0}) {
        const auto a = at_cost(c);
        const auto inst = tep::testing::two_node(c);
        const auto s = solve(inst.network, inst.scenarios, ExpansionMask::allow_all(inst.network));
        EXPECT_NEAR(s.x[0], a.optimal_capacity, 1e-6) << c;
        const auto at_x = solve_two_node(kD1, kS1, kD2, kS2, Capacity{a.optimal_capacity});
        EXPECT_NEAR(s.price(0, 0, 0), at_x.price1, 1e-6) << c;
        EXPECT_NEAR(s.price(0, 1, 0), at_x.price2, 1e-6) << c;
        EXPECT_NEAR(s.f(0, 0, 0), at_x.flow, 1e-6) << c;
        // welfare against autarky
        const auto autarky = solve(inst.network, inst.scenarios, ExpansionMask::deny_all(inst.network));
        const auto d = delta(account(s, inst.network, inst.scenarios), account(autarky, inst.network, inst.scenarios));
        EXPECT_NEAR(d.expected(0) + d.expected(1), at_x.gain1 + at_x.gain2 + at_x.congestion_rent - c * a.optimal_capacity,
                    1e-6);
    }
}

TEST(Oracles, EquilibriumReproducesThreeNode) {
    const auto a = solve_three_node(kSupply, kDemand, kDemand);
    const auto c = tep::testing::three_node();
    const auto with = solve(c.network, c.scenarios, ExpansionMask::allow_all(c.network));
    const auto without = solve(c.network, c.scenarios, ExpansionMask::deny_all(c.network));
    const auto aw = account(with, c.network, c.scenarios), ao = account(without, c.network, c.scenarios);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(aw.tw(static_cast<Eigen::Index>(i), 0), a.after.tw[i], 1e-6);
        EXPECT_NEAR(ao.tw(static_cast<Eigen::Index>(i), 0), a.before.tw[i], 1e-6);
    }
    EXPECT_NEAR(with.price(0, 2, 0), a.after.price, 1e-6);
    EXPECT_NEAR(without.price(0, 1, 0), a.before.price, 1e-6);
}
