#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "tep/errors.hpp"

using namespace tep;

namespace {

struct ThreeNodeAccounts {
    WelfareAccount with, without;
};

ThreeNodeAccounts three_node_accounts() {
    const auto c = tep::testing::three_node();
    const auto with = solve(c.network, c.scenarios, ExpansionMask::allow_all(c.network));
    const auto without = solve(c.network, c.scenarios, ExpansionMask::deny_all(c.network));
    return {account(with, c.network, c.scenarios), account(without, c.network, c.scenarios)};
}

double rel(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

}  // namespace

TEST(Account, ThreeNodeSurpluses) {
    const auto a = three_node_accounts();
    ASSERT_EQ(a.with.countries, (std::vector<std::string>{"C1", "C2", "C3"}));
    EXPECT_NEAR(a.with.ps(0, 0), 8.0, 1e-6);
    EXPECT_NEAR(a.with.cs(1, 0), 2.0, 1e-6);
    EXPECT_NEAR(a.with.cs(2, 0), 2.0, 1e-6);
    EXPECT_NEAR(a.with.cs(0, 0), 0.0, 1e-6);
    // zero-cost line at a common price carries no rent
    EXPECT_NEAR(a.with.cr.cwiseAbs().sum(), 0.0, 1e-6);
    EXPECT_NEAR(a.without.tw(0, 0), 4.5, 1e-6);
    EXPECT_NEAR(a.without.tw(1, 0), 4.5, 1e-6);
    EXPECT_NEAR(a.without.tw(2, 0), 0.0, 1e-6);
}

TEST(Account, SumsToObjective) {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 10; ++k) {
        const auto c = tep::testing::random_case(rng);
        const auto s = solve(c.network, c.scenarios, ExpansionMask::allow_all(c.network));
        const auto acc = account(s, c.network, c.scenarios);
        EXPECT_NEAR(acc.expected_system_tw(), s.objective, rel(s.objective));
    }
}

TEST(Account, CongestionRentShareIsHalfOfInvestment) {
    const double cost = 1.3;
    const auto c = tep::testing::two_node(cost);
    const auto s = solve(c.network, c.scenarios, ExpansionMask::allow_all(c.network));
    const auto acc = account(s, c.network, c.scenarios);
    const double x = s.x[0];
    ASSERT_GT(x, 0.0);
    for (Eigen::Index i = 0; i < 2; ++i) {
        EXPECT_NEAR(acc.cr(i, 0), 0.5 * cost * x, 1e-5);
        EXPECT_NEAR(acc.ic(i, 0), 0.5 * cost * x, 1e-5);
    }
}

TEST(Account, AllocationDoesNotChangeTotals) {
    std::mt19937_64 rng(12);
    for (int k = 0; k < 8; ++k) {
        const auto c = tep::testing::random_case(rng);
        const auto s = solve(c.network, c.scenarios, ExpansionMask::allow_all(c.network));
        AllocationRule skew;
        skew.default_from_share = 0.9;
        if (!c.network.lines.empty()) skew.from_share[c.network.lines[0].id] = 0.0;
        const auto a = account(s, c.network, c.scenarios);
        const auto b = account(s, c.network, c.scenarios, skew);
        for (std::size_t w = 0; w < c.scenarios.num_scenarios(); ++w)
            EXPECT_NEAR(a.system_tw(w), b.system_tw(w), rel(a.system_tw(w)));
    }
}

TEST(Account, SurplusesNonnegativeWithoutRenewables) {
    std::mt19937_64 rng(13);
    tep::testing::RandomShape shape;
    shape.renewables = false;  // must-take output can be sold below cost
    for (int k = 0; k < 10; ++k) {
        const auto c = tep::testing::random_case(rng, shape);
        const auto s = solve(c.network, c.scenarios, ExpansionMask::allow_all(c.network));
        const auto acc = account(s, c.network, c.scenarios);
        EXPECT_GE(acc.cs.minCoeff(), -1e-6);
        EXPECT_GE(acc.ps.minCoeff(), -1e-6);
    }
}

TEST(Account, RejectsNonEquilibrium) {
    const auto c = tep::testing::three_node();
    auto s = solve(c.network, c.scenarios, ExpansionMask::allow_all(c.network));
    s.price(0, 1, 0) += 1.0;
    EXPECT_THROW(account(s, c.network, c.scenarios), NonEquilibriumError);
}

TEST(Delta, ThreeNode) {
    const auto a = three_node_accounts();
    const auto d = delta(a.with, a.without);
    EXPECT_NEAR(d.expected(0), 3.5, 1e-6);
    EXPECT_NEAR(d.expected(1), -2.5, 1e-6);
    EXPECT_NEAR(d.expected(2), 2.0, 1e-6);
}

TEST(Delta, IdenticalAccountsGiveZero) {
    const auto a = three_node_accounts();
    EXPECT_EQ(delta(a.with, a.with).delta_tw.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Delta, AntisymmetricAndSumsToSystemChange) {
    std::mt19937_64 rng(14);
    for (int k = 0; k < 6; ++k) {
        const auto c = tep::testing::random_case(rng);
        const auto s1 = solve(c.network, c.scenarios, ExpansionMask::allow_all(c.network));
        const auto s0 = solve(c.network, c.scenarios, ExpansionMask::deny_all(c.network));
        const auto a1 = account(s1, c.network, c.scenarios), a0 = account(s0, c.network, c.scenarios);
        const auto fwd = delta(a1, a0), back = delta(a0, a1);
        EXPECT_EQ((fwd.delta_tw + back.delta_tw).cwiseAbs().maxCoeff(), 0.0);
        double sum = 0.0;
        for (double e : fwd.expected()) sum += e;
        EXPECT_NEAR(sum, s1.objective - s0.objective, rel(s1.objective));
    }
}

TEST(Delta, MismatchedAccountsThrow) {
    auto a = three_node_accounts();
    auto b = a.without;
    b.countries[0] = "ZZ";
    EXPECT_THROW(delta(a.with, b), InputError);
}

TEST(DeltaCsv, RoundTrip) {
    const auto ex = tep::testing::ppa_example();
    std::ostringstream d, s;
    write_delta_csv(d, ex.delta);
    write_scenarios_csv(s, ex.delta.probabilities);
    const auto dir = std::filesystem::temp_directory_path() / "tep_delta_csv";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "delta.csv") << d.str();
    std::ofstream(dir / "scenarios.csv") << s.str();
    const auto probs = read_scenarios_csv(dir / "scenarios.csv");
    const auto back = read_delta_csv(dir / "delta.csv", probs);
    EXPECT_EQ(back.countries, ex.delta.countries);
    EXPECT_EQ(back.probabilities, ex.delta.probabilities);
    EXPECT_TRUE(back.delta_tw == ex.delta.delta_tw);
}

TEST(WelfareCsv, Header) {
    const auto a = three_node_accounts();
    std::ostringstream out;
    write_welfare_csv(out, a.with);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "country,scenario,cs,ps,cr_share,inv_cost,tw");
}
