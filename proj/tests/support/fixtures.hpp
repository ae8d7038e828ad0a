#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tep/compensation.hpp"
#include "tep/equilibrium.hpp"
#include "tep/welfare.hpp"

namespace tep::testing {

struct Case {
    Network network;
    ScenarioSet scenarios;
};

std::filesystem::path data_dir();

/// One scenario, one period, season "all", period weight 1.
ScenarioSet single_period(const std::vector<DemandCurve>& curves);

/// Supply node N1 (S: pi = q), demand nodes N2, N3 (pi = 6 - d). L12 unlimited,
/// L23 starts at zero capacity and is expandable at zero cost.
Case three_node();

/// D1: pi = 10 - d, S1: pi = 2 + 2q, D2: pi = 10 - 2d, S2: pi = 1 + q. Line L21
/// from N2 to N1, zero initial capacity, expandable at marginal cost c.
Case two_node(double c);

/// The two-scenario PPA example, as a delta plus line observables.
struct PpaExample {
    DeltaWelfare delta;
    LineObservables obs;
};
PpaExample ppa_example();

struct RandomShape {
    std::size_t max_nodes = 5;
    std::size_t max_scenarios = 4;
    std::size_t max_periods = 6;
    bool generator_investment = true;
    bool energy_limits = true;
    bool renewables = true;
};

/// Random feasible instance. Every node has a downward-sloping demand curve so
/// the dispatch is always feasible; the network is connected.
Case random_case(std::mt19937_64& rng, const RandomShape& shape = {});

/// Objective of the best point found by a coarse-to-fine grid over line flows,
/// for single-scenario, single-period instances whose only investments are in
/// lines. Each node's demand and generation follow from its import by bisection
/// on the local price, and line investment is the smallest that carries the flow.
double brute_force_objective(const Case& c, const ExpansionMask& mask, double resolution = 1e-7);

/// Random delta with the given countries and scenario count, uniform probabilities.
DeltaWelfare random_delta(std::mt19937_64& rng, const std::vector<std::string>& countries, std::size_t scenarios);

/// Observables for a line between the first two countries with random positive flows.
LineObservables random_observables(std::mt19937_64& rng, const std::string& from, const std::string& to,
                                   const std::vector<double>& probabilities, std::size_t periods);

}  // namespace tep::testing
