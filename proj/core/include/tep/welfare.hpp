#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tep/equilibrium.hpp"
#include "tep/model.hpp"

namespace tep {

/// Share of each line's congestion rent and investment cost that goes to the
/// country of its from-node; the to-node country gets the rest.
struct AllocationRule {
    double default_from_share = 0.5;
    std::map<Id, double> from_share;  // per-line overrides

    double share_for(const Id& line) const;
};

/// Annualized welfare per (country, scenario), EUR/yr.
struct WelfareAccount {
    std::vector<std::string> countries;
    std::vector<double> probabilities;
    Eigen::MatrixXd cs, ps, cr, ic, tw;  // countries x scenarios

    std::optional<std::size_t> country_index(const std::string& code) const;
    double expected_tw(std::size_t country) const;
    /// System welfare in one scenario.
    double system_tw(std::size_t scenario) const { return tw.col(static_cast<Eigen::Index>(scenario)).sum(); }
    double expected_system_tw() const;
};

/// Consumer surplus, producer surplus (generators and renewables, before
/// investment cost), allocated congestion rent and investment cost. Throws
/// NonEquilibriumError when the solution fails verify_kkt at kkt_tol.
WelfareAccount account(const DispatchSolution& solution, const Network& network, const ScenarioSet& scenarios,
                       const AllocationRule& allocation = {}, double kkt_tol = 1e-6);

/// Welfare change per (country, scenario) between two plans.
struct DeltaWelfare {
    std::vector<std::string> countries;
    std::vector<double> probabilities;
    Eigen::MatrixXd delta_tw;  // countries x scenarios

    std::size_t num_scenarios() const { return probabilities.size(); }
    std::optional<std::size_t> country_index(const std::string& code) const;
    std::vector<double> row(std::size_t country) const;
    double expected(std::size_t country) const;
    std::vector<double> expected() const;
};

/// with - without, elementwise. Throws InputError when the accounts do not
/// share countries and scenario probabilities.
DeltaWelfare delta(const WelfareAccount& with, const WelfareAccount& without);

void write_welfare_csv(std::ostream& out, const WelfareAccount& account);
void write_delta_csv(std::ostream& out, const DeltaWelfare& delta);
void write_scenarios_csv(std::ostream& out, const std::vector<double>& probabilities);

std::vector<double> read_scenarios_csv(const std::filesystem::path& path);
/// delta.csv plus the scenario probabilities from scenarios.csv.
DeltaWelfare read_delta_csv(const std::filesystem::path& delta_path, const std::vector<double>& probabilities);

}  // namespace tep
