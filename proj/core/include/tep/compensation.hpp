#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tep/equilibrium.hpp"
#include "tep/welfare.hpp"

namespace tep {

/// Entitled fraction of the expected aggregate gain for each participant.
struct ShareRule {
    std::vector<std::string> countries;
    std::vector<double> shares;

    static ShareRule equal(std::vector<std::string> countries);
    /// "NO:0.5,DE:0.5", or "equal:NO,DE".
    static ShareRule parse(const std::string& text);
    /// Throws DomainError unless shares are nonnegative and sum to 1 within 1e-12.
    void check() const;
};

/// Flow through the designated line and the prices at its ends.
struct LineObservables {
    std::string from_country;
    std::string to_country;
    std::vector<double> probabilities;
    double period_weight = 1.0;
    Eigen::MatrixXd flow;        // scenarios x periods, MW, positive from -> to
    Eigen::MatrixXd price_from;  // EUR/MWh
    Eigen::MatrixXd price_to;

    std::size_t num_scenarios() const { return probabilities.size(); }
    /// Per-scenario weighted sum of flow (MWh/yr).
    std::vector<double> flow_sum() const;
    /// Per-scenario weighted sum of flow times the midpoint price (EUR/yr).
    std::vector<double> flow_value() const;
    /// Period-averaged price per scenario at one end.
    std::vector<double> mean_price(bool from_end) const;
};

LineObservables line_observables(const Network& network, const DispatchSolution& solution, const Id& line);

void write_line_observables_csv(std::ostream& out, const LineObservables& obs);
LineObservables read_line_observables_csv(const std::filesystem::path& path, const std::vector<double>& probabilities);

/// Payment C[i][w] to country i in scenario w; positive means the country receives.
struct CompensationSchedule {
    std::string mechanism;
    std::vector<std::string> countries;
    std::vector<double> probabilities;
    Eigen::MatrixXd amounts;  // countries x scenarios
    std::vector<std::pair<std::string, double>> parameters;

    std::vector<double> row(std::size_t country) const;
    double expected(std::size_t country) const;
    /// Sum over countries in one scenario.
    double balance(std::size_t scenario) const;
};

/// Expected transfer t_i = lambda_i * sum_j E[dTW_j] - E[dTW_i], aligned with rule.countries.
std::vector<double> targets(const DeltaWelfare& delta, const ShareRule& rule);

CompensationSchedule no_compensation(const ShareRule& rule, const std::vector<double>& probabilities);

CompensationSchedule lump_sum(const ShareRule& rule, const std::vector<double>& targets,
                              const std::vector<double>& probabilities);

/// Fixed-price contract for `base` on its trade through the line. The other
/// end's country pays the negated amount. Throws CalibrationError when the
/// expected flow is zero and InputError when `base` is not at either end.
CompensationSchedule ppa(const DeltaWelfare& delta, const LineObservables& obs, const std::string& base,
                         double target);

CompensationSchedule flow_mech(const ShareRule& rule, const std::vector<double>& targets, const LineObservables& obs);
CompensationSchedule value_mech(const ShareRule& rule, const std::vector<double>& targets, const LineObservables& obs);
CompensationSchedule ideal_mech(const DeltaWelfare& delta, const ShareRule& rule);

/// Net welfare after compensation, for the schedule's countries.
struct NetWelfare {
    std::vector<std::string> countries;
    std::vector<double> probabilities;
    Eigen::MatrixXd ntw;  // countries x scenarios

    std::vector<double> row(std::size_t country) const;
};

NetWelfare apply(const DeltaWelfare& delta, const CompensationSchedule& schedule);

void write_compensation_csv(std::ostream& out, const std::vector<CompensationSchedule>& schedules);
void write_parameters_csv(std::ostream& out, const std::vector<CompensationSchedule>& schedules);

}  // namespace tep
