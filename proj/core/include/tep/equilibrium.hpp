#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "tep/model.hpp"
#include "tep/qp_solver.hpp"

namespace tep {

/// Which investment decisions may become positive. Entries are aligned with
/// the network's lines / generators / renewables; units that are not
/// expandable are never invested in regardless of the mask.
struct ExpansionMask {
    std::vector<bool> lines;
    std::vector<bool> generators;
    std::vector<bool> renewables;

    static ExpansionMask allow_all(const Network& network);
    static ExpansionMask deny_all(const Network& network);

    ExpansionMask& set_line(const Network& network, const Id& line, bool allow);
    ExpansionMask& set_generator(const Network& network, const Id& gen, bool allow);
    ExpansionMask& set_renewable(const Network& network, const Id& ren, bool allow);

    friend bool operator==(const ExpansionMask&, const ExpansionMask&) = default;
};

struct ToleranceSet {
    double feasibility = 1e-8;  // absolute, on the equilibrated problem
    double kkt = 1e-6;          // relative to coefficient magnitudes
    int max_iterations = 200;
    /// Seed for the interior-point starting point (0 = default start).
    std::uint64_t solver_seed = 0;
    /// Proximal weight on zero-cost investment columns; selects the smallest
    /// optimal investment when the planner is otherwise indifferent.
    double zero_cost_regularization = 1e-9;
};

enum class RowOrigin { Capacity, EnergyLimit, MarketClearing, FlowUpper, FlowLower };

/// Identifies the model constraint a QP row came from.
struct RowTag {
    RowOrigin origin;
    std::size_t scenario;
    std::size_t unit;    // generator, node, or line index
    std::size_t period;  // period, or season for energy limits
};

/// Column layout of the planner QP. Operational blocks are stored scenario by
/// scenario and period by period; investment columns come last. Missing
/// columns are -1.
class VariableIndex {
public:
    VariableIndex() = default;
    VariableIndex(std::vector<std::size_t> scenarios, std::size_t nodes, std::size_t gens, std::size_t lines,
                  std::size_t periods);

    int d(std::size_t slot, std::size_t n, std::size_t t) const { return block(slot, t) + static_cast<int>(n); }
    int q(std::size_t slot, std::size_t g, std::size_t t) const {
        return block(slot, t) + static_cast<int>(nodes_ + g);
    }
    int f(std::size_t slot, std::size_t l, std::size_t t) const {
        return block(slot, t) + static_cast<int>(nodes_ + gens_ + l);
    }
    int y(std::size_t g) const { return y_[g]; }
    int y_r(std::size_t r) const { return yr_[r]; }
    int x(std::size_t l) const { return x_[l]; }

    std::size_t num_operational() const { return scenarios_.size() * periods_ * (nodes_ + gens_ + lines_); }
    std::size_t num_variables() const { return total_; }
    std::size_t num_d() const { return scenarios_.size() * periods_ * nodes_; }
    std::size_t num_q() const { return scenarios_.size() * periods_ * gens_; }
    std::size_t num_f() const { return scenarios_.size() * periods_ * lines_; }
    std::size_t num_y() const;
    std::size_t num_y_r() const;
    std::size_t num_x() const;

    /// Scenario indices (into the ScenarioSet) covered by the problem, one per slot.
    const std::vector<std::size_t>& scenarios() const { return scenarios_; }

    void add_investment_columns(const Network& network);

private:
    int block(std::size_t slot, std::size_t t) const {
        return static_cast<int>((slot * periods_ + t) * (nodes_ + gens_ + lines_));
    }

    std::vector<std::size_t> scenarios_;
    std::size_t nodes_ = 0, gens_ = 0, lines_ = 0, periods_ = 0;
    std::vector<int> y_, yr_, x_;
    std::size_t total_ = 0;
};

/// The assembled planner problem, in minimization form (negated welfare).
struct QpProblem {
    QuadraticProgram qp;
    VariableIndex index;
    std::vector<RowTag> eq_tags;
    std::vector<RowTag> ineq_tags;
    /// Objective weight (probability times period weight) of each slot.
    std::vector<double> slot_weights;
    ExpansionMask mask;
    std::shared_ptr<const Network> network;
    std::shared_ptr<const ScenarioSet> scenarios;

    std::size_t num_market_clearing_rows() const;
    /// True when the welfare objective is concave (the minimization Hessian is PSD).
    bool concave() const;
};

struct DispatchSolution {
    Grid3<double> q;  // MW (scenario, generator, period)
    Grid3<double> d;  // MW (scenario, node, period)
    Grid3<double> f;  // MW (scenario, line, period)
    std::vector<double> y;    // MW per generator
    std::vector<double> y_r;  // MW per renewable
    std::vector<double> x;    // MW per line

    Grid3<double> price;            // EUR/MWh (scenario, node, period)
    Grid3<double> capacity_dual;    // EUR/MWh (scenario, generator, period)
    Grid3<double> energy_dual;      // EUR/MWh (scenario, generator, season)
    Grid3<double> flow_upper_dual;  // EUR/MWh (scenario, line, period)
    Grid3<double> flow_lower_dual;  // EUR/MWh (scenario, line, period)

    std::vector<double> probabilities;
    double period_weight = 1.0;
    ExpansionMask mask;
    double objective = 0.0;     // EUR/yr, expected net welfare
    double kkt_residual = 0.0;  // largest scaled residual from verify_kkt
    int iterations = 0;

    std::size_t num_scenarios() const { return probabilities.size(); }
    std::size_t num_periods() const { return d.extent(2); }
};

struct ActorResiduals {
    double stationarity = 0.0;
    double complementarity = 0.0;
    double primal = 0.0;
};

struct KktReport {
    ActorResiduals generator;
    ActorResiduals renewable;
    ActorResiduals consumer;
    ActorResiduals tso;
    ActorResiduals market_clearing;
    double price_scale = 1.0;
    double quantity_scale = 1.0;

    /// Largest residual divided by its scale.
    double max_scaled() const;
    bool within(double tol) const { return max_scaled() <= tol; }
};

QpProblem assemble(const Network& network, const ScenarioSet& scenarios, const ExpansionMask& mask,
                   const ToleranceSet& tol = {});

/// Solves the planner QP. Zero-probability scenarios are excluded from the
/// planning problem and re-dispatched afterwards against the chosen plan.
DispatchSolution solve(const QpProblem& problem, const ToleranceSet& tol = {});

/// Convenience: assemble + solve.
DispatchSolution solve(const Network& network, const ScenarioSet& scenarios, const ExpansionMask& mask,
                       const ToleranceSet& tol = {});

/// Recomputes every actor's optimality conditions from the primal-dual point,
/// using only the instance data and the solution record.
KktReport verify_kkt(const Network& network, const ScenarioSet& scenarios, const DispatchSolution& solution);

struct CongestionRent {
    std::vector<double> per_scenario;  // EUR/yr
    double expected = 0.0;
};

CongestionRent congestion_rent(const Network& network, const DispatchSolution& solution, const Id& line);

/// Expected net welfare of a primal point, evaluated from the instance data.
double welfare_objective(const Network& network, const ScenarioSet& scenarios, const DispatchSolution& solution);

// solution.csv: var_name,scenario,period,value (investments leave scenario/period empty)
// prices.csv:   scenario,node,period,price_eur_mwh
void write_solution_csv(std::ostream& out, const Network& network, const DispatchSolution& solution);
void write_prices_csv(std::ostream& out, const Network& network, const DispatchSolution& solution);

/// Reads the primal part of solution.csv back into a record shaped for the instance.
DispatchSolution read_solution_csv(const std::filesystem::path& path, const Network& network,
                                   const ScenarioSet& scenarios);
Grid3<double> read_prices_csv(const std::filesystem::path& path, const Network& network,
                              const ScenarioSet& scenarios);

}  // namespace tep
