#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tep {

using Id = std::string;

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Dense row-major 3-index table, used for data indexed by (scenario, node, period).
template <class T>
class Grid3 {
public:
    Grid3() = default;
    Grid3(std::size_t n0, std::size_t n1, std::size_t n2, const T& fill = T{})
        : n0_(n0), n1_(n1), n2_(n2), data_(n0 * n1 * n2, fill) {}

    T& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * n1_ + j) * n2_ + k]; }
    const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * n1_ + j) * n2_ + k];
    }

    std::size_t extent(int dim) const { return dim == 0 ? n0_ : dim == 1 ? n1_ : n2_; }
    bool empty() const { return data_.empty(); }
    const std::vector<T>& data() const { return data_; }

    friend bool operator==(const Grid3&, const Grid3&) = default;

private:
    std::size_t n0_ = 0, n1_ = 0, n2_ = 0;
    std::vector<T> data_;
};

struct Node {
    Id id;
    std::string country;
    std::vector<Id> generators;
    std::vector<Id> renewables;
};

/// Transmission line. Positive flow runs from_node -> to_node, so the
/// incidence entry is +1 at from_node and -1 at to_node.
struct Line {
    Id id;
    Id from_node;
    Id to_node;
    double f_max = 0.0;     // MW, may be kUnbounded
    double inv_cost = 0.0;  // EUR/MW/yr
    bool expandable = false;
};

struct Generator {
    Id id;
    Id node;
    double g_max = 0.0;     // MW, may be kUnbounded
    double inv_cost = 0.0;  // EUR/MW/yr
    std::vector<double> marg_cost;  // EUR/MWh, one entry per season
    /// Optional slope of the marginal cost curve (EUR/MWh per MW). Zero gives
    /// the usual constant marginal cost; a positive slope turns the unit into a
    /// linear supply curve.
    double cost_slope = 0.0;
    /// Seasonal energy limits in MWh, scenarios x seasons. An empty matrix means
    /// no limits; infinite entries disable single limits.
    Eigen::MatrixXd q_max_seasonal;
    bool expandable = false;
};

struct Renewable {
    Id id;
    Id node;
    double g_r = 0.0;       // MW installed
    double inv_cost = 0.0;  // EUR/MW/yr
    Eigen::MatrixXd profile;  // scenarios x periods, factors in [0, 1]
    bool expandable = false;
};

/// Inverse demand pi = slope * d + intercept.
struct DemandCurve {
    double slope = -1.0;
    double intercept = 0.0;

    double price_at(double demand) const { return slope * demand + intercept; }
    /// Demand at a given price, floored at zero.
    double demand_at(double price) const;

    friend bool operator==(const DemandCurve&, const DemandCurve&) = default;
};

struct ScenarioSet {
    std::vector<double> probabilities;
    std::vector<std::string> season_labels;
    /// Period indices belonging to each season; must partition 0..T-1.
    std::vector<std::vector<std::size_t>> seasons;
    Grid3<DemandCurve> demand;  // (scenario, node, period)
    /// Hours of the year represented by one modelled period. Operational
    /// surplus terms are multiplied by it so that they are comparable with the
    /// annualized investment costs.
    double period_weight = 1.0;

    std::size_t num_scenarios() const { return probabilities.size(); }
    std::size_t num_periods() const { return demand.extent(2); }
    /// Season index of each period; periods outside the partition map to npos.
    std::vector<std::size_t> season_of_period() const;
};

struct Network {
    std::vector<Node> nodes;
    std::vector<Line> lines;
    std::vector<Generator> generators;
    std::vector<Renewable> renewables;

    std::optional<std::size_t> node_index(const Id& id) const;
    std::optional<std::size_t> line_index(const Id& id) const;
    std::optional<std::size_t> generator_index(const Id& id) const;
    std::optional<std::size_t> renewable_index(const Id& id) const;

    /// Sorted, de-duplicated country codes.
    std::vector<std::string> countries() const;
    const std::string& country_of(const Id& node) const;

    /// Rebuilds Node::generators / Node::renewables from the unit records.
    void link_units();
};

struct Violation {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    bool has(const std::string& code) const;
    std::vector<std::string> messages() const;
};

/// Checks every structural invariant of the instance. Violations are returned
/// as data; the function never throws on bad input.
ValidationReport validate(const Network& network, const ScenarioSet& scenarios);

/// Throws ValidationError when validate() reports anything.
void require_valid(const Network& network, const ScenarioSet& scenarios);

}  // namespace tep
