#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tep/model.hpp"

namespace tep {

/// Linear inverse demand through (demand, |price|) with the given point elasticity.
/// Throws DegenerateInputError for demand <= 0 or a zero price and DomainError
/// for a nonnegative elasticity.
DemandCurve build_demand_curve(double price, double demand, double elasticity);

/// Hourly price/demand history per node plus renewable capacity factors.
struct TimeSeriesTable {
    std::vector<std::chrono::sys_seconds> hours;
    std::vector<Id> nodes;
    Eigen::MatrixXd price;   // hours x nodes, EUR/MWh
    Eigen::MatrixXd demand;  // hours x nodes, MW
    std::vector<Id> renewables;
    Eigen::MatrixXd factors;  // hours x renewables

    std::size_t num_hours() const { return hours.size(); }

    /// timeseries.csv: timestamp_iso8601,node_id,price_eur_mwh,demand_mw,<ren_id>... where
    /// renewable columns may carry a ":factor" suffix. Renewable factors are read from the
    /// row of the renewable's own node when a network is given, else from the first row of
    /// each hour.
    static TimeSeriesTable read(const std::filesystem::path& path, const Network* network = nullptr);
};

enum class Season { Winter, Spring, Summer, Autumn };

/// Dec-Feb winter, Mar-May spring, Jun-Aug summer, Sep-Nov autumn.
Season season_of(std::chrono::sys_seconds hour);
const std::vector<std::string>& season_labels();

struct SamplingConfig {
    std::size_t n_scenarios = 30;
    std::size_t hours_per_season = 168;
    std::uint64_t seed = 1;
    /// Inclusive calendar-year span of admissible blocks; nullopt = whole table.
    std::optional<int> year_first, year_last;
    double elasticity = -0.05;
    /// Prices closer to zero than this are lifted to it before fitting a curve.
    double min_abs_price = 0.01;
    /// Hours represented by one period; nullopt = 8760 / (4 * hours_per_season).
    std::optional<double> period_weight;
};

struct ScenarioSample {
    ScenarioSet scenarios;
    /// Table row of the first hour of each (scenario, season) block.
    std::vector<std::vector<std::size_t>> block_starts;
    /// Per table renewable: scenarios x periods capacity factors.
    std::vector<Eigen::MatrixXd> renewable_profiles;
};

/// Draws one block of consecutive hours per season and scenario. The same
/// calendar hours are used for every node. Deterministic for a given seed.
ScenarioSample sample_scenarios(const TimeSeriesTable& table, const SamplingConfig& cfg);

/// key=value file; '#' starts a comment. Relative paths resolve against the file's directory.
class Config {
public:
    static Config read(const std::filesystem::path& path);
    static Config parse(const std::string& text, std::string name = "config",
                        std::filesystem::path base = {});

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key, double fallback) const;
    long long integer(const std::string& key, long long fallback) const;
    std::filesystem::path path(const std::string& key, const std::filesystem::path& fallback = {}) const;
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    const std::map<std::string, std::string>& values() const { return values_; }
    const std::string& name() const { return name_; }
    const std::filesystem::path& base() const { return base_; }

    SamplingConfig sampling() const;

private:
    std::string name_;
    std::filesystem::path base_;
    std::map<std::string, std::string> values_;
    std::map<std::string, std::size_t> lines_;
};

struct Instance {
    Network network;
    ScenarioSet scenarios;
    /// Set when scenarios were sampled from timeseries.csv.
    std::optional<ScenarioSample> sample;
};

/// Reads an instance directory:
///   nodes.csv, lines.csv, generators.csv, gen_costs.csv            (required)
///   gen_energy_limits.csv, renewables.csv                            (optional)
/// and scenarios from either
///   scenarios.csv, periods.csv, demand_curves.csv [, renewable_profiles.csv]
/// or timeseries.csv sampled with the config's sampling settings.
/// The result passes validate(); otherwise ValidationError is thrown.
Instance load_network(const std::filesystem::path& dir, const Config& cfg = {});

}  // namespace tep
