#include "tep/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tep/errors.hpp"

namespace tep {

ParseError::ParseError(std::string file, std::size_t row, std::size_t column, const std::string& what)
    : InputError(file + ":" + std::to_string(row) + (column ? ":" + std::to_string(column) : "") + ": " +
                 what),
      file_(std::move(file)),
      row_(row),
      column_(column) {}

namespace {

std::string join_violations(const std::vector<std::string>& v) {
    std::string out = "invalid instance:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
}

template <class T>
std::optional<std::size_t> find_by_id(const std::vector<T>& items, const Id& id) {
    for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i].id == id) return i;
    return std::nullopt;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : InputError(join_violations(violations)), violations_(std::move(violations)) {}

NonconvergenceError::NonconvergenceError(const std::string& what, int iterations, double primal_residual,
                                         double dual_residual, double complementarity)
    : NumericalError(what), iterations_(iterations), primal_(primal_residual), dual_(dual_residual),
      complementarity_(complementarity) {}

double DemandCurve::demand_at(double price) const {
    const double d = (price - intercept) / slope;
    return d > 0.0 ? d : 0.0;
}

std::vector<std::size_t> ScenarioSet::season_of_period() const {
    std::vector<std::size_t> out(num_periods(), static_cast<std::size_t>(-1));
    for (std::size_t s = 0; s < seasons.size(); ++s)
        for (auto t : seasons[s])
            if (t < out.size()) out[t] = s;
    return out;
}

std::optional<std::size_t> Network::node_index(const Id& id) const { return find_by_id(nodes, id); }
std::optional<std::size_t> Network::line_index(const Id& id) const { return find_by_id(lines, id); }
std::optional<std::size_t> Network::generator_index(const Id& id) const { return find_by_id(generators, id); }
std::optional<std::size_t> Network::renewable_index(const Id& id) const { return find_by_id(renewables, id); }

std::vector<std::string> Network::countries() const {
    std::set<std::string> s;
    for (const auto& n : nodes) s.insert(n.country);
    return {s.begin(), s.end()};
}

const std::string& Network::country_of(const Id& node) const {
    auto idx = node_index(node);
    if (!idx) throw InputError("unknown node '" + node + "'");
    return nodes[*idx].country;
}

void Network::link_units() {
    std::unordered_map<Id, std::size_t> pos;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        pos[nodes[i].id] = i;
        nodes[i].generators.clear();
        nodes[i].renewables.clear();
    }
    for (const auto& g : generators)
        if (auto it = pos.find(g.node); it != pos.end()) nodes[it->second].generators.push_back(g.id);
    for (const auto& r : renewables)
        if (auto it = pos.find(r.node); it != pos.end()) nodes[it->second].renewables.push_back(r.id);
}

bool ValidationReport::has(const std::string& code) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.code == code; });
}

std::vector<std::string> ValidationReport::messages() const {
    std::vector<std::string> out;
    out.reserve(violations.size());
    for (const auto& v : violations) out.push_back(v.message);
    return out;
}

ValidationReport validate(const Network& net, const ScenarioSet& sc) {
    ValidationReport report;
    auto add = [&](std::string code, std::string msg) { report.violations.push_back({std::move(code), std::move(msg)}); };

    const std::size_t n_scen = sc.num_scenarios();
    const std::size_t n_per = sc.num_periods();
    const std::size_t n_seas = sc.seasons.size();

    std::set<Id> node_ids;
    for (const auto& n : net.nodes) {
        if (!node_ids.insert(n.id).second) add("duplicate_node", "duplicate node id '" + n.id + "'");
        if (n.country.empty()) add("empty_country", "node '" + n.id + "' has no country");
    }

    std::set<Id> line_ids;
    for (const auto& l : net.lines) {
        if (!line_ids.insert(l.id).second) add("duplicate_line", "duplicate line id '" + l.id + "'");
        if (!node_ids.count(l.from_node))
            add("unknown_node", "line '" + l.id + "' references unknown node '" + l.from_node + "'");
        if (!node_ids.count(l.to_node))
            add("unknown_node", "line '" + l.id + "' references unknown node '" + l.to_node + "'");
        if (l.from_node == l.to_node) add("self_loop", "line '" + l.id + "' is a self-loop");
        if (!(l.f_max >= 0.0)) add("negative_capacity", "line '" + l.id + "' has negative f_max");
        if (!(l.inv_cost >= 0.0) || std::isinf(l.inv_cost))
            add("invalid_cost", "line '" + l.id + "' has invalid investment cost");
    }

    std::set<Id> gen_ids;
    for (const auto& g : net.generators) {
        if (!gen_ids.insert(g.id).second) add("duplicate_generator", "duplicate generator id '" + g.id + "'");
        if (!node_ids.count(g.node))
            add("unknown_node", "generator '" + g.id + "' references unknown node '" + g.node + "'");
        if (!(g.g_max >= 0.0)) add("negative_capacity", "generator '" + g.id + "' has negative g_max");
        if (g.expandable && std::isinf(g.g_max))
            add("unbounded_expansion", "generator '" + g.id + "' is expandable but has unbounded capacity");
        if (!(g.inv_cost >= 0.0) || std::isinf(g.inv_cost))
            add("invalid_cost", "generator '" + g.id + "' has invalid investment cost");
        if (!(g.cost_slope >= 0.0) || std::isinf(g.cost_slope))
            add("invalid_cost", "generator '" + g.id + "' has invalid cost slope");
        if (g.marg_cost.size() != n_seas)
            add("missing_season_cost", "generator '" + g.id + "' needs a marginal cost for each of the " +
                                           std::to_string(n_seas) + " seasons");
        for (double c : g.marg_cost)
            if (!std::isfinite(c)) add("invalid_cost", "generator '" + g.id + "' has a non-finite marginal cost");
        if (g.q_max_seasonal.size() != 0) {
            if (static_cast<std::size_t>(g.q_max_seasonal.rows()) != n_scen ||
                static_cast<std::size_t>(g.q_max_seasonal.cols()) != n_seas)
                add("dimension", "generator '" + g.id + "' energy limits must be scenarios x seasons");
            if ((g.q_max_seasonal.array() < 0.0).any() || g.q_max_seasonal.hasNaN())
                add("negative_energy", "generator '" + g.id + "' has negative seasonal energy limit");
        }
    }

    std::set<Id> ren_ids;
    for (const auto& r : net.renewables) {
        if (!ren_ids.insert(r.id).second) add("duplicate_renewable", "duplicate renewable id '" + r.id + "'");
        if (!node_ids.count(r.node))
            add("unknown_node", "renewable '" + r.id + "' references unknown node '" + r.node + "'");
        if (!(r.g_r >= 0.0) || std::isinf(r.g_r))
            add("negative_capacity", "renewable '" + r.id + "' has invalid installed capacity");
        if (!(r.inv_cost >= 0.0) || std::isinf(r.inv_cost))
            add("invalid_cost", "renewable '" + r.id + "' has invalid investment cost");
        if (static_cast<std::size_t>(r.profile.rows()) != n_scen ||
            static_cast<std::size_t>(r.profile.cols()) != n_per)
            add("dimension", "renewable '" + r.id + "' profile must be scenarios x periods");
        if (r.profile.size() && (r.profile.hasNaN() || r.profile.minCoeff() < 0.0 || r.profile.maxCoeff() > 1.0))
            add("profile_range", "renewable '" + r.id + "' profile factor outside [0, 1]");
    }

    for (const auto& n : net.nodes) {
        for (const auto& gid : n.generators) {
            auto gi = net.generator_index(gid);
            if (!gi || net.generators[*gi].node != n.id)
                add("unit_link", "node '" + n.id + "' lists generator '" + gid + "' which is not located there");
        }
        for (const auto& rid : n.renewables) {
            auto ri = net.renewable_index(rid);
            if (!ri || net.renewables[*ri].node != n.id)
                add("unit_link", "node '" + n.id + "' lists renewable '" + rid + "' which is not located there");
        }
    }

    // Scenario set.
    double psum = 0.0;
    for (std::size_t w = 0; w < n_scen; ++w) {
        const double p = sc.probabilities[w];
        if (!(p >= 0.0)) add("negative_probability", "scenario " + std::to_string(w) + " has negative probability");
        psum += p;
    }
    if (!(std::abs(psum - 1.0) <= 1e-12)) {
        std::ostringstream os;
        os.precision(17);
        os << "probabilities sum ≠ 1 (sum = " << psum << ")";
        add("probabilities_sum", os.str());
    }
    if (!(sc.period_weight > 0.0) || std::isinf(sc.period_weight))
        add("period_weight", "period weight must be positive and finite");
    if (sc.season_labels.size() != n_seas)
        add("season_labels", "number of season labels does not match number of seasons");

    std::vector<int> seen(n_per, 0);
    for (const auto& season : sc.seasons)
        for (auto t : season) {
            if (t >= n_per)
                add("season_partition", "season references period " + std::to_string(t) + " out of range");
            else
                ++seen[t];
        }
    for (std::size_t t = 0; t < n_per; ++t) {
        if (seen[t] == 0) add("season_partition", "period " + std::to_string(t) + " belongs to no season");
        if (seen[t] > 1) add("season_partition", "period " + std::to_string(t) + " belongs to several seasons");
    }
    if (n_per == 0) add("no_periods", "scenario set has no periods");

    if (sc.demand.extent(0) != n_scen || sc.demand.extent(1) != net.nodes.size())
        add("dimension", "demand table must be scenarios x nodes x periods");
    else
        for (std::size_t w = 0; w < n_scen; ++w)
            for (std::size_t n = 0; n < net.nodes.size(); ++n)
                for (std::size_t t = 0; t < n_per; ++t) {
                    const auto& c = sc.demand(w, n, t);
                    if (!(c.slope < 0.0) || !std::isfinite(c.slope) || !std::isfinite(c.intercept)) {
                        add("demand_slope", "demand curve at scenario " + std::to_string(w) + ", node '" +
                                                net.nodes[n].id + "', period " + std::to_string(t) +
                                                " is not downward sloping");
                    }
                }

    return report;
}

void require_valid(const Network& network, const ScenarioSet& scenarios) {
    auto report = validate(network, scenarios);
    if (!report.ok()) throw ValidationError(report.messages());
}

}  // namespace tep
