#include "tep/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "tep/csv.hpp"
#include "tep/errors.hpp"

namespace tep {

double AllocationRule::share_for(const Id& line) const {
    auto it = from_share.find(line);
    return it == from_share.end() ? default_from_share : it->second;
}

namespace {

std::optional<std::size_t> find_country(const std::vector<std::string>& countries, const std::string& code) {
    auto it = std::find(countries.begin(), countries.end(), code);
    if (it == countries.end()) return std::nullopt;
    return static_cast<std::size_t>(it - countries.begin());
}

double weighted_mean(const Eigen::MatrixXd& m, std::size_t row, const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t w = 0; w < p.size(); ++w) s += p[w] * m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(w));
    return s;
}

}  // namespace

std::optional<std::size_t> WelfareAccount::country_index(const std::string& code) const {
    return find_country(countries, code);
}

double WelfareAccount::expected_tw(std::size_t country) const { return weighted_mean(tw, country, probabilities); }

double WelfareAccount::expected_system_tw() const {
    double s = 0.0;
    for (std::size_t w = 0; w < probabilities.size(); ++w) s += probabilities[w] * system_tw(w);
    return s;
}

WelfareAccount account(const DispatchSolution& s, const Network& net, const ScenarioSet& sc,
                       const AllocationRule& allocation, double kkt_tol) {
    const KktReport rep = verify_kkt(net, sc, s);
    if (!rep.within(kkt_tol)) {
        std::ostringstream msg;
        msg << "solution is not an equilibrium (scaled KKT residual " << rep.max_scaled() << " > " << kkt_tol << ")";
        throw NonEquilibriumError(msg.str());
    }
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        const double share = allocation.share_for(net.lines[l].id);
        if (!(share >= 0.0 && share <= 1.0))
            throw DomainError("allocation share for line '" + net.lines[l].id + "' must lie in [0, 1]");
    }

    WelfareAccount acc;
    acc.countries = net.countries();
    acc.probabilities = sc.probabilities;
    const auto C = static_cast<Eigen::Index>(acc.countries.size());
    const auto W = static_cast<Eigen::Index>(sc.num_scenarios());
    acc.cs = acc.ps = acc.cr = acc.ic = Eigen::MatrixXd::Zero(C, W);

    auto country = [&](const Id& node) {
        return static_cast<Eigen::Index>(*find_country(acc.countries, net.country_of(node)));
    };
    std::vector<Eigen::Index> node_c, gen_c, ren_c, from_c, to_c;
    std::vector<std::size_t> gen_n, ren_n, from_n, to_n;
    for (const auto& n : net.nodes) node_c.push_back(country(n.id));
    for (const auto& g : net.generators) {
        gen_c.push_back(country(g.node));
        gen_n.push_back(*net.node_index(g.node));
    }
    for (const auto& r : net.renewables) {
        ren_c.push_back(country(r.node));
        ren_n.push_back(*net.node_index(r.node));
    }
    for (const auto& l : net.lines) {
        from_c.push_back(country(l.from_node));
        to_c.push_back(country(l.to_node));
        from_n.push_back(*net.node_index(l.from_node));
        to_n.push_back(*net.node_index(l.to_node));
    }
    const auto season = sc.season_of_period();
    const double pw = sc.period_weight;

    for (Eigen::Index w = 0; w < W; ++w) {
        const auto ww = static_cast<std::size_t>(w);
        for (std::size_t t = 0; t < sc.num_periods(); ++t) {
            for (std::size_t n = 0; n < net.nodes.size(); ++n) {
                const DemandCurve& dc = sc.demand(ww, n, t);
                const double d = s.d(ww, n, t);
                acc.cs(node_c[n], w) += pw * (0.5 * dc.slope * d + dc.intercept - s.price(ww, n, t)) * d;
            }
            for (std::size_t g = 0; g < net.generators.size(); ++g) {
                const Generator& gen = net.generators[g];
                const double q = s.q(ww, g, t);
                acc.ps(gen_c[g], w) +=
                    pw * (s.price(ww, gen_n[g], t) - gen.marg_cost[season[t]] - 0.5 * gen.cost_slope * q) * q;
            }
            for (std::size_t r = 0; r < net.renewables.size(); ++r) {
                const Renewable& ren = net.renewables[r];
                const double out = (ren.g_r + s.y_r[r]) * ren.profile(w, static_cast<Eigen::Index>(t));
                acc.ps(ren_c[r], w) += pw * s.price(ww, ren_n[r], t) * out;
            }
            for (std::size_t l = 0; l < net.lines.size(); ++l) {
                const double rent = pw * (s.price(ww, to_n[l], t) - s.price(ww, from_n[l], t)) * s.f(ww, l, t);
                const double share = allocation.share_for(net.lines[l].id);
                acc.cr(from_c[l], w) += share * rent;
                acc.cr(to_c[l], w) += (1.0 - share) * rent;
            }
        }
        for (std::size_t g = 0; g < net.generators.size(); ++g) acc.ic(gen_c[g], w) += net.generators[g].inv_cost * s.y[g];
        for (std::size_t r = 0; r < net.renewables.size(); ++r)
            acc.ic(ren_c[r], w) += net.renewables[r].inv_cost * s.y_r[r];
        for (std::size_t l = 0; l < net.lines.size(); ++l) {
            const double cost = net.lines[l].inv_cost * s.x[l];
            const double share = allocation.share_for(net.lines[l].id);
            acc.ic(from_c[l], w) += share * cost;
            acc.ic(to_c[l], w) += (1.0 - share) * cost;
        }
    }
    acc.tw = acc.cs + acc.ps + acc.cr - acc.ic;
    return acc;
}

std::optional<std::size_t> DeltaWelfare::country_index(const std::string& code) const {
    return find_country(countries, code);
}

std::vector<double> DeltaWelfare::row(std::size_t country) const {
    std::vector<double> out(num_scenarios());
    for (std::size_t w = 0; w < out.size(); ++w)
        out[w] = delta_tw(static_cast<Eigen::Index>(country), static_cast<Eigen::Index>(w));
    return out;
}

double DeltaWelfare::expected(std::size_t country) const { return weighted_mean(delta_tw, country, probabilities); }

std::vector<double> DeltaWelfare::expected() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < countries.size(); ++i) out.push_back(expected(i));
    return out;
}

DeltaWelfare delta(const WelfareAccount& with, const WelfareAccount& without) {
    if (with.countries != without.countries) throw InputError("welfare accounts cover different countries");
    if (with.probabilities != without.probabilities)
        throw InputError("welfare accounts were built on different scenario sets");
    DeltaWelfare d;
    d.countries = with.countries;
    d.probabilities = with.probabilities;
    d.delta_tw = with.tw - without.tw;
    return d;
}

void write_welfare_csv(std::ostream& out, const WelfareAccount& a) {
    csv::Writer wr(out);
    wr.header({"country", "scenario", "cs", "ps", "cr_share", "inv_cost", "tw"});
    for (std::size_t i = 0; i < a.countries.size(); ++i)
        for (std::size_t w = 0; w < a.probabilities.size(); ++w) {
            const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(w);
            wr.field(a.countries[i]).field(w).field(a.cs(r, c)).field(a.ps(r, c)).field(a.cr(r, c));
            wr.field(a.ic(r, c)).field(a.tw(r, c));
            wr.end_row();
        }
}

void write_delta_csv(std::ostream& out, const DeltaWelfare& d) {
    csv::Writer wr(out);
    wr.header({"country", "scenario", "delta_tw"});
    for (std::size_t i = 0; i < d.countries.size(); ++i)
        for (std::size_t w = 0; w < d.num_scenarios(); ++w) {
            wr.field(d.countries[i]).field(w).field(d.delta_tw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(w)));
            wr.end_row();
        }
}

void write_scenarios_csv(std::ostream& out, const std::vector<double>& probabilities) {
    csv::Writer wr(out);
    wr.header({"scenario", "probability"});
    for (std::size_t w = 0; w < probabilities.size(); ++w) {
        wr.field(w).field(probabilities[w]);
        wr.end_row();
    }
}

std::vector<double> read_scenarios_csv(const std::filesystem::path& path) {
    const auto tab = csv::Table::read(path);
    const auto cw = tab.column("scenario"), cp = tab.column("probability");
    std::vector<double> p(tab.size(), std::nan(""));
    for (std::size_t r = 0; r < tab.size(); ++r) {
        const long long w = tab.integer(r, cw);
        if (w < 0 || static_cast<std::size_t>(w) >= p.size()) tab.fail(r, cw, "scenario out of range");
        p[static_cast<std::size_t>(w)] = tab.number(r, cp);
    }
    for (double v : p)
        if (std::isnan(v)) throw ParseError(tab.name(), 0, 0, "scenario ids must be 0..n-1 without gaps");
    return p;
}

DeltaWelfare read_delta_csv(const std::filesystem::path& path, const std::vector<double>& probabilities) {
    const auto tab = csv::Table::read(path);
    const auto cc = tab.column("country"), cw = tab.column("scenario"), cv = tab.column("delta_tw");
    DeltaWelfare d;
    d.probabilities = probabilities;
    for (std::size_t r = 0; r < tab.size(); ++r)
        if (!find_country(d.countries, tab.cell(r, cc))) d.countries.push_back(tab.cell(r, cc));
    const auto C = static_cast<Eigen::Index>(d.countries.size()), W = static_cast<Eigen::Index>(probabilities.size());
    d.delta_tw = Eigen::MatrixXd::Constant(C, W, std::nan(""));
    for (std::size_t r = 0; r < tab.size(); ++r) {
        const long long w = tab.integer(r, cw);
        if (w < 0 || w >= W) tab.fail(r, cw, "scenario out of range");
        d.delta_tw(static_cast<Eigen::Index>(*find_country(d.countries, tab.cell(r, cc))), w) = tab.number(r, cv);
    }
    if (d.delta_tw.hasNaN()) throw ParseError(tab.name(), 0, 0, "every country needs a value for every scenario");
    return d;
}

}  // namespace tep
