#include "tep/compensation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tep/csv.hpp"
#include "tep/errors.hpp"

namespace tep {

namespace {

double dot(const std::vector<double>& p, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * v[i];
    return s;
}

std::size_t require_country(const DeltaWelfare& delta, const std::string& code) {
    auto i = delta.country_index(code);
    if (!i) throw InputError("country '" + code + "' does not appear in the welfare delta");
    return *i;
}

// Guards a calibration denominator against exact or numerical zero.
void require_nonzero(double denom, double scale, const std::string& what) {
    if (!(std::abs(denom) > 1e-12 * std::max(1.0, scale)))
        throw CalibrationError(what + " is zero; the mechanism cannot be calibrated");
}

CompensationSchedule proportional(const std::string& tag, const char* param, const ShareRule& rule,
                                  const std::vector<double>& t, const std::vector<double>& measure,
                                  const std::vector<double>& probabilities, const std::string& what) {
    rule.check();
    if (t.size() != rule.countries.size()) throw DimensionError("one target per participant required");
    if (measure.size() != probabilities.size()) throw DimensionError("measure and probabilities differ in length");
    const double mean = dot(probabilities, measure);
    double scale = 0.0;
    for (double m : measure) scale = std::max(scale, std::abs(m));
    require_nonzero(mean, scale, what);
    CompensationSchedule s;
    s.mechanism = tag;
    s.countries = rule.countries;
    s.probabilities = probabilities;
    s.amounts.resize(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(measure.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double coef = t[i] / mean;
        s.parameters.emplace_back(std::string(param) + ":" + rule.countries[i], coef);
        for (std::size_t w = 0; w < measure.size(); ++w)
            s.amounts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(w)) = coef * measure[w];
    }
    return s;
}

}  // namespace

ShareRule ShareRule::equal(std::vector<std::string> countries) {
    ShareRule r;
    r.shares.assign(countries.size(), countries.empty() ? 0.0 : 1.0 / static_cast<double>(countries.size()));
    r.countries = std::move(countries);
    return r;
}

ShareRule ShareRule::parse(const std::string& text) {
    auto split = [](const std::string& s, char sep) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, sep))
            if (!item.empty()) out.push_back(item);
        return out;
    };
    if (text.rfind("equal:", 0) == 0) return equal(split(text.substr(6), ','));
    ShareRule r;
    for (const auto& item : split(text, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw InputError("share rule entry '" + item + "' must be COUNTRY:SHARE");
        r.countries.push_back(item.substr(0, colon));
        try {
            std::size_t used = 0;
            const std::string num = item.substr(colon + 1);
            r.shares.push_back(std::stod(num, &used));
            if (used != num.size()) throw std::invalid_argument(num);
        } catch (const std::logic_error&) {
            throw InputError("share rule entry '" + item + "' has a malformed share");
        }
    }
    r.check();
    return r;
}

void ShareRule::check() const {
    if (countries.empty()) throw DomainError("share rule has no participants");
    if (shares.size() != countries.size()) throw DomainError("share rule needs one share per country");
    double sum = 0.0;
    for (double s : shares) {
        if (!(s >= 0.0)) throw DomainError("shares must be nonnegative");
        sum += s;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw DomainError("shares must sum to 1");
    for (std::size_t i = 0; i < countries.size(); ++i)
        if (std::count(countries.begin(), countries.end(), countries[i]) > 1)
            throw DomainError("country '" + countries[i] + "' listed twice in share rule");
}

std::vector<double> LineObservables::flow_sum() const {
    std::vector<double> out(num_scenarios());
    for (std::size_t w = 0; w < out.size(); ++w) out[w] = period_weight * flow.row(static_cast<Eigen::Index>(w)).sum();
    return out;
}

std::vector<double> LineObservables::flow_value() const {
    std::vector<double> out(num_scenarios());
    for (std::size_t w = 0; w < out.size(); ++w) {
        const auto r = static_cast<Eigen::Index>(w);
        const Eigen::ArrayXd mid = 0.5 * (price_from.row(r).array() + price_to.row(r).array());
        out[w] = period_weight * (flow.row(r).array() * mid.transpose()).sum();
    }
    return out;
}

std::vector<double> LineObservables::mean_price(bool from_end) const {
    const Eigen::MatrixXd& p = from_end ? price_from : price_to;
    std::vector<double> out(num_scenarios());
    for (std::size_t w = 0; w < out.size(); ++w) out[w] = p.row(static_cast<Eigen::Index>(w)).mean();
    return out;
}

LineObservables line_observables(const Network& net, const DispatchSolution& s, const Id& line) {
    auto l = net.line_index(line);
    if (!l) throw InputError("unknown line '" + line + "'");
    const std::size_t from = *net.node_index(net.lines[*l].from_node), to = *net.node_index(net.lines[*l].to_node);
    LineObservables o;
    o.from_country = net.nodes[from].country;
    o.to_country = net.nodes[to].country;
    o.probabilities = s.probabilities;
    o.period_weight = s.period_weight;
    const auto W = static_cast<Eigen::Index>(s.num_scenarios()), T = static_cast<Eigen::Index>(s.num_periods());
    o.flow.resize(W, T);
    o.price_from.resize(W, T);
    o.price_to.resize(W, T);
    for (Eigen::Index w = 0; w < W; ++w)
        for (Eigen::Index t = 0; t < T; ++t) {
            const auto ww = static_cast<std::size_t>(w), tt = static_cast<std::size_t>(t);
            o.flow(w, t) = s.f(ww, *l, tt);
            o.price_from(w, t) = s.price(ww, from, tt);
            o.price_to(w, t) = s.price(ww, to, tt);
        }
    return o;
}

void write_line_observables_csv(std::ostream& out, const LineObservables& o) {
    csv::Writer wr(out);
    wr.header({"scenario", "period", "from_country", "to_country", "period_weight", "flow_mw", "price_from",
               "price_to"});
    for (Eigen::Index w = 0; w < o.flow.rows(); ++w)
        for (Eigen::Index t = 0; t < o.flow.cols(); ++t) {
            wr.field(static_cast<long long>(w)).field(static_cast<long long>(t)).field(o.from_country);
            wr.field(o.to_country).field(o.period_weight).field(o.flow(w, t)).field(o.price_from(w, t));
            wr.field(o.price_to(w, t));
            wr.end_row();
        }
}

LineObservables read_line_observables_csv(const std::filesystem::path& path, const std::vector<double>& probabilities) {
    const auto tab = csv::Table::read(path);
    const auto cw = tab.column("scenario"), ct = tab.column("period"), cfc = tab.column("from_country"),
               ctc = tab.column("to_country"), cpw = tab.column("period_weight"), cf = tab.column("flow_mw"),
               cpf = tab.column("price_from"), cpt = tab.column("price_to");
    if (tab.size() == 0) throw ParseError(tab.name(), 1, 0, "no observations");
    LineObservables o;
    o.probabilities = probabilities;
    o.from_country = tab.cell(0, cfc);
    o.to_country = tab.cell(0, ctc);
    o.period_weight = tab.number(0, cpw);
    long long T = 0;
    for (std::size_t r = 0; r < tab.size(); ++r) T = std::max(T, tab.integer(r, ct) + 1);
    const auto W = static_cast<Eigen::Index>(probabilities.size());
    o.flow = Eigen::MatrixXd::Constant(W, T, std::nan(""));
    o.price_from = o.price_to = o.flow;
    for (std::size_t r = 0; r < tab.size(); ++r) {
        const long long w = tab.integer(r, cw), t = tab.integer(r, ct);
        if (w < 0 || w >= W) tab.fail(r, cw, "scenario out of range");
        if (t < 0) tab.fail(r, ct, "negative period");
        if (tab.cell(r, cfc) != o.from_country || tab.cell(r, ctc) != o.to_country)
            tab.fail(r, cfc, "all rows must describe the same line");
        o.flow(w, t) = tab.number(r, cf);
        o.price_from(w, t) = tab.number(r, cpf);
        o.price_to(w, t) = tab.number(r, cpt);
    }
    if (o.flow.hasNaN()) throw ParseError(tab.name(), 0, 0, "missing (scenario, period) observations");
    return o;
}

std::vector<double> CompensationSchedule::row(std::size_t country) const {
    std::vector<double> out(probabilities.size());
    for (std::size_t w = 0; w < out.size(); ++w)
        out[w] = amounts(static_cast<Eigen::Index>(country), static_cast<Eigen::Index>(w));
    return out;
}

double CompensationSchedule::expected(std::size_t country) const { return dot(probabilities, row(country)); }

double CompensationSchedule::balance(std::size_t scenario) const {
    return amounts.col(static_cast<Eigen::Index>(scenario)).sum();
}

std::vector<double> targets(const DeltaWelfare& delta, const ShareRule& rule) {
    rule.check();
    std::vector<double> e;
    for (const auto& c : rule.countries) e.push_back(delta.expected(require_country(delta, c)));
    const double total = std::accumulate(e.begin(), e.end(), 0.0);
    std::vector<double> t(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) t[i] = rule.shares[i] * total - e[i];
    return t;
}

CompensationSchedule no_compensation(const ShareRule& rule, const std::vector<double>& probabilities) {
    CompensationSchedule s;
    s.mechanism = "none";
    s.countries = rule.countries;
    s.probabilities = probabilities;
    s.amounts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rule.countries.size()),
                                      static_cast<Eigen::Index>(probabilities.size()));
    return s;
}

CompensationSchedule lump_sum(const ShareRule& rule, const std::vector<double>& t,
                              const std::vector<double>& probabilities) {
    rule.check();
    if (t.size() != rule.countries.size()) throw DimensionError("one target per participant required");
    double sum = 0.0, mag = 0.0;
    for (double v : t) {
        sum += v;
        mag += std::abs(v);
    }
    if (std::abs(sum) > 1e-9 * std::max(1.0, mag)) throw InputError("lump-sum targets do not sum to zero");
    CompensationSchedule s = no_compensation(rule, probabilities);
    s.mechanism = "lump";
    for (std::size_t i = 0; i < t.size(); ++i) {
        s.amounts.row(static_cast<Eigen::Index>(i)).setConstant(t[i]);
        s.parameters.emplace_back("amount:" + rule.countries[i], t[i]);
    }
    return s;
}

CompensationSchedule ppa(const DeltaWelfare& delta, const LineObservables& obs, const std::string& base,
                         double target) {
    double sign = 0.0;
    std::string other;
    if (base == obs.from_country) {
        sign = 1.0;
        other = obs.to_country;
    } else if (base == obs.to_country) {
        sign = -1.0;
        other = obs.from_country;
    } else {
        throw InputError("PPA base country '" + base + "' is not at either end of the line");
    }
    if (base == other) throw InputError("PPA needs a line between two different countries");
    require_country(delta, base);
    require_country(delta, other);
    if (obs.num_scenarios() != delta.num_scenarios()) throw DimensionError("observables and delta differ in scenarios");

    const Eigen::MatrixXd& p_base = sign > 0 ? obs.price_from : obs.price_to;
    const std::size_t W = obs.num_scenarios();
    std::vector<double> flow(W), value(W);
    double scale = 0.0;
    for (std::size_t w = 0; w < W; ++w) {
        const auto r = static_cast<Eigen::Index>(w);
        flow[w] = sign * obs.period_weight * obs.flow.row(r).sum();
        value[w] = sign * obs.period_weight * (obs.flow.row(r).array() * p_base.row(r).array()).sum();
        scale = std::max(scale, std::abs(flow[w]));
    }
    const double e_flow = dot(obs.probabilities, flow);
    require_nonzero(e_flow, scale, "expected flow through the line");
    const double price = (target + dot(obs.probabilities, value)) / e_flow;

    CompensationSchedule s;
    s.mechanism = "ppa:" + base;
    s.countries = {base, other};
    s.probabilities = obs.probabilities;
    s.amounts.resize(2, static_cast<Eigen::Index>(W));
    for (std::size_t w = 0; w < W; ++w) {
        const double c = price * flow[w] - value[w];
        s.amounts(0, static_cast<Eigen::Index>(w)) = c;
        s.amounts(1, static_cast<Eigen::Index>(w)) = -c;
    }
    s.parameters.emplace_back("ppa_price", price);
    return s;
}

CompensationSchedule flow_mech(const ShareRule& rule, const std::vector<double>& t, const LineObservables& obs) {
    return proportional("flow", "alpha", rule, t, obs.flow_sum(), obs.probabilities, "expected flow through the line");
}

CompensationSchedule value_mech(const ShareRule& rule, const std::vector<double>& t, const LineObservables& obs) {
    return proportional("value", "beta", rule, t, obs.flow_value(), obs.probabilities,
                        "expected flow value of the line");
}

CompensationSchedule ideal_mech(const DeltaWelfare& delta, const ShareRule& rule) {
    rule.check();
    std::vector<std::size_t> idx;
    for (const auto& c : rule.countries) idx.push_back(require_country(delta, c));
    CompensationSchedule s = no_compensation(rule, delta.probabilities);
    s.mechanism = "ideal";
    for (std::size_t w = 0; w < delta.num_scenarios(); ++w) {
        const auto c = static_cast<Eigen::Index>(w);
        double total = 0.0;
        for (auto i : idx) total += delta.delta_tw(static_cast<Eigen::Index>(i), c);
        for (std::size_t k = 0; k < idx.size(); ++k)
            s.amounts(static_cast<Eigen::Index>(k), c) =
                rule.shares[k] * total - delta.delta_tw(static_cast<Eigen::Index>(idx[k]), c);
    }
    for (std::size_t k = 0; k < idx.size(); ++k) s.parameters.emplace_back("lambda:" + rule.countries[k], rule.shares[k]);
    return s;
}

std::vector<double> NetWelfare::row(std::size_t country) const {
    std::vector<double> out(probabilities.size());
    for (std::size_t w = 0; w < out.size(); ++w) out[w] = ntw(static_cast<Eigen::Index>(country), static_cast<Eigen::Index>(w));
    return out;
}

NetWelfare apply(const DeltaWelfare& delta, const CompensationSchedule& s) {
    if (s.probabilities.size() != delta.num_scenarios()) throw DimensionError("schedule and delta differ in scenarios");
    NetWelfare n;
    n.countries = s.countries;
    n.probabilities = delta.probabilities;
    n.ntw.resize(static_cast<Eigen::Index>(s.countries.size()), static_cast<Eigen::Index>(delta.num_scenarios()));
    for (std::size_t i = 0; i < s.countries.size(); ++i) {
        const auto src = static_cast<Eigen::Index>(require_country(delta, s.countries[i]));
        n.ntw.row(static_cast<Eigen::Index>(i)) = delta.delta_tw.row(src) + s.amounts.row(static_cast<Eigen::Index>(i));
    }
    return n;
}

void write_compensation_csv(std::ostream& out, const std::vector<CompensationSchedule>& schedules) {
    csv::Writer wr(out);
    wr.header({"mechanism", "country", "scenario", "amount"});
    for (const auto& s : schedules)
        for (std::size_t i = 0; i < s.countries.size(); ++i)
            for (std::size_t w = 0; w < s.probabilities.size(); ++w) {
                wr.field(s.mechanism).field(s.countries[i]).field(w);
                wr.field(s.amounts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(w)));
                wr.end_row();
            }
}

void write_parameters_csv(std::ostream& out, const std::vector<CompensationSchedule>& schedules) {
    csv::Writer wr(out);
    wr.header({"mechanism", "param", "value"});
    for (const auto& s : schedules)
        for (const auto& [name, value] : s.parameters) {
            wr.field(s.mechanism).field(name).field(value);
            wr.end_row();
        }
}

}  // namespace tep
