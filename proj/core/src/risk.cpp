#include "tep/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "tep/csv.hpp"
#include "tep/errors.hpp"

namespace tep {

std::vector<double> loss(const std::vector<double>& ntw) {
    std::vector<double> out(ntw.size());
    std::transform(ntw.begin(), ntw.end(), out.begin(), [](double v) { return v < 0.0 ? -v : 0.0; });
    return out;
}

double cvar(const std::vector<double>& values, const std::vector<double>& probabilities, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("CVaR level must lie in [0, 1)");
    if (values.size() != probabilities.size()) throw DimensionError("values and probabilities differ in length");
    if (values.empty()) throw DegenerateInputError("CVaR of an empty distribution");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const std::size_t n = order.size();
    // Tail sums over sorted atoms.
    std::vector<double> sp(n + 1, 0.0), spl(n + 1, 0.0);
    for (std::size_t k = n; k-- > 0;) {
        sp[k] = sp[k + 1] + probabilities[order[k]];
        spl[k] = spl[k + 1] + probabilities[order[k]] * values[order[k]];
    }
    // The objective eta + E[(L - eta)+] / (1 - alpha) is convex and piecewise
    // linear with kinks at the atoms, so its minimum sits on one of them.
    double best = HUGE_VAL;
    for (std::size_t k = 0; k < n;) {
        const double eta = values[order[k]];
        std::size_t m = k;
        while (m < n && values[order[m]] == eta) ++m;
        best = std::min(best, eta + (spl[m] - eta * sp[m]) / (1.0 - alpha));
        k = m;
    }
    return best;
}

double expectation(const std::vector<double>& v, const std::vector<double>& p) {
    if (v.size() != p.size()) throw DimensionError("values and probabilities differ in length");
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += p[i] * v[i];
    return s;
}

namespace {

// Values shifted by their first entry; a constant series becomes exactly zero.
std::vector<double> centered(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - v.front();
    return out;
}

}  // namespace

double weighted_std(const std::vector<double>& values, const std::vector<double>& p) {
    if (values.empty()) return 0.0;
    const auto v = centered(values);
    const double m = expectation(v, p);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += p[i] * (v[i] - m) * (v[i] - m);
    return std::sqrt(s);
}

double correlation(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& p) {
    if (xs.size() != ys.size()) throw DimensionError("series differ in length");
    if (xs.empty()) throw DegenerateInputError("correlation of empty series");
    const auto x = centered(xs), y = centered(ys);
    const double mx = expectation(x, p), my = expectation(y, p);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += p[i] * (x[i] - mx) * (y[i] - my);
        sxx += p[i] * (x[i] - mx) * (x[i] - mx);
        syy += p[i] * (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateInputError("correlation undefined for a series with zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<RiskRow> summary(const DeltaWelfare& delta, const std::vector<CompensationSchedule>& schedules, double alpha,
                             CvarBasis basis) {
    std::vector<RiskRow> rows;
    const auto& p = delta.probabilities;
    for (const auto& s : schedules) {
        const NetWelfare net = apply(delta, s);
        for (std::size_t i = 0; i < s.countries.size(); ++i) {
            const auto ntw = net.row(i);
            const auto l = loss(ntw);
            RiskRow r;
            r.mechanism = s.mechanism;
            r.country = s.countries[i];
            r.std_c = weighted_std(s.row(i), p);
            r.std_ntw = weighted_std(ntw, p);
            for (std::size_t w = 0; w < ntw.size(); ++w)
                if (ntw[w] < 0.0) r.p_loss += p[w];
            r.e_loss = expectation(l, p);
            if (basis == CvarBasis::Loss) {
                r.cvar_loss = cvar(l, p, alpha);
            } else {
                std::vector<double> neg(ntw.size());
                std::transform(ntw.begin(), ntw.end(), neg.begin(), [](double v) { return -v; });
                r.cvar_loss = cvar(neg, p, alpha);
            }
            rows.push_back(r);
        }
    }
    return rows;
}

std::vector<CorrelationEntry> correlation_tables(const DeltaWelfare& delta, const LineObservables& obs,
                                                 const std::vector<std::string>& countries) {
    std::vector<CorrelationEntry> out;
    const auto& p = delta.probabilities;
    auto add = [&](const char* table, const std::string& row, const std::string& col, const std::vector<double>& x,
                   const std::vector<double>& y) {
        try {
            out.push_back({table, row, col, correlation(x, y, p)});
        } catch (const DegenerateInputError&) {
        }
    };
    std::vector<std::vector<double>> rows;
    for (const auto& c : countries) {
        auto i = delta.country_index(c);
        if (!i) throw InputError("country '" + c + "' does not appear in the welfare delta");
        rows.push_back(delta.row(*i));
    }
    for (std::size_t a = 0; a < countries.size(); ++a)
        for (std::size_t b = 0; b < countries.size(); ++b) add("welfare", countries[a], countries[b], rows[a], rows[b]);
    const auto pf = obs.mean_price(true), pt = obs.mean_price(false);
    for (std::size_t a = 0; a < countries.size(); ++a) {
        add("price", countries[a], "price:" + obs.from_country, rows[a], pf);
        add("price", countries[a], "price:" + obs.to_country, rows[a], pt);
    }
    const auto flow = obs.flow_sum(), value = obs.flow_value();
    for (std::size_t a = 0; a < countries.size(); ++a) {
        add("measure", "flow", countries[a], flow, rows[a]);
        add("measure", "flow_value", countries[a], value, rows[a]);
    }
    return out;
}

QuantileRow five_numbers(const std::vector<double>& v, const std::vector<double>& p) {
    if (v.empty() || v.size() != p.size()) throw DimensionError("values and probabilities must be nonempty and aligned");
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    auto quantile = [&](double tau) {
        double cum = 0.0;
        for (auto k : order) {
            cum += p[k];
            if (cum >= tau - 1e-12) return v[k];
        }
        return v[order.back()];
    };
    QuantileRow q;
    q.min = v[order.front()];
    q.q1 = quantile(0.25);
    q.median = quantile(0.5);
    q.q3 = quantile(0.75);
    q.max = v[order.back()];
    return q;
}

std::vector<QuantileRow> quantiles(const DeltaWelfare& delta, const std::vector<CompensationSchedule>& schedules) {
    std::vector<QuantileRow> out;
    for (const auto& s : schedules) {
        const NetWelfare net = apply(delta, s);
        for (const char* quantity : {"compensation", "ntw"})
            for (std::size_t i = 0; i < s.countries.size(); ++i) {
                const bool comp = quantity[0] == 'c';
                QuantileRow q = five_numbers(comp ? s.row(i) : net.row(i), delta.probabilities);
                q.quantity = quantity;
                q.mechanism = s.mechanism;
                q.country = s.countries[i];
                out.push_back(q);
            }
    }
    return out;
}

void write_risk_csv(std::ostream& out, const std::vector<RiskRow>& rows) {
    csv::Writer wr(out);
    wr.header({"mechanism", "country", "std_c", "std_ntw", "p_loss", "e_loss", "cvar80_loss"});
    for (const auto& r : rows) {
        wr.field(r.mechanism).field(r.country).field(r.std_c).field(r.std_ntw).field(r.p_loss).field(r.e_loss);
        wr.field(r.cvar_loss);
        wr.end_row();
    }
}

void write_correlations_csv(std::ostream& out, const std::vector<CorrelationEntry>& rows) {
    csv::Writer wr(out);
    wr.header({"table", "row", "column", "value"});
    for (const auto& r : rows) {
        wr.field(r.table).field(r.row).field(r.column).field(r.value);
        wr.end_row();
    }
}

void write_quantiles_csv(std::ostream& out, const std::vector<QuantileRow>& rows) {
    csv::Writer wr(out);
    wr.header({"quantity", "mechanism", "country", "min", "q1", "median", "q3", "max"});
    for (const auto& r : rows) {
        wr.field(r.quantity).field(r.mechanism).field(r.country).field(r.min).field(r.q1).field(r.median);
        wr.field(r.q3).field(r.max);
        wr.end_row();
    }
}

}  // namespace tep
