#include "tep/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tep/errors.hpp"

namespace tep::analytic {

double LinearCurve::quantity_at(double price) const {
    const double q = (price - intercept) / slope;
    return q > 0.0 ? q : 0.0;
}

double LinearCurve::surplus_at(double price) const { return 0.5 * std::abs(price - intercept) * quantity_at(price); }

namespace {

// sum_k sign_k * q_k(p) - target, a nonincreasing piecewise-linear function of p
// when demand terms carry +1 and supply terms -1.
struct Excess {
    std::vector<std::pair<LinearCurve, double>> terms;
    double target = 0.0;

    double operator()(double p) const {
        double v = -target;
        for (const auto& [c, s] : terms) v += s * c.quantity_at(p);
        return v;
    }

    std::vector<double> breakpoints() const {
        std::vector<double> b;
        for (const auto& t : terms) b.push_back(t.first.intercept);
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

    double root() const {
        const auto b = breakpoints();
        const double g_first = (*this)(b.front()), g_last = (*this)(b.back());
        auto linear = [&](double p0, double g0, double p1, double g1) { return p0 - g0 * (p1 - p0) / (g1 - g0); };
        if (g_first < 0.0) {
            const double p1 = b.front() - 1.0, g1 = (*this)(p1);
            if (!(g1 > g_first)) throw DegenerateInputError("supply and demand curves do not intersect");
            return linear(b.front(), g_first, p1, g1);
        }
        if (g_last > 0.0) {
            const double p1 = b.back() + 1.0, g1 = (*this)(p1);
            if (!(g1 < g_last)) throw DegenerateInputError("supply and demand curves do not intersect");
            return linear(b.back(), g_last, p1, g1);
        }
        for (std::size_t k = 0; k + 1 < b.size(); ++k) {
            const double g0 = (*this)(b[k]), g1 = (*this)(b[k + 1]);
            if (g0 == 0.0) return b[k];
            if (g0 > 0.0 && g1 <= 0.0) return g1 == 0.0 ? b[k + 1] : linear(b[k], g0, b[k + 1], g1);
        }
        return b.back();
    }

    // Exact integral over [lo, hi] of the piecewise-linear function plus target.
    double integral(double lo, double hi) const {
        const double sign = lo <= hi ? 1.0 : -1.0;
        if (lo > hi) std::swap(lo, hi);
        std::vector<double> pts{lo};
        for (double p : breakpoints())
            if (p > lo && p < hi) pts.push_back(p);
        pts.push_back(hi);
        double area = 0.0;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k)
            area += 0.5 * ((*this)(pts[k]) + (*this)(pts[k + 1]) + 2.0 * target) * (pts[k + 1] - pts[k]);
        return sign * area;
    }
};

void check_demand(const LinearCurve& c) {
    if (!(c.slope < 0.0)) throw DomainError("demand curve slope must be negative");
}
void check_supply(const LinearCurve& c) {
    if (!(c.slope > 0.0)) throw DomainError("supply curve slope must be positive");
}

double node_welfare(const LinearCurve& d, const LinearCurve& s, double price) {
    return d.surplus_at(price) + s.surplus_at(price);
}

}  // namespace

double import_at(const LinearCurve& d1, const LinearCurve& s1, double price) {
    return d1.quantity_at(price) - s1.quantity_at(price);
}

double export_at(const LinearCurve& d2, const LinearCurve& s2, double price) {
    return s2.quantity_at(price) - d2.quantity_at(price);
}

TwoNodeSolution solve_two_node(const LinearCurve& d1, const LinearCurve& s1, const LinearCurve& d2,
                               const LinearCurve& s2, std::variant<Capacity, MarginalCost> spec) {
    check_demand(d1);
    check_demand(d2);
    check_supply(s1);
    check_supply(s2);

    const Excess node1{{{d1, 1.0}, {s1, -1.0}}, 0.0};
    const Excess node2{{{d2, 1.0}, {s2, -1.0}}, 0.0};
    const Excess both{{{d1, 1.0}, {s1, -1.0}, {d2, 1.0}, {s2, -1.0}}, 0.0};

    TwoNodeSolution out;
    out.autarky_price1 = node1.root();
    out.autarky_price2 = node2.root();
    out.common_price = both.root();
    out.free_flow = import_at(d1, s1, out.common_price);

    const double direction = out.free_flow >= 0.0 ? 1.0 : -1.0;
    auto prices = [&](double x) {
        if (x >= std::abs(out.free_flow)) return std::array<double, 3>{out.common_price, out.common_price, out.free_flow};
        const double f = direction * x;
        return std::array<double, 3>{Excess{node1.terms, f}.root(), Excess{node2.terms, -f}.root(), f};
    };
    auto gap = [&](double x) {
        const auto p = prices(x);
        return std::abs(p[0] - p[1]);
    };

    if (const auto* cap = std::get_if<Capacity>(&spec)) {
        if (!(cap->mw >= 0.0)) throw DomainError("capacity must be nonnegative");
        out.capacity = cap->mw;
    } else {
        const double c = std::get<MarginalCost>(spec).eur_per_mw;
        if (!(c >= 0.0)) throw DomainError("marginal cost must be nonnegative");
        out.marginal_cost = c;
        double x = 0.0;
        if (c == 0.0) {
            x = std::abs(out.free_flow);
        } else if (gap(0.0) > c) {
            double lo = 0.0, hi = std::abs(out.free_flow);
            for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                (gap(mid) > c ? lo : hi) = mid;
            }
            // The gap is linear on the final bracket.
            const double glo = gap(lo), ghi = gap(hi);
            x = glo == ghi ? lo : lo + (glo - c) * (hi - lo) / (glo - ghi);
        }
        out.optimal_capacity = x;
        out.capacity = x;
    }

    const auto p = prices(out.capacity);
    out.price1 = p[0];
    out.price2 = p[1];
    out.flow = p[2];
    out.congestion_rent = (out.price1 - out.price2) * out.flow;
    out.gain1 = node_welfare(d1, s1, out.price1) - node_welfare(d1, s1, out.autarky_price1);
    out.gain2 = node_welfare(d2, s2, out.price2) - node_welfare(d2, s2, out.autarky_price2);
    // d(welfare)/d(price) is minus the import quantity at node 1 and plus the export quantity at node 2.
    out.gain1_area = node1.integral(out.price1, out.autarky_price1);
    out.gain2_area = -node2.integral(out.autarky_price2, out.price2);
    return out;
}

ThreeNodeSolution solve_three_node(const LinearCurve& s1, const LinearCurve& d2, const LinearCurve& d3) {
    check_supply(s1);
    check_demand(d2);
    check_demand(d3);
    auto situation = [&](double price, bool connected) {
        Situation s;
        s.price = price;
        s.ps[0] = s1.surplus_at(price);
        s.cs[1] = d2.surplus_at(price);
        s.cs[2] = connected ? d3.surplus_at(price) : 0.0;
        for (int i = 0; i < 3; ++i) {
            s.tw[i] = s.cs[i] + s.ps[i];
            s.system += s.tw[i];
        }
        return s;
    };
    const double p_old = Excess{{{d2, 1.0}, {s1, -1.0}}, 0.0}.root();
    const double p_new = Excess{{{d2, 1.0}, {d3, 1.0}, {s1, -1.0}}, 0.0}.root();
    if (s1.quantity_at(p_old) <= 0.0 || s1.quantity_at(p_new) <= 0.0)
        throw DegenerateInputError("no market-clearing point with positive quantity");
    ThreeNodeSolution out;
    out.before = situation(p_old, false);
    out.after = situation(p_new, true);
    for (int i = 0; i < 3; ++i) out.delta_tw[i] = out.after.tw[i] - out.before.tw[i];
    return out;
}

}  // namespace tep::analytic
