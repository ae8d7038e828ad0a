#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#ifndef TEP_TEST_DATA_DIR
#define TEP_TEST_DATA_DIR "data"
#endif

namespace tep::testing {

std::filesystem::path data_dir() { return TEP_TEST_DATA_DIR; }

ScenarioSet single_period(const std::vector<DemandCurve>& curves) {
    ScenarioSet sc;
    sc.probabilities = {1.0};
    sc.season_labels = {"all"};
    sc.seasons = {{0}};
    sc.demand = Grid3<DemandCurve>(1, curves.size(), 1);
    for (std::size_t n = 0; n < curves.size(); ++n) sc.demand(0, n, 0) = curves[n];
    sc.period_weight = 1.0;
    return sc;
}

namespace {

Generator generator(const std::string& id, const std::string& node, double cost, double slope,
                    double g_max = kUnbounded) {
    Generator g;
    g.id = id;
    g.node = node;
    g.g_max = g_max;
    g.marg_cost = {cost};
    g.cost_slope = slope;
    return g;
}

}  // namespace

Case three_node() {
    Case c;
    c.network.nodes = {{"N1", "C1", {}, {}}, {"N2", "C2", {}, {}}, {"N3", "C3", {}, {}}};
    c.network.lines = {{"L12", "N1", "N2", kUnbounded, 0.0, false}, {"L23", "N2", "N3", 0.0, 0.0, true}};
    c.network.generators = {generator("G1", "N1", 0.0, 1.0)};
    c.network.link_units();
    // Node 1 has no consumers: a demand curve that never buys at a nonnegative price.
    c.scenarios = single_period({{-1.0, 0.0}, {-1.0, 6.0}, {-1.0, 6.0}});
    return c;
}

Case two_node(double cost) {
    Case c;
    c.network.nodes = {{"N1", "A", {}, {}}, {"N2", "B", {}, {}}};
    c.network.lines = {{"L21", "N2", "N1", 0.0, cost, true}};
    c.network.generators = {generator("G1", "N1", 2.0, 2.0), generator("G2", "N2", 1.0, 1.0)};
    c.network.link_units();
    c.scenarios = single_period({{-1.0, 10.0}, {-2.0, 10.0}});
    return c;
}

PpaExample ppa_example() {
    PpaExample ex;
    ex.delta.countries = {"A", "B"};
    ex.delta.probabilities = {0.5, 0.5};
    ex.delta.delta_tw.resize(2, 2);
    ex.delta.delta_tw << -10, -10, 20, 40;
    ex.obs.from_country = "A";
    ex.obs.to_country = "B";
    ex.obs.probabilities = {0.5, 0.5};
    ex.obs.period_weight = 1.0;
    ex.obs.flow = Eigen::MatrixXd::Constant(2, 1, 10.0);
    ex.obs.price_from = Eigen::MatrixXd::Constant(2, 1, 1.0);
    ex.obs.price_to.resize(2, 1);
    ex.obs.price_to << 2.0, 3.0;
    return ex;
}

Case random_case(std::mt19937_64& rng, const RandomShape& shape) {
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    auto coin = [&](double p) { return uni(0.0, 1.0) < p; };

    Case c;
    Network& net = c.network;
    ScenarioSet& sc = c.scenarios;
    const std::size_t N = pick(2, std::max<std::size_t>(2, shape.max_nodes));
    const std::size_t W = pick(1, shape.max_scenarios);
    const std::size_t T = pick(1, shape.max_periods);
    const char* countries[] = {"A", "B", "C"};
    for (std::size_t n = 0; n < N; ++n)
        net.nodes.push_back({"N" + std::to_string(n), countries[pick(0, 2)], {}, {}});

    const std::size_t S = T >= 2 && coin(0.5) ? 2 : 1;
    sc.season_labels.clear();
    sc.seasons.assign(S, {});
    for (std::size_t s = 0; s < S; ++s) sc.season_labels.push_back("s" + std::to_string(s));
    for (std::size_t t = 0; t < T; ++t) sc.seasons[t * S / T].push_back(t);

    std::vector<double> p(W);
    for (auto& v : p) v = uni(0.2, 1.0);
    double total = 0.0;
    for (double v : p) total += v;
    for (auto& v : p) v /= total;
    sc.probabilities = p;
    sc.period_weight = coin(0.5) ? 1.0 : 2.5;
    sc.demand = Grid3<DemandCurve>(W, N, T);
    for (std::size_t w = 0; w < W; ++w)
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t t = 0; t < T; ++t) sc.demand(w, n, t) = {-uni(0.2, 2.0), uni(20.0, 100.0)};

    for (std::size_t n = 0; n < N; ++n) {
        const std::size_t G = pick(0, 2);
        for (std::size_t k = 0; k < G; ++k) {
            Generator g;
            g.id = "G" + std::to_string(n) + "_" + std::to_string(k);
            g.node = net.nodes[n].id;
            g.cost_slope = coin(0.5) ? 0.0 : uni(0.05, 1.0);
            g.expandable = shape.generator_investment && coin(0.3);
            g.g_max = !g.expandable && coin(0.3) ? kUnbounded : uni(5.0, 60.0);
            g.inv_cost = g.expandable ? uni(0.5, 10.0) : 0.0;
            for (std::size_t s = 0; s < S; ++s) g.marg_cost.push_back(uni(0.0, 40.0));
            if (shape.energy_limits && std::isfinite(g.g_max) && coin(0.3)) {
                g.q_max_seasonal.resize(static_cast<Eigen::Index>(W), static_cast<Eigen::Index>(S));
                for (std::size_t w = 0; w < W; ++w)
                    for (std::size_t s = 0; s < S; ++s)
                        g.q_max_seasonal(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(s)) =
                            uni(0.3, 0.9) * g.g_max * static_cast<double>(sc.seasons[s].size());
            }
            net.generators.push_back(g);
        }
        if (shape.renewables && coin(0.3)) {
            Renewable r;
            r.id = "R" + std::to_string(n);
            r.node = net.nodes[n].id;
            r.g_r = uni(0.0, 20.0);
            r.expandable = shape.generator_investment && coin(0.3);
            r.inv_cost = r.expandable ? uni(0.5, 5.0) : 0.0;
            r.profile.resize(static_cast<Eigen::Index>(W), static_cast<Eigen::Index>(T));
            for (Eigen::Index i = 0; i < r.profile.size(); ++i) r.profile.data()[i] = uni(0.0, 1.0);
            net.renewables.push_back(r);
        }
    }

    auto add_line = [&](std::size_t a, std::size_t b) {
        Line l;
        l.id = "L" + std::to_string(net.lines.size());
        l.from_node = net.nodes[a].id;
        l.to_node = net.nodes[b].id;
        l.f_max = coin(0.2) ? kUnbounded : uni(0.0, 30.0);
        l.expandable = std::isfinite(l.f_max) && coin(0.5);
        l.inv_cost = l.expandable ? uni(0.1, 5.0) : 0.0;
        net.lines.push_back(l);
    };
    for (std::size_t n = 1; n < N; ++n) {
        const std::size_t parent = pick(0, n - 1);
        coin(0.5) ? add_line(parent, n) : add_line(n, parent);
    }
    if (N >= 3 && coin(0.3)) {
        const std::size_t a = pick(0, N - 1);
        std::size_t b = pick(0, N - 2);
        if (b >= a) ++b;
        add_line(a, b);
    }
    net.link_units();
    return c;
}

namespace {

// Largest welfare of one node for a given net import, by minimizing the convex
// dual function over the local price (golden-section search).
struct NodeOracle {
    DemandCurve demand;
    std::vector<double> cost, slope, cap;
    double must_take = 0.0;  // renewable output
    double hours = 1.0;
    double floor = -1e6, ceiling = 1e6;  // bracket on any shadow price in the instance

    double dual(double price, double import) const {
        // consumer surplus at this price
        double cs = 0.0;
        if (price < demand.intercept) {
            const double d = (price - demand.intercept) / demand.slope;
            cs = 0.5 * (demand.intercept - price) * d;
        }
        double ps = 0.0;
        for (std::size_t g = 0; g < cost.size(); ++g) {
            if (price <= cost[g]) continue;
            if (slope[g] > 0.0) {
                const double q = std::min(cap[g], (price - cost[g]) / slope[g]);
                ps += (price - cost[g]) * q - 0.5 * slope[g] * q * q;
            } else {
                ps += (price - cost[g]) * cap[g];
            }
        }
        return cs + ps + price * (import + must_take);
    }

    double welfare(double import) const {
        double hi = ceiling, lo = floor;
        // the price floor doubles as an exact penalty on undeliverable exports
        for (std::size_t g = 0; g < cost.size(); ++g)
            if (std::isinf(cap[g]) && slope[g] == 0.0) hi = std::min(hi, cost[g]);
        const double r = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = lo, b = hi;
        double x1 = b - r * (b - a), x2 = a + r * (b - a);
        double f1 = dual(x1, import), f2 = dual(x2, import);
        for (int it = 0; it < 200 && b - a > 1e-13 * (1.0 + std::abs(a)); ++it) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = dual(x1, import);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = dual(x2, import);
            }
        }
        return std::min({f1, f2, dual(hi, import)});
    }
};

}  // namespace

double brute_force_objective(const Case& c, const ExpansionMask& mask, double resolution) {
    const Network& net = c.network;
    const ScenarioSet& sc = c.scenarios;
    if (sc.num_scenarios() != 1 || sc.num_periods() != 1) throw std::invalid_argument("single scenario and period only");
    const std::size_t N = net.nodes.size(), L = net.lines.size();
    std::vector<NodeOracle> nodes(N);
    for (std::size_t n = 0; n < N; ++n) nodes[n].demand = sc.demand(0, n, 0);
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const Generator& gen = net.generators[g];
        if (gen.expandable && mask.generators[g]) throw std::invalid_argument("generator investment not supported");
        NodeOracle& o = nodes[*net.node_index(gen.node)];
        o.cost.push_back(gen.marg_cost.at(0));
        o.slope.push_back(gen.cost_slope);
        double cap = gen.g_max;
        if (gen.q_max_seasonal.size() > 0) cap = std::min(cap, gen.q_max_seasonal(0, 0));
        o.cap.push_back(cap);
    }
    for (std::size_t r = 0; r < net.renewables.size(); ++r) {
        const Renewable& ren = net.renewables[r];
        if (ren.expandable && mask.renewables[r]) throw std::invalid_argument("renewable investment not supported");
        nodes[*net.node_index(ren.node)].must_take += ren.g_r * ren.profile(0, 0);
    }

    // Flow box: nothing sensible moves more than every consumer can take at price zero.
    double volume = 0.0;
    for (const auto& o : nodes) {
        volume += o.demand.intercept / -o.demand.slope + o.must_take;
        for (double cap : o.cap)
            if (std::isfinite(cap)) volume += cap;
    }
    // A loose penalty would turn the kink at an infeasible boundary into a cliff the
    // line search can only approach to within its tolerance.
    double floor = 0.0, ceiling = 0.0;
    for (const auto& o : nodes) {
        floor = std::min(floor, o.demand.intercept + o.demand.slope * volume);
        ceiling = std::max(ceiling, o.demand.intercept);
        for (std::size_t g = 0; g < o.cost.size(); ++g) {
            floor = std::min(floor, o.cost[g]);
            ceiling = std::max(ceiling, o.cost[g] + o.slope[g] * std::min(o.cap[g], volume));
        }
    }
    for (auto& o : nodes) {
        o.floor = floor - 1.0;
        o.ceiling = ceiling + 1.0;
    }
    std::vector<double> lo(L), hi(L);
    std::vector<bool> buildable(L);
    for (std::size_t l = 0; l < L; ++l) {
        buildable[l] = net.lines[l].expandable && mask.lines[l];
        const double bound = buildable[l] ? volume : std::min(volume, net.lines[l].f_max);
        lo[l] = -bound;
        hi[l] = bound;
    }
    std::vector<std::size_t> from(L), to(L);
    for (std::size_t l = 0; l < L; ++l) {
        from[l] = *net.node_index(net.lines[l].from_node);
        to[l] = *net.node_index(net.lines[l].to_node);
    }
    const double weight = sc.probabilities[0] * sc.period_weight;
    auto objective = [&](const std::vector<double>& f) {
        std::vector<double> import(N, 0.0);
        double invest = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            import[from[l]] -= f[l];
            import[to[l]] += f[l];
            if (buildable[l]) invest += net.lines[l].inv_cost * std::max(0.0, std::abs(f[l]) - net.lines[l].f_max);
        }
        double w = 0.0;
        for (std::size_t n = 0; n < N; ++n) w += nodes[n].welfare(import[n]);
        return weight * w - invest;
    };

    // The objective is jointly concave in f, so maximizing one coordinate at a time
    // with nested golden sections finds the global optimum.
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> f(L, 0.0);
    std::function<double(std::size_t)> inner = [&](std::size_t l) -> double {
        if (l == L) {
            const double v = objective(f);
            best = std::max(best, v);
            return v;
        }
        auto at = [&](double x) {
            f[l] = x;
            return inner(l + 1);
        };
        double a = lo[l], b = hi[l];
        double x1 = b - r * (b - a), x2 = a + r * (b - a);
        double f1 = at(x1), f2 = at(x2);
        while (b - a > resolution) {
            if (f1 > f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - r * (b - a);
                f1 = at(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + r * (b - a);
                f2 = at(x2);
            }
        }
        // optimum may sit on the box edge
        return std::max({f1, f2, at(lo[l]), at(hi[l])});
    };
    if (L == 0) return objective(f);
    inner(0);
    return best;
}

DeltaWelfare random_delta(std::mt19937_64& rng, const std::vector<std::string>& countries, std::size_t scenarios) {
    std::normal_distribution<double> z(0.0, 1.0);
    DeltaWelfare d;
    d.countries = countries;
    d.probabilities.assign(scenarios, 1.0 / static_cast<double>(scenarios));
    d.delta_tw.resize(static_cast<Eigen::Index>(countries.size()), static_cast<Eigen::Index>(scenarios));
    for (Eigen::Index w = 0; w < d.delta_tw.cols(); ++w) {
        const double common = z(rng);
        for (Eigen::Index i = 0; i < d.delta_tw.rows(); ++i)
            d.delta_tw(i, w) = 50.0 * (i % 2 == 0 ? 1.0 : -0.6) * common + 30.0 * z(rng) + (i == 0 ? 40.0 : -10.0);
    }
    return d;
}

LineObservables random_observables(std::mt19937_64& rng, const std::string& from, const std::string& to,
                                   const std::vector<double>& probabilities, std::size_t periods) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    LineObservables o;
    o.from_country = from;
    o.to_country = to;
    o.probabilities = probabilities;
    o.period_weight = 2.0;
    const auto W = static_cast<Eigen::Index>(probabilities.size()), T = static_cast<Eigen::Index>(periods);
    o.flow.resize(W, T);
    o.price_from.resize(W, T);
    o.price_to.resize(W, T);
    for (Eigen::Index w = 0; w < W; ++w)
        for (Eigen::Index t = 0; t < T; ++t) {
            o.flow(w, t) = 10.0 * u(rng) - 2.0;
            o.price_from(w, t) = 20.0 + 30.0 * u(rng);
            o.price_to(w, t) = o.price_from(w, t) + 15.0 * u(rng);
        }
    return o;
}

}  // namespace tep::testing
