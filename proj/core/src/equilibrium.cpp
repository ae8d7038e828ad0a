#include "tep/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include "tep/csv.hpp"
#include "tep/errors.hpp"

namespace tep {

namespace {

using Triplet = Eigen::Triplet<double>;

struct Topology {
    std::vector<std::size_t> gen_node, ren_node, from, to;
    std::vector<std::size_t> season_of;
};

Topology topology(const Network& net, const ScenarioSet& sc) {
    Topology tp;
    for (const auto& g : net.generators) tp.gen_node.push_back(*net.node_index(g.node));
    for (const auto& r : net.renewables) tp.ren_node.push_back(*net.node_index(r.node));
    for (const auto& l : net.lines) {
        tp.from.push_back(*net.node_index(l.from_node));
        tp.to.push_back(*net.node_index(l.to_node));
    }
    tp.season_of = sc.season_of_period();
    return tp;
}

double energy_limit(const Generator& g, std::size_t scenario, std::size_t season) {
    if (g.q_max_seasonal.size() == 0) return kUnbounded;
    return g.q_max_seasonal(static_cast<Eigen::Index>(scenario), static_cast<Eigen::Index>(season));
}

struct Fixed {
    std::vector<double> y, y_r, x;
};

// An investment column that the optimizer may move.
bool free_column(bool expandable, const std::vector<bool>& allow, std::size_t i, const Fixed* fixed) {
    return expandable && allow[i] && fixed == nullptr;
}

QpProblem build(const Network& net, const ScenarioSet& sc, const ExpansionMask& mask,
                std::vector<std::size_t> slots, std::vector<double> weights, const Fixed* fixed,
                const ToleranceSet& tol) {
    if (slots.empty()) throw InputError("scenario set is empty");
    const std::size_t N = net.nodes.size(), G = net.generators.size(), L = net.lines.size(),
                      R = net.renewables.size(), T = sc.num_periods();
    if (mask.lines.size() != L || mask.generators.size() != G || mask.renewables.size() != R)
        throw DimensionError("expansion mask does not match the network");
    const Topology tp = topology(net, sc);

    QpProblem p;
    p.mask = mask;
    p.slot_weights = weights;
    p.index = VariableIndex(slots, N, G, L, T);
    p.index.add_investment_columns(net);
    const VariableIndex& ix = p.index;
    const auto nv = static_cast<Eigen::Index>(ix.num_variables());

    Eigen::VectorXd c = Eigen::VectorXd::Zero(nv);
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(nv);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(nv, kUnbounded);
    std::vector<Triplet> h, a, gm;
    std::vector<double> b, hvec;

    // Investment columns.
    auto inv_value = [&](const std::vector<double>* v, std::size_t i) { return v ? (*v)[i] : 0.0; };
    double total_weight = 0.0;
    for (double w : weights) total_weight += w * static_cast<double>(T);
    auto investment = [&](int col, double cost, bool is_free, double pinned) {
        if (col < 0) return;
        c[col] = cost;
        if (!is_free) {
            lo[col] = hi[col] = pinned;
        } else if (cost == 0.0 && tol.zero_cost_regularization > 0.0) {
            h.emplace_back(col, col, tol.zero_cost_regularization * total_weight);
        }
    };
    std::vector<bool> gen_free(G), ren_free(R), line_free(L);
    std::vector<double> gen_extra(G), line_extra(L);
    for (std::size_t g = 0; g < G; ++g) {
        gen_free[g] = free_column(net.generators[g].expandable, mask.generators, g, fixed);
        gen_extra[g] = inv_value(fixed ? &fixed->y : nullptr, g);
        investment(ix.y(g), net.generators[g].inv_cost, gen_free[g], gen_extra[g]);
    }
    for (std::size_t r = 0; r < R; ++r) {
        ren_free[r] = free_column(net.renewables[r].expandable, mask.renewables, r, fixed);
        investment(ix.y_r(r), net.renewables[r].inv_cost, ren_free[r], inv_value(fixed ? &fixed->y_r : nullptr, r));
    }
    for (std::size_t l = 0; l < L; ++l) {
        line_free[l] = free_column(net.lines[l].expandable, mask.lines, l, fixed);
        line_extra[l] = inv_value(fixed ? &fixed->x : nullptr, l);
        investment(ix.x(l), net.lines[l].inv_cost, line_free[l], line_extra[l]);
    }

    for (std::size_t s = 0; s < slots.size(); ++s) {
        const std::size_t w = slots[s];
        const double W = weights[s];
        for (std::size_t t = 0; t < T; ++t) {
            const std::size_t season = tp.season_of[t];
            for (std::size_t n = 0; n < N; ++n) {
                const DemandCurve& dc = sc.demand(w, n, t);
                const int col = ix.d(s, n, t);
                h.emplace_back(col, col, -W * dc.slope);
                c[col] = -W * dc.intercept;
            }
            for (std::size_t g = 0; g < G; ++g) {
                const Generator& gen = net.generators[g];
                const int col = ix.q(s, g, t);
                c[col] = W * gen.marg_cost[season];
                if (gen.cost_slope != 0.0) h.emplace_back(col, col, W * gen.cost_slope);
                if (std::isinf(gen.g_max)) continue;
                if (gen_free[g]) {
                    const int row = static_cast<int>(hvec.size());
                    gm.emplace_back(row, col, 1.0);
                    gm.emplace_back(row, ix.y(g), -1.0);
                    hvec.push_back(gen.g_max);
                    p.ineq_tags.push_back({RowOrigin::Capacity, s, g, t});
                } else {
                    hi[col] = gen.g_max + gen_extra[g];
                }
            }
            for (std::size_t l = 0; l < L; ++l) {
                const Line& line = net.lines[l];
                const int col = ix.f(s, l, t);
                lo[col] = -kUnbounded;
                if (std::isinf(line.f_max)) continue;
                if (line_free[l]) {
                    for (int sign : {1, -1}) {
                        const int row = static_cast<int>(hvec.size());
                        gm.emplace_back(row, col, sign);
                        gm.emplace_back(row, ix.x(l), -1.0);
                        hvec.push_back(line.f_max);
                        p.ineq_tags.push_back({sign > 0 ? RowOrigin::FlowUpper : RowOrigin::FlowLower, s, l, t});
                    }
                } else {
                    hi[col] = line.f_max + line_extra[l];
                    lo[col] = -(line.f_max + line_extra[l]);
                }
            }
            // Market clearing: d + A f - q - yR*I = G^R*I.
            for (std::size_t n = 0; n < N; ++n) {
                const int row = static_cast<int>(b.size());
                a.emplace_back(row, ix.d(s, n, t), 1.0);
                double rhs = 0.0;
                for (std::size_t l = 0; l < L; ++l) {
                    if (tp.from[l] == n) a.emplace_back(row, ix.f(s, l, t), 1.0);
                    if (tp.to[l] == n) a.emplace_back(row, ix.f(s, l, t), -1.0);
                }
                for (std::size_t g = 0; g < G; ++g)
                    if (tp.gen_node[g] == n) a.emplace_back(row, ix.q(s, g, t), -1.0);
                for (std::size_t r = 0; r < R; ++r) {
                    if (tp.ren_node[r] != n) continue;
                    const Renewable& ren = net.renewables[r];
                    const double factor =
                        ren.profile(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(t));
                    rhs += ren.g_r * factor;
                    if (ix.y_r(r) >= 0 && factor != 0.0) a.emplace_back(row, ix.y_r(r), -factor);
                }
                b.push_back(rhs);
                p.eq_tags.push_back({RowOrigin::MarketClearing, s, n, t});
            }
        }
        // Seasonal energy limits.
        for (std::size_t g = 0; g < G; ++g) {
            for (std::size_t season = 0; season < sc.seasons.size(); ++season) {
                const double qmax = energy_limit(net.generators[g], w, season);
                if (std::isinf(qmax)) continue;
                const int row = static_cast<int>(hvec.size());
                for (auto t : sc.seasons[season]) gm.emplace_back(row, ix.q(s, g, t), 1.0);
                hvec.push_back(qmax);
                p.ineq_tags.push_back({RowOrigin::EnergyLimit, s, g, season});
            }
        }
    }

    QuadraticProgram& qp = p.qp;
    qp.hessian.resize(nv, nv);
    qp.hessian.setFromTriplets(h.begin(), h.end());
    qp.linear = c;
    qp.eq_matrix.resize(static_cast<Eigen::Index>(b.size()), nv);
    qp.eq_matrix.setFromTriplets(a.begin(), a.end());
    qp.eq_rhs = Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    qp.ineq_matrix.resize(static_cast<Eigen::Index>(hvec.size()), nv);
    qp.ineq_matrix.setFromTriplets(gm.begin(), gm.end());
    qp.ineq_rhs = Eigen::Map<Eigen::VectorXd>(hvec.data(), static_cast<Eigen::Index>(hvec.size()));
    qp.lower = lo;
    qp.upper = hi;
    p.network = std::make_shared<const Network>(net);
    p.scenarios = std::make_shared<const ScenarioSet>(sc);
    return p;
}

DispatchSolution empty_solution(const Network& net, const ScenarioSet& sc) {
    const std::size_t W = sc.num_scenarios(), T = sc.num_periods();
    DispatchSolution s;
    s.q = Grid3<double>(W, net.generators.size(), T);
    s.d = Grid3<double>(W, net.nodes.size(), T);
    s.f = Grid3<double>(W, net.lines.size(), T);
    s.y.assign(net.generators.size(), 0.0);
    s.y_r.assign(net.renewables.size(), 0.0);
    s.x.assign(net.lines.size(), 0.0);
    s.price = Grid3<double>(W, net.nodes.size(), T);
    s.capacity_dual = Grid3<double>(W, net.generators.size(), T);
    s.energy_dual = Grid3<double>(W, net.generators.size(), sc.seasons.size());
    s.flow_upper_dual = Grid3<double>(W, net.lines.size(), T);
    s.flow_lower_dual = Grid3<double>(W, net.lines.size(), T);
    s.probabilities = sc.probabilities;
    s.period_weight = sc.period_weight;
    return s;
}

QpResult run(const QpProblem& p, const ToleranceSet& tol) {
    QpSettings settings;
    settings.feasibility_tol = std::min(1e-10, tol.feasibility);
    settings.optimality_tol = std::min(1e-10, tol.kkt * 1e-4);
    settings.max_iterations = tol.max_iterations;
    settings.start_seed = tol.solver_seed;
    QpResult r = solve_qp(p.qp, settings);
    if (!r.converged)
        throw NonconvergenceError("interior-point method did not converge within " +
                                      std::to_string(r.iterations) + " iterations",
                                  r.iterations, r.primal_residual, r.dual_residual, r.complementarity);
    return r;
}

// Copies the slot blocks of a QP result into the full-size solution record.
void extract(const QpProblem& p, const QpResult& r, DispatchSolution& s, bool investments) {
    const Network& net = *p.network;
    const VariableIndex& ix = p.index;
    const std::size_t N = net.nodes.size(), G = net.generators.size(), L = net.lines.size(),
                      T = p.scenarios->num_periods();
    for (std::size_t k = 0; k < ix.scenarios().size(); ++k) {
        const std::size_t w = ix.scenarios()[k];
        const double W = p.slot_weights[k];
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t n = 0; n < N; ++n) s.d(w, n, t) = std::max(0.0, r.x[ix.d(k, n, t)]);
            for (std::size_t g = 0; g < G; ++g) {
                const int col = ix.q(k, g, t);
                s.q(w, g, t) = std::max(0.0, r.x[col]);
                s.capacity_dual(w, g, t) = r.upper_duals[col] / W;
            }
            for (std::size_t l = 0; l < L; ++l) {
                const int col = ix.f(k, l, t);
                s.f(w, l, t) = r.x[col];
                s.flow_upper_dual(w, l, t) = r.upper_duals[col] / W;
                s.flow_lower_dual(w, l, t) = r.lower_duals[col] / W;
            }
        }
    }
    for (std::size_t i = 0; i < p.eq_tags.size(); ++i) {
        const RowTag& tag = p.eq_tags[i];
        s.price(ix.scenarios()[tag.scenario], tag.unit, tag.period) =
            r.eq_duals[static_cast<Eigen::Index>(i)] / p.slot_weights[tag.scenario];
    }
    for (std::size_t i = 0; i < p.ineq_tags.size(); ++i) {
        const RowTag& tag = p.ineq_tags[i];
        const std::size_t w = ix.scenarios()[tag.scenario];
        const double z = r.ineq_duals[static_cast<Eigen::Index>(i)] / p.slot_weights[tag.scenario];
        switch (tag.origin) {
            case RowOrigin::Capacity: s.capacity_dual(w, tag.unit, tag.period) = z; break;
            case RowOrigin::EnergyLimit: s.energy_dual(w, tag.unit, tag.period) = z; break;
            case RowOrigin::FlowUpper: s.flow_upper_dual(w, tag.unit, tag.period) = z; break;
            case RowOrigin::FlowLower: s.flow_lower_dual(w, tag.unit, tag.period) = z; break;
            case RowOrigin::MarketClearing: break;
        }
    }
    if (!investments) return;
    auto take = [&](int col) { return col < 0 ? 0.0 : std::max(0.0, r.x[col]); };
    for (std::size_t g = 0; g < G; ++g) s.y[g] = take(ix.y(g));
    for (std::size_t rr = 0; rr < net.renewables.size(); ++rr) s.y_r[rr] = take(ix.y_r(rr));
    for (std::size_t l = 0; l < L; ++l) s.x[l] = take(ix.x(l));

    // Free capacity leaves the objective unchanged, so the interior point stops
    // somewhere on a flat face. Shrink to the smallest capacity the dispatch uses.
    for (std::size_t g = 0; g < G; ++g) {
        const Generator& gen = net.generators[g];
        if (ix.y(g) < 0 || gen.inv_cost != 0.0 || p.qp.lower[ix.y(g)] == p.qp.upper[ix.y(g)]) continue;
        double need = 0.0;
        for (std::size_t w : ix.scenarios())
            for (std::size_t t = 0; t < T; ++t) need = std::max(need, s.q(w, g, t) - gen.g_max);
        s.y[g] = std::min(s.y[g], need);
    }
    for (std::size_t l = 0; l < L; ++l) {
        const Line& line = net.lines[l];
        if (ix.x(l) < 0 || line.inv_cost != 0.0 || p.qp.lower[ix.x(l)] == p.qp.upper[ix.x(l)]) continue;
        double need = 0.0;
        for (std::size_t w : ix.scenarios())
            for (std::size_t t = 0; t < T; ++t) need = std::max(need, std::abs(s.f(w, l, t)) - line.f_max);
        s.x[l] = std::min(s.x[l], need);
    }
}

// Natural residual of a sign-constrained variable v >= 0 whose objective
// gradient (in maximization form) is g: zero iff v >= 0, g <= 0, v*g = 0.
double natural(double v, double g) { return std::abs(std::min(v, -g)); }

double comp(double slack, double mult) {
    if (std::isinf(slack)) return std::abs(mult);
    return std::max(std::abs(std::min(slack, mult)), std::max(0.0, -mult));
}

}  // namespace

// ---------------------------------------------------------------------------

ExpansionMask ExpansionMask::allow_all(const Network& network) {
    ExpansionMask m;
    m.lines.assign(network.lines.size(), true);
    m.generators.assign(network.generators.size(), true);
    m.renewables.assign(network.renewables.size(), true);
    return m;
}

ExpansionMask ExpansionMask::deny_all(const Network& network) {
    ExpansionMask m;
    m.lines.assign(network.lines.size(), false);
    m.generators.assign(network.generators.size(), false);
    m.renewables.assign(network.renewables.size(), false);
    return m;
}

ExpansionMask& ExpansionMask::set_line(const Network& network, const Id& line, bool allow) {
    auto i = network.line_index(line);
    if (!i) throw InputError("unknown line '" + line + "'");
    lines.at(*i) = allow;
    return *this;
}

ExpansionMask& ExpansionMask::set_generator(const Network& network, const Id& gen, bool allow) {
    auto i = network.generator_index(gen);
    if (!i) throw InputError("unknown generator '" + gen + "'");
    generators.at(*i) = allow;
    return *this;
}

ExpansionMask& ExpansionMask::set_renewable(const Network& network, const Id& ren, bool allow) {
    auto i = network.renewable_index(ren);
    if (!i) throw InputError("unknown renewable '" + ren + "'");
    renewables.at(*i) = allow;
    return *this;
}

VariableIndex::VariableIndex(std::vector<std::size_t> scenarios, std::size_t nodes, std::size_t gens,
                             std::size_t lines, std::size_t periods)
    : scenarios_(std::move(scenarios)), nodes_(nodes), gens_(gens), lines_(lines), periods_(periods) {
    total_ = num_operational();
    y_.assign(gens, -1);
    x_.assign(lines, -1);
}

void VariableIndex::add_investment_columns(const Network& network) {
    total_ = num_operational();
    y_.assign(network.generators.size(), -1);
    yr_.assign(network.renewables.size(), -1);
    x_.assign(network.lines.size(), -1);
    for (std::size_t g = 0; g < y_.size(); ++g)
        if (network.generators[g].expandable) y_[g] = static_cast<int>(total_++);
    for (std::size_t r = 0; r < yr_.size(); ++r)
        if (network.renewables[r].expandable) yr_[r] = static_cast<int>(total_++);
    for (std::size_t l = 0; l < x_.size(); ++l)
        if (network.lines[l].expandable) x_[l] = static_cast<int>(total_++);
}

std::size_t VariableIndex::num_y() const { return std::count_if(y_.begin(), y_.end(), [](int c) { return c >= 0; }); }
std::size_t VariableIndex::num_y_r() const {
    return std::count_if(yr_.begin(), yr_.end(), [](int c) { return c >= 0; });
}
std::size_t VariableIndex::num_x() const { return std::count_if(x_.begin(), x_.end(), [](int c) { return c >= 0; }); }

std::size_t QpProblem::num_market_clearing_rows() const {
    return static_cast<std::size_t>(
        std::count_if(eq_tags.begin(), eq_tags.end(), [](const RowTag& t) { return t.origin == RowOrigin::MarketClearing; }));
}

bool QpProblem::concave() const {
    // Diagonal dominance with a nonnegative diagonal is sufficient for PSD.
    const SparseMatrix& H = qp.hessian;
    for (Eigen::Index j = 0; j < H.outerSize(); ++j) {
        double diag = 0.0, off = 0.0;
        for (SparseMatrix::InnerIterator it(H, j); it; ++it) {
            if (it.row() == j) diag += it.value();
            else off += std::abs(it.value());
        }
        if (diag < 0.0 || diag < off) return false;
    }
    return true;
}

double KktReport::max_scaled() const {
    const double s = std::max(price_scale, quantity_scale);
    double worst = 0.0;
    for (const ActorResiduals* a : {&generator, &renewable, &consumer, &tso, &market_clearing}) {
        worst = std::max(worst, std::max(a->stationarity, a->complementarity) / s);
        worst = std::max(worst, a->primal / quantity_scale);
    }
    return worst;
}

QpProblem assemble(const Network& network, const ScenarioSet& scenarios, const ExpansionMask& mask,
                   const ToleranceSet& tol) {
    std::vector<std::size_t> slots(scenarios.num_scenarios());
    std::vector<double> weights(slots.size());
    for (std::size_t w = 0; w < slots.size(); ++w) {
        slots[w] = w;
        weights[w] = scenarios.probabilities[w] * scenarios.period_weight;
    }
    return build(network, scenarios, mask, std::move(slots), std::move(weights), nullptr, tol);
}

DispatchSolution solve(const QpProblem& problem, const ToleranceSet& tol) {
    const Network& net = *problem.network;
    const ScenarioSet& sc = *problem.scenarios;
    if (!problem.concave()) throw NumericalError("planner objective is not concave");

    std::vector<std::size_t> live, dead;
    std::vector<double> weights;
    for (std::size_t k = 0; k < problem.index.scenarios().size(); ++k) {
        const std::size_t w = problem.index.scenarios()[k];
        if (problem.slot_weights[k] > 0.0) {
            live.push_back(w);
            weights.push_back(problem.slot_weights[k]);
        } else {
            dead.push_back(w);
        }
    }
    if (live.empty()) throw InputError("no scenario has positive probability");

    DispatchSolution sol = empty_solution(net, sc);
    sol.mask = problem.mask;
    if (dead.empty()) {
        QpResult r = run(problem, tol);
        extract(problem, r, sol, true);
        sol.iterations = r.iterations;
    } else {
        QpProblem main = build(net, sc, problem.mask, live, weights, nullptr, tol);
        QpResult r = run(main, tol);
        extract(main, r, sol, true);
        sol.iterations = r.iterations;
        const Fixed fixed{sol.y, sol.y_r, sol.x};
        for (std::size_t w : dead) {
            QpProblem one = build(net, sc, problem.mask, {w}, {sc.period_weight}, &fixed, tol);
            QpResult r1 = run(one, tol);
            extract(one, r1, sol, false);
            sol.iterations += r1.iterations;
        }
    }
    sol.objective = welfare_objective(net, sc, sol);
    sol.kkt_residual = verify_kkt(net, sc, sol).max_scaled();
    return sol;
}

DispatchSolution solve(const Network& network, const ScenarioSet& scenarios, const ExpansionMask& mask,
                       const ToleranceSet& tol) {
    return solve(assemble(network, scenarios, mask, tol), tol);
}

double welfare_objective(const Network& net, const ScenarioSet& sc, const DispatchSolution& s) {
    const Topology tp = topology(net, sc);
    double total = 0.0;
    for (std::size_t w = 0; w < sc.num_scenarios(); ++w) {
        double op = 0.0;
        for (std::size_t t = 0; t < sc.num_periods(); ++t) {
            for (std::size_t n = 0; n < net.nodes.size(); ++n) {
                const DemandCurve& dc = sc.demand(w, n, t);
                const double d = s.d(w, n, t);
                op += (0.5 * dc.slope * d + dc.intercept) * d;
            }
            for (std::size_t g = 0; g < net.generators.size(); ++g) {
                const Generator& gen = net.generators[g];
                const double q = s.q(w, g, t);
                op -= (gen.marg_cost[tp.season_of[t]] + 0.5 * gen.cost_slope * q) * q;
            }
        }
        total += sc.probabilities[w] * sc.period_weight * op;
    }
    for (std::size_t g = 0; g < net.generators.size(); ++g) total -= net.generators[g].inv_cost * s.y[g];
    for (std::size_t r = 0; r < net.renewables.size(); ++r) total -= net.renewables[r].inv_cost * s.y_r[r];
    for (std::size_t l = 0; l < net.lines.size(); ++l) total -= net.lines[l].inv_cost * s.x[l];
    return total;
}

KktReport verify_kkt(const Network& net, const ScenarioSet& sc, const DispatchSolution& s) {
    const std::size_t W = sc.num_scenarios(), N = net.nodes.size(), G = net.generators.size(),
                      L = net.lines.size(), R = net.renewables.size(), T = sc.num_periods(),
                      S = sc.seasons.size();
    auto shape = [](const Grid3<double>& g, std::size_t a, std::size_t b, std::size_t c) {
        return g.extent(0) == a && g.extent(1) == b && g.extent(2) == c;
    };
    if (!shape(s.d, W, N, T) || !shape(s.q, W, G, T) || !shape(s.f, W, L, T) || !shape(s.price, W, N, T) ||
        !shape(s.capacity_dual, W, G, T) || !shape(s.energy_dual, W, G, S) || !shape(s.flow_upper_dual, W, L, T) ||
        !shape(s.flow_lower_dual, W, L, T) || s.y.size() != G || s.y_r.size() != R || s.x.size() != L ||
        s.mask.lines.size() != L || s.mask.generators.size() != G || s.mask.renewables.size() != R)
        throw DimensionError("solution dimensions do not match the instance");

    const Topology tp = topology(net, sc);
    KktReport rep;
    auto bump = [](double& slot, double v) { slot = std::max(slot, v); };

    // Scales.
    double ps = 1.0, qs = 1.0;
    for (double v : s.price.data()) ps = std::max(ps, std::abs(v));
    for (const auto& dc : sc.demand.data()) ps = std::max(ps, std::abs(dc.intercept));
    for (const auto& g : net.generators)
        for (double c : g.marg_cost) ps = std::max(ps, std::abs(c));
    for (const auto* grid : {&s.d, &s.q, &s.f})
        for (double v : grid->data()) qs = std::max(qs, std::abs(v));
    for (const auto* vec : {&s.y, &s.y_r, &s.x})
        for (double v : *vec) qs = std::max(qs, std::abs(v));
    for (const auto& g : net.generators)
        if (std::isfinite(g.g_max)) qs = std::max(qs, g.g_max);
    for (const auto& l : net.lines)
        if (std::isfinite(l.f_max)) qs = std::max(qs, l.f_max);
    rep.price_scale = ps;
    rep.quantity_scale = qs;

    // Investment gradients are accumulated per modelled hour so they share units with prices.
    const double hours = sc.period_weight * static_cast<double>(T);
    std::vector<double> gy(G, 0.0), gyr(R, 0.0), gx(L, 0.0);

    for (std::size_t w = 0; w < W; ++w) {
        const double pw = sc.probabilities[w] * sc.period_weight;
        for (std::size_t t = 0; t < T; ++t) {
            const std::size_t season = tp.season_of[t];
            // Consumers.
            for (std::size_t n = 0; n < N; ++n) {
                const DemandCurve& dc = sc.demand(w, n, t);
                const double d = s.d(w, n, t);
                bump(rep.consumer.stationarity, natural(d, dc.slope * d + dc.intercept - s.price(w, n, t)));
                bump(rep.consumer.primal, std::max(0.0, -d));
            }
            // Generators.
            for (std::size_t g = 0; g < G; ++g) {
                const Generator& gen = net.generators[g];
                const double q = s.q(w, g, t), mu = s.capacity_dual(w, g, t);
                const double nu = S ? s.energy_dual(w, g, season) : 0.0;
                const double grad =
                    s.price(w, tp.gen_node[g], t) - gen.marg_cost[season] - gen.cost_slope * q - mu - nu;
                bump(rep.generator.stationarity, natural(q, grad));
                const double cap = gen.g_max + s.y[g];
                bump(rep.generator.complementarity, comp(cap - q, mu));
                bump(rep.generator.primal, std::max({0.0, -q, q - cap}));
                gy[g] += pw * mu;
            }
            // TSO.
            for (std::size_t l = 0; l < L; ++l) {
                const double f = s.f(w, l, t), up = s.flow_upper_dual(w, l, t), dn = s.flow_lower_dual(w, l, t);
                const double grad = s.price(w, tp.to[l], t) - s.price(w, tp.from[l], t) - up + dn;
                bump(rep.tso.stationarity, std::abs(grad));
                const double cap = net.lines[l].f_max + s.x[l];
                bump(rep.tso.complementarity, comp(cap - f, up));
                bump(rep.tso.complementarity, comp(cap + f, dn));
                bump(rep.tso.primal, std::max(0.0, std::abs(f) - cap));
                gx[l] += pw * (up + dn);
            }
            // Renewables and market clearing.
            for (std::size_t n = 0; n < N; ++n) {
                double balance = s.d(w, n, t);
                for (std::size_t l = 0; l < L; ++l) {
                    if (tp.from[l] == n) balance += s.f(w, l, t);
                    if (tp.to[l] == n) balance -= s.f(w, l, t);
                }
                for (std::size_t g = 0; g < G; ++g)
                    if (tp.gen_node[g] == n) balance -= s.q(w, g, t);
                for (std::size_t r = 0; r < R; ++r) {
                    if (tp.ren_node[r] != n) continue;
                    const double factor = net.renewables[r].profile(static_cast<Eigen::Index>(w),
                                                                    static_cast<Eigen::Index>(t));
                    balance -= (net.renewables[r].g_r + s.y_r[r]) * factor;
                    gyr[r] += pw * s.price(w, n, t) * factor;
                }
                bump(rep.market_clearing.primal, std::abs(balance));
                if (!std::isfinite(s.price(w, n, t))) rep.market_clearing.stationarity = kUnbounded;
            }
        }
        // Seasonal energy limits.
        for (std::size_t g = 0; g < G; ++g) {
            for (std::size_t season = 0; season < S; ++season) {
                double used = 0.0;
                for (auto t : sc.seasons[season]) used += s.q(w, g, t);
                const double qmax = energy_limit(net.generators[g], w, season);
                const double nu = s.energy_dual(w, g, season);
                bump(rep.generator.complementarity, comp(qmax - used, nu));
                if (std::isfinite(qmax)) bump(rep.generator.primal, std::max(0.0, used - qmax));
            }
        }
    }

    // Investment conditions; denied columns must be zero.
    auto invest = [&](ActorResiduals& a, double v, bool allowed, double grad) {
        if (allowed) bump(a.stationarity, natural(v, grad / hours));
        else bump(a.primal, std::abs(v));
        bump(a.primal, std::max(0.0, -v));
    };
    for (std::size_t g = 0; g < G; ++g)
        invest(rep.generator, s.y[g], net.generators[g].expandable && s.mask.generators[g],
               gy[g] - net.generators[g].inv_cost);
    for (std::size_t r = 0; r < R; ++r)
        invest(rep.renewable, s.y_r[r], net.renewables[r].expandable && s.mask.renewables[r],
               gyr[r] - net.renewables[r].inv_cost);
    for (std::size_t l = 0; l < L; ++l)
        invest(rep.tso, s.x[l], net.lines[l].expandable && s.mask.lines[l], gx[l] - net.lines[l].inv_cost);
    return rep;
}

CongestionRent congestion_rent(const Network& network, const DispatchSolution& solution, const Id& line) {
    auto l = network.line_index(line);
    if (!l) throw InputError("unknown line '" + line + "'");
    const std::size_t from = *network.node_index(network.lines[*l].from_node);
    const std::size_t to = *network.node_index(network.lines[*l].to_node);
    CongestionRent cr;
    for (std::size_t w = 0; w < solution.num_scenarios(); ++w) {
        double sum = 0.0;
        for (std::size_t t = 0; t < solution.num_periods(); ++t)
            sum += (solution.price(w, to, t) - solution.price(w, from, t)) * solution.f(w, *l, t);
        cr.per_scenario.push_back(solution.period_weight * sum);
        cr.expected += solution.probabilities[w] * cr.per_scenario.back();
    }
    return cr;
}

void write_solution_csv(std::ostream& out, const Network& net, const DispatchSolution& s) {
    csv::Writer wr(out);
    wr.header({"var_name", "scenario", "period", "value"});
    auto grid = [&](const char* prefix, const Grid3<double>& g, auto id_of) {
        for (std::size_t w = 0; w < g.extent(0); ++w)
            for (std::size_t i = 0; i < g.extent(1); ++i)
                for (std::size_t t = 0; t < g.extent(2); ++t) {
                    wr.field(std::string(prefix) + ":" + id_of(i)).field(w).field(t).field(g(w, i, t));
                    wr.end_row();
                }
    };
    grid("d", s.d, [&](std::size_t i) { return net.nodes[i].id; });
    grid("q", s.q, [&](std::size_t i) { return net.generators[i].id; });
    grid("f", s.f, [&](std::size_t i) { return net.lines[i].id; });
    auto vec = [&](const char* prefix, const std::vector<double>& v, auto id_of) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            wr.field(std::string(prefix) + ":" + id_of(i)).empty_field().empty_field().field(v[i]);
            wr.end_row();
        }
    };
    vec("y", s.y, [&](std::size_t i) { return net.generators[i].id; });
    vec("y_r", s.y_r, [&](std::size_t i) { return net.renewables[i].id; });
    vec("x", s.x, [&](std::size_t i) { return net.lines[i].id; });
}

void write_prices_csv(std::ostream& out, const Network& net, const DispatchSolution& s) {
    csv::Writer wr(out);
    wr.header({"scenario", "node", "period", "price_eur_mwh"});
    for (std::size_t w = 0; w < s.price.extent(0); ++w)
        for (std::size_t n = 0; n < s.price.extent(1); ++n)
            for (std::size_t t = 0; t < s.price.extent(2); ++t) {
                wr.field(w).field(net.nodes[n].id).field(t).field(s.price(w, n, t));
                wr.end_row();
            }
}

DispatchSolution read_solution_csv(const std::filesystem::path& path, const Network& net, const ScenarioSet& sc) {
    const csv::Table tab = csv::Table::read(path);
    const std::size_t cn = tab.column("var_name"), cw = tab.column("scenario"), ct = tab.column("period"),
                      cv = tab.column("value");
    DispatchSolution s = empty_solution(net, sc);
    s.mask = ExpansionMask::allow_all(net);
    for (std::size_t row = 0; row < tab.size(); ++row) {
        const std::string& name = tab.cell(row, cn);
        const auto colon = name.find(':');
        if (colon == std::string::npos) tab.fail(row, cn, "malformed variable name '" + name + "'");
        const std::string kind = name.substr(0, colon), id = name.substr(colon + 1);
        const double v = tab.number(row, cv);
        auto need = [&](std::optional<std::size_t> i) {
            if (!i) tab.fail(row, cn, "unknown id '" + id + "'");
            return *i;
        };
        auto at = [&](Grid3<double>& g, std::size_t i) {
            const long long w = tab.integer(row, cw), t = tab.integer(row, ct);
            if (w < 0 || static_cast<std::size_t>(w) >= g.extent(0) || t < 0 ||
                static_cast<std::size_t>(t) >= g.extent(2))
                tab.fail(row, cw, "scenario/period out of range");
            g(static_cast<std::size_t>(w), i, static_cast<std::size_t>(t)) = v;
        };
        if (kind == "d") at(s.d, need(net.node_index(id)));
        else if (kind == "q") at(s.q, need(net.generator_index(id)));
        else if (kind == "f") at(s.f, need(net.line_index(id)));
        else if (kind == "y") s.y[need(net.generator_index(id))] = v;
        else if (kind == "y_r") s.y_r[need(net.renewable_index(id))] = v;
        else if (kind == "x") s.x[need(net.line_index(id))] = v;
        else tab.fail(row, cn, "unknown variable kind '" + kind + "'");
    }
    return s;
}

Grid3<double> read_prices_csv(const std::filesystem::path& path, const Network& net, const ScenarioSet& sc) {
    const csv::Table tab = csv::Table::read(path);
    const std::size_t cw = tab.column("scenario"), cn = tab.column("node"), ct = tab.column("period"),
                      cp = tab.column("price_eur_mwh");
    Grid3<double> out(sc.num_scenarios(), net.nodes.size(), sc.num_periods());
    for (std::size_t row = 0; row < tab.size(); ++row) {
        auto n = net.node_index(tab.cell(row, cn));
        if (!n) tab.fail(row, cn, "unknown node '" + tab.cell(row, cn) + "'");
        const long long w = tab.integer(row, cw), t = tab.integer(row, ct);
        if (w < 0 || static_cast<std::size_t>(w) >= out.extent(0) || t < 0 ||
            static_cast<std::size_t>(t) >= out.extent(2))
            tab.fail(row, cw, "scenario/period out of range");
        out(static_cast<std::size_t>(w), *n, static_cast<std::size_t>(t)) = tab.number(row, cp);
    }
    return out;
}

}  // namespace tep
