#include <benchmark/benchmark.h>

#include <random>

#include "tep/equilibrium.hpp"
#include "tep/risk.hpp"

namespace {

// Chain of n nodes, alternating cheap supply and heavy demand, one candidate
// line per link. Demand shifts by scenario and period.
struct Instance {
    tep::Network net;
    tep::ScenarioSet sc;
};

Instance chain(std::size_t nodes, std::size_t scenarios, std::size_t periods) {
    Instance in;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.8, 1.2);
    for (std::size_t n = 0; n < nodes; ++n) {
        const std::string id = "N" + std::to_string(n);
        in.net.nodes.push_back({id, "C" + std::to_string(n % 3), {}, {}});
        tep::Generator g;
        g.id = "G" + std::to_string(n);
        g.node = id;
        g.g_max = n % 2 == 0 ? 400.0 : 120.0;
        g.marg_cost = {n % 2 == 0 ? 15.0 : 45.0};
        g.cost_slope = 0.05;
        g.inv_cost = 30.0;
        g.expandable = true;
        in.net.generators.push_back(g);
        if (n > 0) {
            tep::Line l;
            l.id = "L" + std::to_string(n);
            l.from_node = "N" + std::to_string(n - 1);
            l.to_node = id;
            l.f_max = 50.0;
            l.inv_cost = 5.0;
            l.expandable = true;
            in.net.lines.push_back(l);
        }
    }
    in.net.link_units();
    in.sc.probabilities.assign(scenarios, 1.0 / static_cast<double>(scenarios));
    in.sc.season_labels = {"all"};
    in.sc.seasons.resize(1);
    for (std::size_t t = 0; t < periods; ++t) in.sc.seasons[0].push_back(t);
    in.sc.demand = tep::Grid3<tep::DemandCurve>(scenarios, nodes, periods);
    for (std::size_t w = 0; w < scenarios; ++w)
        for (std::size_t n = 0; n < nodes; ++n)
            for (std::size_t t = 0; t < periods; ++t)
                in.sc.demand(w, n, t) = {-0.5, 150.0 * u(rng)};
    return in;
}

void BM_Solve(benchmark::State& state) {
    const auto in = chain(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)),
                          static_cast<std::size_t>(state.range(2)));
    const auto mask = tep::ExpansionMask::allow_all(in.net);
    for (auto _ : state) benchmark::DoNotOptimize(tep::solve(in.net, in.sc, mask).objective);
    state.counters["columns"] = static_cast<double>(tep::assemble(in.net, in.sc, mask).index.num_variables());
}
BENCHMARK(BM_Solve)->Args({3, 1, 1})->Args({5, 4, 6})->Args({10, 10, 24})->Args({10, 30, 96})->Unit(benchmark::kMillisecond);

void BM_VerifyKkt(benchmark::State& state) {
    const auto in = chain(10, 30, static_cast<std::size_t>(state.range(0)));
    const auto s = tep::solve(in.net, in.sc, tep::ExpansionMask::allow_all(in.net));
    for (auto _ : state) benchmark::DoNotOptimize(tep::verify_kkt(in.net, in.sc, s).max_scaled());
}
BENCHMARK(BM_VerifyKkt)->Arg(24)->Arg(96)->Unit(benchmark::kMillisecond);

void BM_Cvar(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z(0.0, 50.0);
    std::vector<double> l(n), p(n, 1.0 / static_cast<double>(n));
    for (auto& x : l) x = std::max(0.0, z(rng));
    for (auto _ : state) benchmark::DoNotOptimize(tep::cvar(l, p, 0.8));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Cvar)->RangeMultiplier(8)->Range(8, 1 << 15)->Complexity();

}  // namespace

BENCHMARK_MAIN();
