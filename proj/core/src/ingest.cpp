#include "tep/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "tep/csv.hpp"
#include "tep/errors.hpp"

namespace tep {

using namespace std::chrono;

DemandCurve build_demand_curve(double price, double demand, double elasticity) {
    if (!(elasticity < 0.0)) throw DomainError("elasticity must be negative");
    if (!(demand > 0.0)) throw DegenerateInputError("demand must be positive to fit a demand curve");
    const double p = std::abs(price);
    if (!(p > 0.0)) throw DegenerateInputError("cannot fit a demand curve through a zero price");
    DemandCurve dc;
    dc.slope = p / (elasticity * demand);
    dc.intercept = (1.0 - 1.0 / elasticity) * p;
    return dc;
}

// ---------------------------------------------------------------------------
// Time series

namespace {

std::optional<sys_seconds> parse_timestamp(const std::string& s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, used = 0;
    char sep = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &used) != 6) return std::nullopt;
    if (sep != 'T' && sep != ' ') return std::nullopt;
    std::string_view rest(s.c_str() + used);
    if (!rest.empty() && rest[0] == ':') {
        int n = 0;
        if (std::sscanf(rest.data(), ":%2d%n", &sec, &n) != 1) return std::nullopt;
        rest.remove_prefix(static_cast<std::size_t>(n));
    }
    if (!(rest.empty() || rest == "Z" || rest == "+00:00")) return std::nullopt;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) return std::nullopt;
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

int year_of(sys_seconds t) { return static_cast<int>(year_month_day{floor<days>(t)}.year()); }

}  // namespace

TimeSeriesTable TimeSeriesTable::read(const std::filesystem::path& path, const Network* network) {
    const csv::Table tab = csv::Table::read(path);
    const std::size_t cts = tab.column("timestamp_iso8601"), cnode = tab.column("node_id"),
                      cp = tab.column("price_eur_mwh"), cd = tab.column("demand_mw");
    TimeSeriesTable out;
    std::vector<std::size_t> ren_cols;
    std::vector<std::optional<Id>> ren_node;
    for (std::size_t c = 0; c < tab.header().size(); ++c) {
        if (c == cts || c == cnode || c == cp || c == cd) continue;
        std::string name = tab.header()[c];
        if (auto pos = name.find(":factor"); pos != std::string::npos && pos + 7 == name.size()) name.resize(pos);
        out.renewables.push_back(name);
        ren_cols.push_back(c);
        std::optional<Id> node;
        if (network)
            if (auto r = network->renewable_index(name)) node = network->renewables[*r].node;
        ren_node.push_back(node);
    }

    // First pass: distinct hours and nodes, in file order.
    std::unordered_map<std::string, std::size_t> node_pos;
    std::vector<std::size_t> row_hour(tab.size());
    for (std::size_t row = 0; row < tab.size(); ++row) {
        auto ts = parse_timestamp(tab.cell(row, cts));
        if (!ts) tab.fail(row, cts, "malformed timestamp '" + tab.cell(row, cts) + "'");
        if (floor<std::chrono::hours>(*ts) != *ts) tab.fail(row, cts, "timestamp is not on a whole hour");
        if (out.hours.empty() || *ts != out.hours.back()) {
            if (!out.hours.empty() && *ts < out.hours.back())
                tab.fail(row, cts, "timestamps must be strictly increasing");
            out.hours.push_back(*ts);
        }
        row_hour[row] = out.hours.size() - 1;
        const std::string& node = tab.cell(row, cnode);
        if (node_pos.emplace(node, out.nodes.size()).second) out.nodes.push_back(node);
    }
    const auto H = static_cast<Eigen::Index>(out.hours.size());
    const auto N = static_cast<Eigen::Index>(out.nodes.size());
    out.price = Eigen::MatrixXd::Constant(H, N, std::nan(""));
    out.demand = Eigen::MatrixXd::Constant(H, N, std::nan(""));
    out.factors = Eigen::MatrixXd::Constant(H, static_cast<Eigen::Index>(ren_cols.size()), std::nan(""));
    for (std::size_t row = 0; row < tab.size(); ++row) {
        const auto h = static_cast<Eigen::Index>(row_hour[row]);
        const std::string& node = tab.cell(row, cnode);
        const auto n = static_cast<Eigen::Index>(node_pos[node]);
        if (!std::isnan(out.price(h, n))) tab.fail(row, cnode, "duplicate row for node '" + node + "'");
        out.price(h, n) = tab.number(row, cp);
        out.demand(h, n) = tab.number(row, cd);
        for (std::size_t j = 0; j < ren_cols.size(); ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            if (!std::isnan(out.factors(h, jj))) continue;
            if (ren_node[j] && *ren_node[j] != node) continue;
            out.factors(h, jj) = tab.number(row, ren_cols[j]);
        }
    }
    for (Eigen::Index h = 0; h < H; ++h)
        for (Eigen::Index n = 0; n < N; ++n)
            if (std::isnan(out.price(h, n)))
                throw ParseError(tab.name(), 0, 0,
                                 "node '" + out.nodes[static_cast<std::size_t>(n)] + "' has no row for hour " +
                                     std::to_string(h));
    if (out.factors.hasNaN()) throw ParseError(tab.name(), 0, 0, "renewable factor missing for some hour");
    return out;
}

Season season_of(sys_seconds hour) {
    const unsigned m = static_cast<unsigned>(year_month_day{floor<days>(hour)}.month());
    if (m == 12 || m <= 2) return Season::Winter;
    if (m <= 5) return Season::Spring;
    if (m <= 8) return Season::Summer;
    return Season::Autumn;
}

const std::vector<std::string>& season_labels() {
    static const std::vector<std::string> labels{"winter", "spring", "summer", "autumn"};
    return labels;
}

ScenarioSample sample_scenarios(const TimeSeriesTable& table, const SamplingConfig& cfg) {
    if (cfg.n_scenarios < 1) throw DomainError("n_scenarios must be at least 1");
    if (cfg.hours_per_season < 1) throw DomainError("hours_per_season must be at least 1");
    const std::size_t n_hours = table.num_hours(), H = cfg.hours_per_season, N = table.nodes.size();
    constexpr std::size_t kSeasons = 4;

    auto admissible = [&](std::size_t i) {
        const int y = year_of(table.hours[i]);
        return (!cfg.year_first || y >= *cfg.year_first) && (!cfg.year_last || y <= *cfg.year_last);
    };
    // run[i]: length of the consecutive, same-season, admissible stretch starting at hour i.
    std::vector<std::size_t> run(n_hours + 1, 0);
    for (std::size_t i = n_hours; i-- > 0;) {
        if (!admissible(i)) continue;
        const bool joins = i + 1 < n_hours && table.hours[i + 1] - table.hours[i] == hours{1} &&
                           season_of(table.hours[i + 1]) == season_of(table.hours[i]);
        run[i] = joins ? run[i + 1] + 1 : 1;
    }
    std::vector<std::vector<std::size_t>> candidates(kSeasons);
    for (std::size_t i = 0; i < n_hours; ++i)
        if (run[i] >= H) candidates[static_cast<std::size_t>(season_of(table.hours[i]))].push_back(i);
    for (std::size_t s = 0; s < kSeasons; ++s)
        if (candidates[s].empty())
            throw InputError("not enough data in season '" + season_labels()[s] + "': need " + std::to_string(H) +
                             " consecutive hours");

    ScenarioSample out;
    ScenarioSet& sc = out.scenarios;
    const std::size_t T = kSeasons * H, W = cfg.n_scenarios;
    sc.probabilities.assign(W, 1.0 / static_cast<double>(W));
    sc.season_labels = season_labels();
    sc.seasons.resize(kSeasons);
    for (std::size_t s = 0; s < kSeasons; ++s)
        for (std::size_t k = 0; k < H; ++k) sc.seasons[s].push_back(s * H + k);
    sc.demand = Grid3<DemandCurve>(W, N, T);
    sc.period_weight = cfg.period_weight.value_or(8760.0 / static_cast<double>(T));

    std::mt19937_64 rng(cfg.seed);
    out.block_starts.assign(W, std::vector<std::size_t>(kSeasons));
    for (std::size_t w = 0; w < W; ++w)
        for (std::size_t s = 0; s < kSeasons; ++s)
            out.block_starts[w][s] = candidates[s][rng() % candidates[s].size()];

    out.renewable_profiles.assign(table.renewables.size(),
                                  Eigen::MatrixXd(static_cast<Eigen::Index>(W), static_cast<Eigen::Index>(T)));
    for (std::size_t w = 0; w < W; ++w) {
        for (std::size_t s = 0; s < kSeasons; ++s) {
            for (std::size_t k = 0; k < H; ++k) {
                const auto row = static_cast<Eigen::Index>(out.block_starts[w][s] + k);
                const std::size_t t = s * H + k;
                for (std::size_t n = 0; n < N; ++n) {
                    const double d = table.demand(row, static_cast<Eigen::Index>(n));
                    if (!(d > 0.0))
                        throw DegenerateInputError("nonpositive demand at node '" + table.nodes[n] + "', hour " +
                                                   std::to_string(row));
                    const double p = std::max(std::abs(table.price(row, static_cast<Eigen::Index>(n))), cfg.min_abs_price);
                    sc.demand(w, n, t) = build_demand_curve(p, d, cfg.elasticity);
                }
                for (std::size_t j = 0; j < table.renewables.size(); ++j)
                    out.renewable_profiles[j](static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(t)) =
                        table.factors(row, static_cast<Eigen::Index>(j));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string(), path.parent_path());
}

Config Config::parse(const std::string& text, std::string name, std::filesystem::path base) {
    Config cfg;
    cfg.name_ = std::move(name);
    cfg.base_ = std::move(base);
    std::istringstream in(text);
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(cfg.name_, no, 0, "expected key=value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(cfg.name_, no, 1, "empty key");
        cfg.values_[key] = trim(line.substr(eq + 1));
        cfg.lines_[key] = no;
    }
    return cfg;
}

std::optional<std::string> Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double Config::number(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (v->empty() || ec != std::errc{} || ptr != v->data() + v->size()) {
        auto it = lines_.find(key);
        throw ParseError(name_, it == lines_.end() ? 0 : it->second, 0, "'" + key + "' must be a number");
    }
    return out;
}

long long Config::integer(const std::string& key, long long fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (v->empty() || ec != std::errc{} || ptr != v->data() + v->size()) {
        auto it = lines_.find(key);
        throw ParseError(name_, it == lines_.end() ? 0 : it->second, 0, "'" + key + "' must be an integer");
    }
    return out;
}

std::filesystem::path Config::path(const std::string& key, const std::filesystem::path& fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::filesystem::path p(*v);
    return p.is_relative() && !base_.empty() ? base_ / p : p;
}

SamplingConfig Config::sampling() const {
    SamplingConfig s;
    const long long n = integer("n_scenarios", static_cast<long long>(s.n_scenarios));
    const long long h = integer("hours_per_season", static_cast<long long>(s.hours_per_season));
    if (n < 1) throw DomainError("n_scenarios must be at least 1");
    if (h < 1) throw DomainError("hours_per_season must be at least 1");
    s.n_scenarios = static_cast<std::size_t>(n);
    s.hours_per_season = static_cast<std::size_t>(h);
    s.seed = static_cast<std::uint64_t>(integer("seed", static_cast<long long>(s.seed)));
    if (has("year_first")) s.year_first = static_cast<int>(integer("year_first", 0));
    if (has("year_last")) s.year_last = static_cast<int>(integer("year_last", 0));
    s.elasticity = number("elasticity", s.elasticity);
    s.min_abs_price = number("min_abs_price", s.min_abs_price);
    if (auto pw = get("period_weight"); pw && *pw != "annual") s.period_weight = number("period_weight", 1.0);
    return s;
}

// ---------------------------------------------------------------------------
// Instance directory

namespace {

struct Loader {
    const std::filesystem::path& dir;

    csv::Table table(const char* name) const { return csv::Table::read(dir / name); }
    bool exists(const char* name) const { return std::filesystem::exists(dir / name); }
};

std::size_t scenario_id(const csv::Table& tab, std::size_t row, std::size_t col, std::size_t n) {
    const long long w = tab.integer(row, col);
    if (w < 0 || static_cast<std::size_t>(w) >= n)
        tab.fail(row, col, "scenario " + std::to_string(w) + " out of range");
    return static_cast<std::size_t>(w);
}

ScenarioSet direct_scenarios(const Loader& ld, Network& net, const Config& cfg) {
    ScenarioSet sc;
    {
        auto tab = ld.table("scenarios.csv");
        const auto cw = tab.column("scenario"), cp = tab.column("probability");
        sc.probabilities.assign(tab.size(), std::nan(""));
        for (std::size_t r = 0; r < tab.size(); ++r)
            sc.probabilities[scenario_id(tab, r, cw, tab.size())] = tab.number(r, cp);
        for (double p : sc.probabilities)
            if (std::isnan(p)) throw ParseError(tab.name(), 0, 0, "scenario ids must be 0..n-1 without gaps");
    }
    std::size_t T = 0;
    {
        auto tab = ld.table("periods.csv");
        const auto ct = tab.column("period"), cs = tab.column("season");
        T = tab.size();
        std::vector<bool> seen(T, false);
        for (std::size_t r = 0; r < tab.size(); ++r) {
            const long long t = tab.integer(r, ct);
            if (t < 0 || static_cast<std::size_t>(t) >= T || seen[static_cast<std::size_t>(t)])
                tab.fail(r, ct, "periods must be 0..T-1, each listed once");
            seen[static_cast<std::size_t>(t)] = true;
            const std::string& label = tab.cell(r, cs);
            auto it = std::find(sc.season_labels.begin(), sc.season_labels.end(), label);
            if (it == sc.season_labels.end()) {
                sc.season_labels.push_back(label);
                sc.seasons.emplace_back();
                it = sc.season_labels.end() - 1;
            }
            sc.seasons[static_cast<std::size_t>(it - sc.season_labels.begin())].push_back(static_cast<std::size_t>(t));
        }
        for (auto& s : sc.seasons) std::sort(s.begin(), s.end());
    }
    const std::size_t W = sc.num_scenarios(), N = net.nodes.size();
    sc.demand = Grid3<DemandCurve>(W, N, T);
    {
        auto tab = ld.table("demand_curves.csv");
        const auto cw = tab.column("scenario"), cn = tab.column("node_id"), ct = tab.column("period"),
                   ca = tab.column("slope"), cb = tab.column("intercept");
        Grid3<char> seen(W, N, T, 0);
        for (std::size_t r = 0; r < tab.size(); ++r) {
            const std::size_t w = scenario_id(tab, r, cw, W);
            auto n = net.node_index(tab.cell(r, cn));
            if (!n) tab.fail(r, cn, "unknown node '" + tab.cell(r, cn) + "'");
            const long long t = tab.integer(r, ct);
            if (t < 0 || static_cast<std::size_t>(t) >= T) tab.fail(r, ct, "period out of range");
            const auto tt = static_cast<std::size_t>(t);
            sc.demand(w, *n, tt) = DemandCurve{tab.number(r, ca), tab.number(r, cb)};
            seen(w, *n, tt) = 1;
        }
        for (std::size_t w = 0; w < W; ++w)
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t t = 0; t < T; ++t)
                    if (!seen(w, n, t))
                        throw ParseError(tab.name(), 0, 0,
                                         "no demand curve for scenario " + std::to_string(w) + ", node '" +
                                             net.nodes[n].id + "', period " + std::to_string(t));
    }
    for (auto& r : net.renewables)
        r.profile = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(W), static_cast<Eigen::Index>(T), std::nan(""));
    if (ld.exists("renewable_profiles.csv")) {
        auto tab = ld.table("renewable_profiles.csv");
        const auto cr = tab.column("ren_id"), cw = tab.column("scenario"), ct = tab.column("period"),
                   cf = tab.column("factor");
        for (std::size_t r = 0; r < tab.size(); ++r) {
            auto i = net.renewable_index(tab.cell(r, cr));
            if (!i) tab.fail(r, cr, "unknown renewable '" + tab.cell(r, cr) + "'");
            const std::size_t w = scenario_id(tab, r, cw, W);
            const long long t = tab.integer(r, ct);
            if (t < 0 || static_cast<std::size_t>(t) >= T) tab.fail(r, ct, "period out of range");
            net.renewables[*i].profile(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(t)) = tab.number(r, cf);
        }
    }
    for (const auto& r : net.renewables)
        if (r.profile.hasNaN()) throw InputError("renewable '" + r.id + "' has missing profile entries");
    if (auto pw = cfg.get("period_weight"))
        sc.period_weight = *pw == "annual" ? 8760.0 / static_cast<double>(T) : cfg.number("period_weight", 1.0);
    return sc;
}

}  // namespace

Instance load_network(const std::filesystem::path& dir, const Config& cfg) {
    if (!std::filesystem::is_directory(dir)) throw InputError("instance directory '" + dir.string() + "' not found");
    const Loader ld{dir};
    Instance inst;
    Network& net = inst.network;

    {
        auto tab = ld.table("nodes.csv");
        const auto ci = tab.column("node_id"), cc = tab.column("country");
        for (std::size_t r = 0; r < tab.size(); ++r) net.nodes.push_back({tab.cell(r, ci), tab.cell(r, cc), {}, {}});
    }
    auto node_ref = [&](const csv::Table& tab, std::size_t r, std::size_t c) {
        const std::string& id = tab.cell(r, c);
        if (!net.node_index(id)) tab.fail(r, c, "unknown node '" + id + "'");
        return id;
    };
    {
        auto tab = ld.table("lines.csv");
        const auto ci = tab.column("line_id"), cf = tab.column("from"), ct = tab.column("to"),
                   cm = tab.column("f_max_mw"), cc = tab.column("inv_cost_eur_per_mw_yr"),
                   ce = tab.column("expandable");
        for (std::size_t r = 0; r < tab.size(); ++r)
            net.lines.push_back({tab.cell(r, ci), node_ref(tab, r, cf), node_ref(tab, r, ct), tab.number(r, cm),
                                 tab.number(r, cc), tab.flag(r, ce)});
    }
    {
        auto tab = ld.table("generators.csv");
        const auto ci = tab.column("gen_id"), cn = tab.column("node_id"), cm = tab.column("g_max_mw"),
                   cc = tab.column("inv_cost_eur_per_mw_yr"), ce = tab.column("expandable");
        const auto cs = tab.find_column("cost_slope");
        for (std::size_t r = 0; r < tab.size(); ++r) {
            Generator g;
            g.id = tab.cell(r, ci);
            g.node = node_ref(tab, r, cn);
            g.g_max = tab.number(r, cm);
            g.inv_cost = tab.number(r, cc);
            g.expandable = tab.flag(r, ce);
            if (cs) g.cost_slope = tab.number(r, *cs);
            net.generators.push_back(std::move(g));
        }
    }
    if (ld.exists("renewables.csv")) {
        auto tab = ld.table("renewables.csv");
        const auto ci = tab.column("ren_id"), cn = tab.column("node_id"), cg = tab.column("g_r_mw"),
                   cc = tab.column("inv_cost_eur_per_mw_yr"), ce = tab.column("expandable");
        for (std::size_t r = 0; r < tab.size(); ++r) {
            Renewable ren;
            ren.id = tab.cell(r, ci);
            ren.node = node_ref(tab, r, cn);
            ren.g_r = tab.number(r, cg);
            ren.inv_cost = tab.number(r, cc);
            ren.expandable = tab.flag(r, ce);
            net.renewables.push_back(std::move(ren));
        }
    }
    net.link_units();

    if (ld.exists("demand_curves.csv")) {
        inst.scenarios = direct_scenarios(ld, net, cfg);
    } else if (ld.exists("timeseries.csv")) {
        const TimeSeriesTable ts = TimeSeriesTable::read(dir / "timeseries.csv", &net);
        if (ts.nodes.size() != net.nodes.size())
            throw InputError("timeseries.csv covers " + std::to_string(ts.nodes.size()) + " nodes, network has " +
                             std::to_string(net.nodes.size()));
        // Reorder the table's node columns to network order.
        TimeSeriesTable aligned = ts;
        for (std::size_t n = 0; n < net.nodes.size(); ++n) {
            auto it = std::find(ts.nodes.begin(), ts.nodes.end(), net.nodes[n].id);
            if (it == ts.nodes.end()) throw InputError("timeseries.csv has no data for node '" + net.nodes[n].id + "'");
            const auto src = static_cast<Eigen::Index>(it - ts.nodes.begin());
            aligned.nodes[n] = net.nodes[n].id;
            aligned.price.col(static_cast<Eigen::Index>(n)) = ts.price.col(src);
            aligned.demand.col(static_cast<Eigen::Index>(n)) = ts.demand.col(src);
        }
        ScenarioSample sample = sample_scenarios(aligned, cfg.sampling());
        for (auto& r : net.renewables) {
            auto it = std::find(ts.renewables.begin(), ts.renewables.end(), r.id);
            if (it == ts.renewables.end()) throw InputError("timeseries.csv has no factors for renewable '" + r.id + "'");
            r.profile = sample.renewable_profiles[static_cast<std::size_t>(it - ts.renewables.begin())];
        }
        inst.scenarios = sample.scenarios;
        inst.sample = std::move(sample);
    } else {
        throw InputError("instance directory '" + dir.string() + "' has neither demand_curves.csv nor timeseries.csv");
    }
    const ScenarioSet& sc = inst.scenarios;

    {
        auto tab = ld.table("gen_costs.csv");
        const auto ci = tab.column("gen_id"), cs = tab.column("season"), cm = tab.column("marg_cost_eur_per_mwh");
        std::vector<std::vector<double>> costs(net.generators.size(),
                                               std::vector<double>(sc.seasons.size(), std::nan("")));
        for (std::size_t r = 0; r < tab.size(); ++r) {
            auto g = net.generator_index(tab.cell(r, ci));
            if (!g) tab.fail(r, ci, "unknown generator '" + tab.cell(r, ci) + "'");
            auto it = std::find(sc.season_labels.begin(), sc.season_labels.end(), tab.cell(r, cs));
            if (it == sc.season_labels.end()) tab.fail(r, cs, "unknown season '" + tab.cell(r, cs) + "'");
            costs[*g][static_cast<std::size_t>(it - sc.season_labels.begin())] = tab.number(r, cm);
        }
        for (std::size_t g = 0; g < net.generators.size(); ++g) {
            for (std::size_t s = 0; s < sc.seasons.size(); ++s)
                if (std::isnan(costs[g][s]))
                    throw ParseError(tab.name(), 0, 0,
                                     "generator '" + net.generators[g].id + "' has no marginal cost for season '" +
                                         sc.season_labels[s] + "'");
            net.generators[g].marg_cost = costs[g];
        }
    }
    if (ld.exists("gen_energy_limits.csv")) {
        auto tab = ld.table("gen_energy_limits.csv");
        const auto ci = tab.column("gen_id"), cw = tab.column("scenario"), cs = tab.column("season"),
                   cq = tab.column("q_max_mwh");
        const auto W = static_cast<Eigen::Index>(sc.num_scenarios());
        const auto S = static_cast<Eigen::Index>(sc.seasons.size());
        for (std::size_t r = 0; r < tab.size(); ++r) {
            auto g = net.generator_index(tab.cell(r, ci));
            if (!g) tab.fail(r, ci, "unknown generator '" + tab.cell(r, ci) + "'");
            auto it = std::find(sc.season_labels.begin(), sc.season_labels.end(), tab.cell(r, cs));
            if (it == sc.season_labels.end()) tab.fail(r, cs, "unknown season '" + tab.cell(r, cs) + "'");
            const auto s = static_cast<Eigen::Index>(it - sc.season_labels.begin());
            Eigen::MatrixXd& lim = net.generators[*g].q_max_seasonal;
            if (lim.size() == 0) lim = Eigen::MatrixXd::Constant(W, S, kUnbounded);
            const double q = tab.number(r, cq);
            if (tab.cell(r, cw) == "*") {
                lim.col(s).setConstant(q);
            } else if (inst.sample && tab.integer(r, cw) >= static_cast<long long>(W)) {
                // sampled runs may use fewer scenarios than the file provides
                continue;
            } else {
                lim(static_cast<Eigen::Index>(scenario_id(tab, r, cw, sc.num_scenarios())), s) = q;
            }
        }
    }
    require_valid(net, inst.scenarios);
    return inst;
}

}  // namespace tep
