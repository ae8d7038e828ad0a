#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>

#include "tep/analytic.hpp"
#include "tep/compensation.hpp"
#include "tep/csv.hpp"
#include "tep/errors.hpp"

#ifndef TEP_VERSION
#define TEP_VERSION "unknown"
#endif

namespace tep::cli {

namespace fs = std::filesystem;

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(' ');
        const auto e = item.find_last_not_of(' ');
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

bool flag(const Config& cfg, const std::string& key, bool fallback) {
    const long long v = cfg.integer(key, fallback ? 1 : 0);
    if (v != 0 && v != 1) throw InputError("'" + key + "' must be 0 or 1");
    return v == 1;
}

// Writes a file through a string buffer so a failure leaves no partial file.
void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    f << content;
    if (!f) throw InputError("failed writing '" + path.string() + "'");
}

template <class Fn>
std::string render(Fn&& fn) {
    std::ostringstream ss;
    fn(ss);
    return ss.str();
}

std::string eigen_version() {
    return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
           std::to_string(EIGEN_MINOR_VERSION);
}

std::string manifest(const RunConfig& rc, const std::string& command,
                     const std::vector<std::pair<std::string, std::string>>& files) {
    std::ostringstream m;
    m << "tool=tepcli\n";
    m << "version=" << TEP_VERSION << "\n";
    m << "eigen=" << eigen_version() << "\n";
    m << "command=" << command << "\n";
    m << "config_hash=" << fnv1a_hex(rc.config_path.empty() ? std::string() : slurp(rc.config_path)) << "\n";
    for (const auto& [k, v] : rc.config.values()) m << "config." << k << "=" << v << "\n";
    m << "seed=" << rc.config.get_or("seed", "1") << "\n";
    m << "feasibility_tol=" << csv::format_number(rc.tolerances.feasibility) << "\n";
    m << "kkt_tol=" << csv::format_number(rc.tolerances.kkt) << "\n";
    m << "max_iterations=" << rc.tolerances.max_iterations << "\n";
    m << "solver_seed=" << rc.tolerances.solver_seed << "\n";
    for (const auto& [name, content] : files) m << "output." << name << "=" << fnv1a_hex(content) << "\n";
    return m.str();
}

void write_outputs(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
    for (const auto& [name, content] : files) {
        const fs::path p = dir / name;
        fs::create_directories(p.parent_path());
        write_file(p, content);
    }
}

}  // namespace

RunConfig load_run_config(const fs::path& path, const Overrides& ov) {
    RunConfig rc;
    rc.config_path = path;
    rc.config = Config::read(path);
    Config& cfg = rc.config;
    if (ov.line) cfg.set("candidate_line", *ov.line);
    if (ov.seed) cfg.set("seed", std::to_string(*ov.seed));
    if (ov.alpha) cfg.set("alpha", csv::format_number(*ov.alpha));
    if (ov.mechanisms) cfg.set("mechanisms", *ov.mechanisms);

    rc.data_dir = cfg.path("data_dir", path.parent_path());
    rc.out_dir = ov.out ? *ov.out : cfg.path("out", fs::path("out"));
    rc.candidate_line = cfg.get_or("candidate_line", "");
    rc.expand_candidate = flag(cfg, "expand_candidate", true);
    rc.expand_generators = flag(cfg, "expand_generators", true);
    rc.expand_renewables = flag(cfg, "expand_renewables", true);
    rc.allocation.default_from_share = cfg.number("allocation_from_share", 0.5);
    if (!(rc.allocation.default_from_share >= 0.0 && rc.allocation.default_from_share <= 1.0))
        throw DomainError("allocation_from_share must lie in [0, 1]");
    // allocation.<line_id> = from-country share for that line
    for (const auto& [key, value] : cfg.values()) {
        if (key.rfind("allocation.", 0) != 0) continue;
        const double share = cfg.number(key, 0.5);
        if (!(share >= 0.0 && share <= 1.0)) throw DomainError("'" + key + "' must lie in [0, 1]");
        rc.allocation.from_share[key.substr(11)] = share;
    }
    rc.shares = cfg.get_or("shares", "");
    rc.mechanisms = split_list(cfg.get_or("mechanisms", "none,lump,flow,value,ideal"));
    rc.alpha = cfg.number("alpha", 0.8);
    const std::string basis = cfg.get_or("cvar_basis", "loss");
    if (basis == "loss") rc.cvar_basis = CvarBasis::Loss;
    else if (basis == "negated_welfare") rc.cvar_basis = CvarBasis::NegatedWelfare;
    else throw InputError("cvar_basis must be 'loss' or 'negated_welfare'");
    rc.tolerances.feasibility = cfg.number("feasibility_tol", rc.tolerances.feasibility);
    rc.tolerances.kkt = cfg.number("kkt_tol", rc.tolerances.kkt);
    rc.tolerances.max_iterations = static_cast<int>(cfg.integer("max_iterations", rc.tolerances.max_iterations));
    rc.tolerances.solver_seed = static_cast<std::uint64_t>(cfg.integer("solver_seed", 0));
    return rc;
}

int cmd_validate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    try {
        const Instance inst = load_network(rc.data_dir, rc.config);
        out << "ok: " << inst.network.nodes.size() << " nodes, " << inst.network.lines.size() << " lines, "
            << inst.network.generators.size() << " generators, " << inst.network.renewables.size() << " renewables, "
            << inst.scenarios.num_scenarios() << " scenarios, " << inst.scenarios.num_periods() << " periods\n";
        if (!rc.candidate_line.empty()) {
            auto l = inst.network.line_index(rc.candidate_line);
            if (!l) throw InputError("candidate line '" + rc.candidate_line + "' does not exist");
            if (!inst.network.lines[*l].expandable)
                throw InputError("candidate line '" + rc.candidate_line + "' is not expandable");
        }
        return kOk;
    } catch (const ValidationError& e) {
        for (const auto& v : e.violations()) err << "violation: " << v << "\n";
        return kInputError;
    }
}

int cmd_compare(const RunConfig& rc, std::ostream& out, std::ostream& /*err*/) {
    const Instance inst = load_network(rc.data_dir, rc.config);
    const Network& net = inst.network;
    const ScenarioSet& sc = inst.scenarios;
    if (rc.candidate_line.empty()) throw InputError("no candidate line given (candidate_line or --line)");
    auto cand = net.line_index(rc.candidate_line);
    if (!cand) throw InputError("candidate line '" + rc.candidate_line + "' does not exist");
    if (!net.lines[*cand].expandable) throw InputError("candidate line '" + rc.candidate_line + "' is not expandable");

    // Only the candidate line may be built; other units follow their flags.
    ExpansionMask without = ExpansionMask::deny_all(net);
    for (std::size_t g = 0; g < net.generators.size(); ++g) without.generators[g] = rc.expand_generators;
    for (std::size_t r = 0; r < net.renewables.size(); ++r) without.renewables[r] = rc.expand_renewables;
    ExpansionMask with = without;
    with.lines[*cand] = rc.expand_candidate;

    auto job = [&](const ExpansionMask& m) { return solve(net, sc, m, rc.tolerances); };
    auto f_with = std::async(std::launch::async, job, std::cref(with));
    auto f_without = std::async(std::launch::async, job, std::cref(without));
    const DispatchSolution s_without = f_without.get();
    const DispatchSolution s_with = f_with.get();

    const WelfareAccount a_with = account(s_with, net, sc, rc.allocation, rc.tolerances.kkt);
    const WelfareAccount a_without = account(s_without, net, sc, rc.allocation, rc.tolerances.kkt);
    const DeltaWelfare d = delta(a_with, a_without);
    const LineObservables obs = line_observables(net, s_with, rc.candidate_line);

    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& [name, sol, acc] : {std::tuple{"with", &s_with, &a_with}, std::tuple{"without", &s_without, &a_without}}) {
        const std::string dir = name;
        files.emplace_back(dir + "/solution.csv", render([&](auto& s) { write_solution_csv(s, net, *sol); }));
        files.emplace_back(dir + "/prices.csv", render([&](auto& s) { write_prices_csv(s, net, *sol); }));
        files.emplace_back(dir + "/welfare.csv", render([&](auto& s) { write_welfare_csv(s, *acc); }));
    }
    files.emplace_back("delta.csv", render([&](auto& s) { write_delta_csv(s, d); }));
    files.emplace_back("scenarios.csv", render([&](auto& s) { write_scenarios_csv(s, sc.probabilities); }));
    files.emplace_back("line_observables.csv", render([&](auto& s) { write_line_observables_csv(s, obs); }));
    fs::create_directories(rc.out_dir);
    write_outputs(rc.out_dir, files);
    write_file(rc.out_dir / "manifest.txt", manifest(rc, "compare", files));

    out << std::setprecision(10);
    out << "candidate " << rc.candidate_line << ": x = " << s_with.x[*cand] << " MW\n";
    out << "objective with = " << s_with.objective << ", without = " << s_without.objective << "\n";
    out << "kkt residual with = " << s_with.kkt_residual << ", without = " << s_without.kkt_residual << "\n";
    for (std::size_t i = 0; i < d.countries.size(); ++i)
        out << "E[dTW] " << d.countries[i] << " = " << d.expected(i) << "\n";
    out << "wrote " << rc.out_dir.string() << "\n";
    return kOk;
}

int cmd_compensate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    if (rc.mechanisms.empty()) {
        err << "error: empty mechanism list\n"
            << "usage: tepcli compensate --config <path> --mechanisms none,lump,ppa:<country>,flow,value,ideal\n";
        return kInputError;
    }
    const fs::path in = rc.config.path("artifacts_dir", rc.out_dir);
    const std::vector<double> probs = read_scenarios_csv(in / "scenarios.csv");
    const DeltaWelfare d = read_delta_csv(in / "delta.csv", probs);
    std::optional<LineObservables> obs;
    if (fs::exists(in / "line_observables.csv")) obs = read_line_observables_csv(in / "line_observables.csv", probs);

    ShareRule rule;
    if (!rc.shares.empty()) {
        rule = ShareRule::parse(rc.shares);
    } else {
        if (!obs) throw InputError("no share rule given and no line observables to infer the participants");
        rule = ShareRule::equal({obs->from_country, obs->to_country});
    }
    const std::vector<double> t = targets(d, rule);

    std::vector<CompensationSchedule> schedules;
    for (const auto& mech : rc.mechanisms) {
        try {
            auto need_obs = [&]() -> const LineObservables& {
                if (!obs) throw InputError("line_observables.csv is required");
                return *obs;
            };
            if (mech == "none") {
                schedules.push_back(no_compensation(rule, probs));
            } else if (mech == "lump") {
                schedules.push_back(lump_sum(rule, t, probs));
            } else if (mech.rfind("ppa:", 0) == 0) {
                if (rule.countries.size() != 2)
                    throw InputError("PPAs are defined for two countries only; multilateral PPAs are not supported");
                const std::string base = mech.substr(4);
                auto it = std::find(rule.countries.begin(), rule.countries.end(), base);
                if (it == rule.countries.end()) throw InputError("PPA base '" + base + "' is not a participant");
                schedules.push_back(ppa(d, need_obs(), base, t[static_cast<std::size_t>(it - rule.countries.begin())]));
            } else if (mech == "flow") {
                schedules.push_back(flow_mech(rule, t, need_obs()));
            } else if (mech == "value") {
                schedules.push_back(value_mech(rule, t, need_obs()));
            } else if (mech == "ideal") {
                schedules.push_back(ideal_mech(d, rule));
            } else {
                throw InputError("unknown mechanism '" + mech + "'");
            }
        } catch (const Error& e) {
            err << "warning: mechanism '" << mech << "' skipped: " << e.what() << "\n";
        }
    }
    if (schedules.empty()) {
        err << "error: no mechanism could be calibrated\n";
        return kNumericalError;
    }

    const auto risk = summary(d, schedules, rc.alpha, rc.cvar_basis);
    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("compensation.csv", render([&](auto& s) { write_compensation_csv(s, schedules); }));
    files.emplace_back("parameters.csv", render([&](auto& s) { write_parameters_csv(s, schedules); }));
    files.emplace_back("risk_table.csv", render([&](auto& s) { write_risk_csv(s, risk); }));
    if (obs)
        files.emplace_back("correlations.csv",
                           render([&](auto& s) { write_correlations_csv(s, correlation_tables(d, *obs, rule.countries)); }));
    files.emplace_back("quantiles.csv", render([&](auto& s) { write_quantiles_csv(s, quantiles(d, schedules)); }));
    fs::create_directories(rc.out_dir);
    write_outputs(rc.out_dir, files);
    write_file(rc.out_dir / "manifest_compensate.txt", manifest(rc, "compensate", files));

    out << std::setprecision(10);
    for (std::size_t i = 0; i < rule.countries.size(); ++i) out << "target " << rule.countries[i] << " = " << t[i] << "\n";
    for (const auto& s : schedules)
        for (const auto& [name, value] : s.parameters) out << s.mechanism << " " << name << " = " << value << "\n";
    out << "wrote " << rc.out_dir.string() << "\n";
    return kOk;
}

int cmd_report(const fs::path& dir, std::ostream& out, std::ostream& /*err*/) {
    bool any = false;
    for (const char* name : {"delta.csv", "risk_table.csv", "parameters.csv", "correlations.csv"}) {
        const fs::path p = dir / name;
        if (!fs::exists(p)) continue;
        any = true;
        const auto tab = csv::Table::read(p);
        std::vector<std::size_t> width(tab.header().size());
        for (std::size_t c = 0; c < width.size(); ++c) width[c] = tab.header()[c].size();
        for (std::size_t r = 0; r < tab.size(); ++r)
            for (std::size_t c = 0; c < width.size(); ++c) width[c] = std::max(width[c], tab.cell(r, c).size());
        out << "== " << name << "\n";
        auto line = [&](auto cell) {
            for (std::size_t c = 0; c < width.size(); ++c)
                out << std::left << std::setw(static_cast<int>(width[c]) + 2) << cell(c);
            out << "\n";
        };
        line([&](std::size_t c) { return tab.header()[c]; });
        for (std::size_t r = 0; r < tab.size(); ++r) line([&](std::size_t c) { return tab.cell(r, c); });
    }
    if (!any) throw InputError("no artifacts found in '" + dir.string() + "'");
    return kOk;
}

namespace {

analytic::LinearCurve curve(const std::vector<double>& v) { return {v.at(0), v.at(1)}; }

void print(std::ostream& out, const char* key, double v) { out << key << "=" << csv::format_number(v) << "\n"; }

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stochastic transmission-expansion equilibrium engine"};
    app.require_subcommand(1);
    app.set_version_flag("--version", TEP_VERSION);

    std::string config;
    Overrides ov;
    std::string line, mechanisms, out_dir;
    std::uint64_t seed = 0;
    double alpha = 0.8;
    auto add_common = [&](CLI::App* sub, bool with_config_required) {
        auto* c = sub->add_option("--config", config, "key=value run configuration");
        if (with_config_required) c->required();
        sub->add_option("--line", line, "candidate line id");
        sub->add_option("--seed", seed, "scenario sampling seed");
        sub->add_option("--alpha", alpha, "CVaR level");
        sub->add_option("--mechanisms", mechanisms, "comma-separated mechanism list");
        sub->add_option("--out", out_dir, "output directory");
    };

    auto* validate = app.add_subcommand("validate", "check an instance");
    add_common(validate, true);
    auto* compare = app.add_subcommand("compare", "solve with and without the candidate line");
    add_common(compare, true);
    auto* compensate = app.add_subcommand("compensate", "calibrate compensation mechanisms");
    add_common(compensate, true);
    auto* report = app.add_subcommand("report", "print the tables of an output directory");
    add_common(report, false);

    auto* an = app.add_subcommand("analytic", "closed-form two- and three-node examples");
    an->require_subcommand(1);
    auto* two = an->add_subcommand("two-node", "two nodes joined by one line");
    std::vector<double> d1{10, -1}, s1{2, 2}, d2{10, -2}, s2{1, 1};
    std::optional<double> cap, cost;
    two->add_option("--d1", d1, "demand at node 1: intercept,slope")->delimiter(',')->expected(2);
    two->add_option("--s1", s1, "supply at node 1: intercept,slope")->delimiter(',')->expected(2);
    two->add_option("--d2", d2, "demand at node 2: intercept,slope")->delimiter(',')->expected(2);
    two->add_option("--s2", s2, "supply at node 2: intercept,slope")->delimiter(',')->expected(2);
    auto* cap_opt = two->add_option("--capacity", cap, "line capacity (MW)");
    two->add_option("--cost", cost, "marginal line cost (EUR/MW)")->excludes(cap_opt);
    auto* three = an->add_subcommand("three-node", "supply node feeding two demand nodes");
    std::vector<double> t1{0, 1}, t2{6, -1}, t3{6, -1};
    three->add_option("--s1", t1, "supply at node 1: intercept,slope")->delimiter(',')->expected(2);
    three->add_option("--d2", t2, "demand at node 2: intercept,slope")->delimiter(',')->expected(2);
    three->add_option("--d3", t3, "demand at node 3: intercept,slope")->delimiter(',')->expected(2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? kOk : kInputError;
    }

    auto overrides = [&](CLI::App* sub) {
        if (sub->count("--line")) ov.line = line;
        if (sub->count("--seed")) ov.seed = seed;
        if (sub->count("--alpha")) ov.alpha = alpha;
        if (sub->count("--mechanisms")) ov.mechanisms = mechanisms;
        if (sub->count("--out")) ov.out = out_dir;
    };

    try {
        if (*two) {
            std::variant<analytic::Capacity, analytic::MarginalCost> spec = analytic::MarginalCost{0.0};
            if (cap) spec = analytic::Capacity{*cap};
            if (cost) spec = analytic::MarginalCost{*cost};
            const auto s = analytic::solve_two_node(curve(d1), curve(s1), curve(d2), curve(s2), spec);
            print(out, "autarky_price1", s.autarky_price1);
            print(out, "autarky_price2", s.autarky_price2);
            print(out, "common_price", s.common_price);
            print(out, "free_flow", s.free_flow);
            print(out, "capacity", s.capacity);
            print(out, "price1", s.price1);
            print(out, "price2", s.price2);
            print(out, "flow", s.flow);
            print(out, "congestion_rent", s.congestion_rent);
            print(out, "gain1", s.gain1);
            print(out, "gain2", s.gain2);
            if (!cap) {
                print(out, "marginal_cost", s.marginal_cost);
                print(out, "optimal_capacity", s.optimal_capacity);
            }
            return kOk;
        }
        if (*three) {
            const auto s = analytic::solve_three_node(curve(t1), curve(t2), curve(t3));
            for (const auto& [label, sit] : {std::pair{"old", &s.before}, std::pair{"new", &s.after}}) {
                out << label << ".price=" << csv::format_number(sit->price) << "\n";
                for (int i = 0; i < 3; ++i) {
                    out << label << ".node" << i + 1 << ".cs=" << csv::format_number(sit->cs[i]) << "\n";
                    out << label << ".node" << i + 1 << ".ps=" << csv::format_number(sit->ps[i]) << "\n";
                    out << label << ".node" << i + 1 << ".tw=" << csv::format_number(sit->tw[i]) << "\n";
                }
                out << label << ".system=" << csv::format_number(sit->system) << "\n";
            }
            for (int i = 0; i < 3; ++i) out << "delta.node" << i + 1 << "=" << csv::format_number(s.delta_tw[i]) << "\n";
            return kOk;
        }
        if (*report) {
            overrides(report);
            fs::path dir = ov.out ? *ov.out : fs::path("out");
            if (!config.empty()) dir = load_run_config(config, ov).out_dir;
            return cmd_report(dir, out, err);
        }
        for (auto* sub : {validate, compare, compensate}) {
            if (!*sub) continue;
            overrides(sub);
            const RunConfig rc = load_run_config(config, ov);
            if (sub == validate) return cmd_validate(rc, out, err);
            if (sub == compare) return cmd_compare(rc, out, err);
            return cmd_compensate(rc, out, err);
        }
    } catch (const NonconvergenceError& e) {
        err << "error: " << e.what() << "\n"
            << "  iterations " << e.iterations() << ", primal residual " << e.primal_residual() << ", dual residual "
            << e.dual_residual() << ", complementarity " << e.complementarity() << "\n";
        return kNumericalError;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        for (const auto& v : e.violations()) err << "  " << v << "\n";
        return kInputError;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << "\n";
        return kNumericalError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumericalError;
    }
    return kInputError;
}

}  // namespace tep::cli
