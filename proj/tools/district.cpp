// Command-line front end: solve, simulate, export, sweep and validate-config.

#include "district/mps.hpp"
#include "district/report.hpp"

#include <CLI11.hpp>

#include <future>
#include <iostream>

using namespace district;
using report::json;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, failure = 1, parse_error = 2, infeasible = 3, solver_limit = 4 };

int exit_for(opt::Status s) {
    switch (s) {
    case opt::Status::optimal: return ok;
    case opt::Status::infeasible: return infeasible;
    case opt::Status::iteration_limit:
    case opt::Status::node_limit:
    case opt::Status::time_limit: return solver_limit;
    default: return failure;
    }
}

struct Options {
    std::string scenario;
    std::string out_dir = "out";
    double tolerance = 1e-6;
    double time_limit = 0.0;
    int mr = 0;  // 0: from the scenario
    int threads = 1;
    std::string format = "mps";
    std::string objective;
    std::string mode;
    double duration = -1.0;
    std::vector<int> rates;
};

scn::Scenario load(const Options& o) {
    auto sc = scn::load_scenario(o.scenario);
    if (!o.objective.empty()) {
        if (sc.kind != scn::Kind::building) throw scn::ParseError("--objective applies to building scenarios only");
        if (o.objective == "cooling")
            sc.building.objective = net::Objective::cooling;
        else if (o.objective == "electric")
            sc.building.objective = net::Objective::electric;
        else
            throw scn::ParseError("--objective must be cooling or electric (priced needs a price series in the file)");
        sc.hash += "-" + o.objective;
    }
    return sc;
}

opt::MilpOptions milp_options(const Options& o) {
    opt::MilpOptions m;
    m.rel_gap = o.tolerance;
    if (o.time_limit > 0.0) m.time_limit = o.time_limit;
    return m;
}

fs::path run_dir(const Options& o, const scn::Scenario& sc) { return fs::path(o.out_dir) / sc.name; }

int cmd_solve(const Options& o) {
    const auto sc = load(o);
    const int rate = o.mr > 0 ? o.mr : sc.mr;
    const auto out = report::solve_scenario(sc, rate, milp_options(o));
    const fs::path dir = run_dir(o, sc);
    report::write_json(dir / "report.json", out.summary);
    if (report::has_point(out)) {
        report::write_table(dir / "slots.csv", out.slots);
        report::write_table(dir / "knots.csv", out.knots);
    }
    const auto& s = out.summary;
    std::cout << sc.name << ": " << opt::status_name(out.sol.status);
    if (s.contains("objective")) std::cout << ", objective " << s["objective"].get<double>();
    std::cout << " (" << out.seconds << " s, " << out.decisions << " decisions)\n";
    if (s.contains("validator") && !s["validator"]["passed"].get<bool>())
        std::cerr << "warning: solution re-check exceeded tolerance, see " << (dir / "report.json").string() << "\n";
    std::cout << "wrote " << dir.string() << "\n";
    return exit_for(out.sol.status);
}

int cmd_simulate(const Options& o) {
    const auto sc = load(o);
    std::optional<bool> th;
    if (o.mode == "thermostat")
        th = true;
    else if (o.mode == "free-float")
        th = false;
    else if (!o.mode.empty())
        throw scn::ParseError("--mode must be free-float or thermostat");
    const auto out = report::simulate_scenario(sc, th, o.duration);
    const fs::path dir = run_dir(o, sc);
    report::write_json(dir / "simulation.json", out.summary);
    report::write_table(dir / "trajectory.csv", out.series);

    report::Table stats;
    const auto& z = out.summary["zones"];
    std::vector<double> idx, mx, mn, mean, ph, pc;
    for (std::size_t i = 0; i < z.size(); ++i) {
        idx.push_back(static_cast<double>(i));
        mx.push_back(z[i]["max_C"]);
        mn.push_back(z[i]["min_C"]);
        mean.push_back(z[i]["mean_C"]);
        ph.push_back(z[i]["peak_heating_hourly"]);
        pc.push_back(z[i]["peak_cooling_hourly"]);
    }
    stats.add("zone", idx);
    stats.add("max_C", mx);
    stats.add("min_C", mn);
    stats.add("mean_C", mean);
    stats.add("peak_heating_hourly", ph);
    stats.add("peak_cooling_hourly", pc);
    report::write_table(dir / "stats.csv", stats);

    for (const auto& zj : z) {
        std::cout << zj["zone"].get<std::string>() << ": min " << zj["min_C"].get<double>() << " C, max "
                  << zj["max_C"].get<double>() << " C, mean " << zj["mean_C"].get<double>() << " C";
        if (zj.contains("band"))
            std::cout << ", band exceeded by " << std::max(zj["band"]["max_above_K"].get<double>(),
                                                           zj["band"]["max_below_K"].get<double>())
                      << " K at most";
        std::cout << "\n";
    }
    std::cout << "energy closure " << out.summary["energy_closure"].get<double>() << "\nwrote " << dir.string() << "\n";
    return ok;
}

int cmd_export(const Options& o) {
    const auto sc = load(o);
    std::optional<net::BuildingProgram> bp;
    std::optional<net::MicrogridProgram> mp;
    const auto& p = report::program_of(sc, bp, mp);
    const int rate = o.mr > 0 ? o.mr : sc.mr;
    const fs::path file = fs::path(o.out_dir) / (sc.name + "." + o.format);
    fs::create_directories(file.parent_path());
    if (rate > 1)
        opt::export_program(opt::apply_blocking(p, rate).program, file.string(), o.format);
    else
        opt::export_program(p, file.string(), o.format);
    std::cout << "wrote " << file.string() << " (" << p.n_vars() << " variables, " << p.n_rows() << " rows)\n";
    return ok;
}

int cmd_sweep(const Options& o) {
    const auto sc = load(o);
    const int M = sc.kind == scn::Kind::building ? sc.building.M : sc.microgrid.M;
    std::vector<int> rates;
    for (int r : o.rates.empty() ? sc.rates : o.rates) {
        if (r < 1 || M % r != 0) {
            std::cerr << "warning: rate " << r << " does not divide M = " << M << ", skipped\n";
            continue;
        }
        rates.push_back(r);
    }
    if (rates.empty()) throw scn::ParseError("sweep: no usable rate");

    std::vector<report::Outcome> runs(rates.size());
    const auto mo = milp_options(o);
    const std::size_t width = static_cast<std::size_t>(std::max(1, o.threads));
    for (std::size_t start = 0; start < rates.size(); start += width) {
        std::vector<std::future<report::Outcome>> jobs;
        for (std::size_t i = start; i < std::min(rates.size(), start + width); ++i)
            jobs.push_back(std::async(std::launch::async, [&sc, &mo, r = rates[i]] { return report::solve_scenario(sc, r, mo); }));
        for (std::size_t i = 0; i < jobs.size(); ++i) runs[start + i] = jobs[i].get();
    }

    report::Table t, timing;
    std::vector<double> mr, cost, dec, rel, sec;
    int worst = ok;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const auto& r = runs[i];
        mr.push_back(rates[i]);
        dec.push_back(r.decisions);
        sec.push_back(r.seconds);
        const double c = r.summary.contains("objective") ? r.summary["objective"].get<double>()
                                                         : std::numeric_limits<double>::quiet_NaN();
        cost.push_back(c);
        rel.push_back((c - cost.front()) / std::max(std::abs(cost.front()), 1e-300));
        worst = std::max(worst, exit_for(r.sol.status));
    }
    t.add("mr", mr);
    t.add("cost", cost);
    t.add("rel_to_first", rel);
    t.add("decisions", dec);
    timing.add("mr", mr);
    timing.add("seconds", sec);

    // Nested pairs (each rate a multiple of the previous) must not get cheaper.
    json checks = json::array();
    bool monotone = true;
    for (std::size_t i = 1; i < rates.size(); ++i) {
        const bool nested = rates[i] % rates[i - 1] == 0;
        const bool holds = !(cost[i] < cost[i - 1] - o.tolerance * std::abs(cost[i - 1]));
        if (nested) monotone = monotone && holds;
        checks.push_back({{"from", rates[i - 1]}, {"to", rates[i]}, {"nested", nested}, {"nondecreasing", holds}});
    }
    json j = report::header(sc, "sweep");
    j["rates"] = rates;
    j["costs"] = cost;
    j["decisions"] = dec;
    j["monotone"] = monotone;
    j["pairs"] = checks;
    json status = json::array();
    for (const auto& r : runs) status.push_back(opt::status_name(r.sol.status));
    j["status"] = status;

    const fs::path dir = run_dir(o, sc);
    report::write_table(dir / "sweep.csv", t);
    report::write_table(dir / "sweep_timing.csv", timing);
    report::write_json(dir / "sweep.json", j);
    for (std::size_t i = 0; i < rates.size(); ++i)
        std::cout << "M_R = " << rates[i] << ": cost " << cost[i] << ", " << dec[i] << " decisions, " << sec[i]
                  << " s\n";
    std::cout << "monotone: " << (monotone ? "yes" : "no") << "\nwrote " << dir.string() << "\n";
    return worst;
}

int cmd_validate(const Options& o) {
    const auto sc = load(o);
    std::optional<net::BuildingProgram> bp;
    std::optional<net::MicrogridProgram> mp;
    const auto& p = report::program_of(sc, bp, mp);
    std::cout << sc.name << " (" << (sc.kind == scn::Kind::building ? "building" : "microgrid") << ")\n"
              << "  hash       " << sc.hash << "\n"
              << "  variables  " << p.n_vars() << " (" << p.binaries().size() << " binary)\n"
              << "  rows       " << p.n_rows() << "\n"
              << "  smooth     " << p.smooth.size() << "\n";
    if (sc.kind == scn::Kind::building) {
        for (const auto& w : sc.building.model.warnings) std::cout << "  warning: " << w << "\n";
        std::cout << "  zones      " << sc.zone_names.size() << ", wall states " << sc.building.model.n_states() << "\n";
    }
    std::cout << "ok\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"District energy modeling and scheduling"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c) {
        c->add_option("scenario", o.scenario, "Scenario file (.ini)")->required();
        c->add_option("--out-dir", o.out_dir, "Output folder")->capture_default_str();
    };
    auto solving = [&](CLI::App* c) {
        c->add_option("--tolerance", o.tolerance, "Relative optimality gap for branch and bound")->capture_default_str();
        c->add_option("--mr", o.mr, "Multirate block length (default: scenario value)");
        c->add_option("--time-limit", o.time_limit, "Solver time limit in seconds");
        c->add_option("--objective", o.objective, "Override the building objective: cooling or electric");
    };

    auto* solve = app.add_subcommand("solve", "Optimize a scenario and write report.json, slots.csv, knots.csv");
    common(solve);
    solving(solve);

    auto* simulate = app.add_subcommand("simulate", "Integrate the building model and write trajectory and stats");
    common(simulate);
    simulate->add_option("--mode", o.mode, "free-float or thermostat (default: scenario value)");
    simulate->add_option("--duration", o.duration, "Seconds to simulate (default: scenario value)");

    auto* exp = app.add_subcommand("export", "Write the optimization program as MPS or LP text");
    common(exp);
    exp->add_option("--format", o.format, "mps or lp")->check(CLI::IsMember({"mps", "lp"}))->capture_default_str();
    exp->add_option("--mr", o.mr, "Multirate block length");
    exp->add_option("--objective", o.objective, "Override the building objective: cooling or electric");

    auto* sweep = app.add_subcommand("sweep", "Solve over several multirate block lengths");
    common(sweep);
    solving(sweep);
    sweep->add_option("--rates", o.rates, "Block lengths (default: scenario rates)")->delimiter(',');
    sweep->add_option("--threads", o.threads, "Parallel solves")->capture_default_str();

    auto* validate = app.add_subcommand("validate-config", "Parse a scenario and build its program");
    validate->add_option("scenario", o.scenario, "Scenario file (.ini)")->required();
    validate->add_option("--objective", o.objective, "Override the building objective");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : parse_error;
    }

    try {
        if (*solve) return cmd_solve(o);
        if (*simulate) return cmd_simulate(o);
        if (*exp) return cmd_export(o);
        if (*sweep) return cmd_sweep(o);
        if (*validate) return cmd_validate(o);
    } catch (const scn::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return parse_error;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return parse_error;
    } catch (const sim::SimulationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return solver_limit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
    return failure;
}
