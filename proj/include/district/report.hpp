#pragma once

#include "district/blocking.hpp"
#include "district/milp.hpp"
#include "district/models.hpp"
#include "district/scenario.hpp"
#include "district/simulate.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>

namespace district::report {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Column-major table written as CSV; NaN cells stay empty.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;

    void add(std::string name, std::vector<double> v) {
        require(data.empty() || v.size() == data.front().size(), "report: column '" + name + "' has the wrong length");
        columns.push_back(std::move(name));
        data.push_back(std::move(v));
    }

    std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }

    const std::vector<double>& column(const std::string& name) const {
        for (std::size_t c = 0; c < columns.size(); ++c)
            if (columns[c] == name) return data[c];
        throw ModelError("report: no column '" + name + "'");
    }

    void write(std::ostream& os) const {
        for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
        os << '\n';
        char buf[32];
        for (std::size_t r = 0; r < rows(); ++r) {
            for (std::size_t c = 0; c < columns.size(); ++c) {
                if (c) os << ',';
                const double v = data[c][r];
                if (std::isnan(v)) continue;
                std::snprintf(buf, sizeof buf, "%.10g", v == 0.0 ? 0.0 : v);
                os << buf;
            }
            os << '\n';
        }
    }
};

inline void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << text;
}

inline void write_table(const fs::path& path, const Table& t) {
    std::ostringstream os;
    t.write(os);
    write_file(path, os.str());
}

inline void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

/// Ratio only where the denominator is positive.
inline double cop(double cooling, double electrical) {
    return electrical > 0.0 ? cooling / electrical : std::numeric_limits<double>::quiet_NaN();
}

inline int decision_count(const opt::MathProgram& p, int rate) {
    int n = 0;
    for (const auto& s : p.series)
        if (s.decision) n += opt::decision_count(s, rate);
    return n;
}

struct Outcome {
    opt::Solution sol;
    Vec x;  // in the unblocked program
    json summary;
    Table slots, knots;
    int decisions = 0;
    double seconds = 0.0;
};

namespace detail {

inline json solver_json(const opt::Solution& s) {
    json j;
    j["status"] = opt::status_name(s.status);
    j["iterations"] = s.stats.iterations;
    j["nodes"] = s.stats.nodes;
    j["lp_solves"] = s.stats.lp_solves;
    if (std::isfinite(s.gap)) j["gap"] = s.gap;
    return j;
}

/// Independent re-check of the unblocked program at the expanded point.
inline json validator_json(const opt::MathProgram& p, const Vec& x, double tol) {
    double worst = 0.0;
    std::string where;
    for (int i = 0; i < p.n_rows(); ++i) {
        const auto& r = p.rows[i];
        double scale = 1.0;
        for (const auto& t : r.terms) scale = std::max(scale, std::abs(t.coef * x(t.var)));
        if (std::isfinite(r.lo)) scale = std::max(scale, std::abs(r.lo));
        if (std::isfinite(r.hi)) scale = std::max(scale, std::abs(r.hi));
        const double a = p.row_activity(i, x);
        const double v = std::max({0.0, r.lo - a, a - r.hi}) / scale;
        if (v > worst) {
            worst = v;
            where = r.name;
        }
    }
    const auto res = opt::compute_residuals(p, x);
    json j;
    j["max_scaled_row_residual"] = worst;
    if (!where.empty()) j["worst_row"] = where;
    j["bound_violation"] = res.bounds;
    j["integrality"] = res.integrality;
    j["by_tag"] = {{opt::tag_name(opt::Tag::single_component), res.by_tag[0]},
                   {opt::tag_name(opt::Tag::interconnection), res.by_tag[1]},
                   {opt::tag_name(opt::Tag::control), res.by_tag[2]}};
    j["passed"] = worst <= tol && res.bounds <= tol && res.integrality <= 1e-6;
    return j;
}

inline std::vector<double> count(int n) {
    std::vector<double> v(n);
    for (int k = 0; k < n; ++k) v[k] = k;
    return v;
}

inline std::vector<double> hours(int n, double delta, double offset = 0.0) {
    std::vector<double> h;
    for (int k = 0; k < n; ++k) h.push_back((k + offset) * delta / 3600.0);
    return h;
}

}  // namespace detail

inline opt::Solution run_solver(const opt::MathProgram& p, const opt::MilpOptions& opt) { return opt::solve(p, opt); }

/// Blocks, solves and expands; the caller fills the tables.
inline Outcome solve_program(const opt::MathProgram& p, int rate, const opt::MilpOptions& opt) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    if (rate > 1) {
        const auto bp = opt::apply_blocking(p, rate);
        o.sol = run_solver(bp.program, opt);
        if (o.sol.x.size() == bp.program.n_vars()) o.x = bp.expand(o.sol.x);
    } else {
        o.sol = run_solver(p, opt);
        o.x = o.sol.x;
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.decisions = decision_count(p, rate);
    return o;
}

/// Optimal, or stopped at a limit with an incumbent.
inline bool has_point(const Outcome& o) {
    using opt::Status;
    const auto s = o.sol.status;
    return o.x.size() > 0 && (s == Status::optimal || s == Status::node_limit || s == Status::time_limit);
}

inline json header(const scn::Scenario& sc, const std::string& command) {
    json j;
    j["scenario"] = sc.name;
    j["file"] = sc.file.filename().string();
    j["config_hash"] = sc.hash;
    j["command"] = command;
    j["kind"] = sc.kind == scn::Kind::building ? "building" : "microgrid";
    j["energy_unit"] = sc.energy_unit_name;
    return j;
}

inline Outcome solve_building(const scn::Scenario& sc, int rate, const opt::MilpOptions& opt, double check_tol = 1e-8) {
    const auto& b = sc.building;
    const auto bp = net::build_building_program(b);
    Outcome o = solve_program(bp.program, rate, opt);
    json& j = o.summary;
    j = header(sc, "solve");
    j["objective_kind"] = net::objective_name(b.objective);
    j["mr"] = rate;
    j["decisions"] = o.decisions;
    j["solver"] = detail::solver_json(o.sol);
    if (!has_point(o)) return o;

    const int M = b.M;
    const Index nz = b.model.n_zones();
    j["objective"] = bp.program.objective(o.x);
    json costs;
    for (const auto& [k, v] : bp.costs.evaluate(bp.program, o.x)) costs[k] = v;
    j["costs"] = costs;
    const auto eel = bp.electrical(o.x);
    double cool = 0.0, elec = 0.0;
    for (int k = 0; k < M; ++k) {
        cool += o.x(bp.Ech[k]);
        elec += eel[k];
    }
    j["total_cooling"] = cool;
    j["total_electrical"] = elec;
    j["validator"] = detail::validator_json(bp.program, o.x, check_tol);

    o.slots.add("slot", detail::count(M));
    o.slots.add("t_start_h", detail::hours(M, b.delta));
    o.slots.add("t_end_h", detail::hours(M, b.delta, 1.0));
    for (Index z = 0; z < nz; ++z) {
        std::vector<double> e;
        for (int k = 0; k < M; ++k) e.push_back(o.x(bp.Ec[k * nz + z]));
        o.slots.add("E_c_" + sc.zone_names[z], e);
    }
    std::vector<double> ech, c;
    for (int k = 0; k < M; ++k) {
        ech.push_back(o.x(bp.Ech[k]));
        c.push_back(cop(ech.back(), eel[k]));
    }
    o.slots.add("E_chiller", ech);
    o.slots.add("E_el", eel);
    o.slots.add("COP", c);
    if (b.objective == net::Objective::priced) o.slots.add("price", b.price);

    o.knots.add("knot", detail::count(M + 1));
    o.knots.add("t_h", detail::hours(M + 1, b.delta));
    for (Index z = 0; z < nz; ++z) {
        std::vector<double> u, lo, hi;
        for (int k = 0; k <= M; ++k) {
            u.push_back(o.x(bp.u[k * nz + z]) - scn::kelvin);
            lo.push_back(b.u_lo(k, z) - scn::kelvin);
            hi.push_back(b.u_hi(k, z) - scn::kelvin);
        }
        o.knots.add("T_" + sc.zone_names[z], u);
        o.knots.add("lo_" + sc.zone_names[z], lo);
        o.knots.add("hi_" + sc.zone_names[z], hi);
    }
    return o;
}

inline Outcome solve_microgrid(const scn::Scenario& sc, int rate, const opt::MilpOptions& opt, double check_tol = 1e-8) {
    const auto& m = sc.microgrid;
    const auto mp = net::build_microgrid_program(m);
    Outcome o = solve_program(mp.program, rate, opt);
    json& j = o.summary;
    j = header(sc, "solve");
    j["mr"] = rate;
    j["decisions"] = o.decisions;
    j["solver"] = detail::solver_json(o.sol);
    if (!has_point(o)) return o;

    const int M = m.M;
    j["objective"] = mp.program.objective(o.x);
    json costs;
    for (const auto& [k, v] : mp.costs.evaluate(mp.program, o.x)) costs[k] = v;
    j["costs"] = costs;
    j["validator"] = detail::validator_json(mp.program, o.x, check_tol);

    auto col = [&](const std::vector<int>& vars) {
        std::vector<double> v;
        for (int id : vars) v.push_back(id >= 0 ? o.x(id) : std::numeric_limits<double>::quiet_NaN());
        return v;
    };
    o.slots.add("slot", detail::count(M));
    o.slots.add("t_start_h", detail::hours(M, m.delta));
    o.slots.add("E_L", col(mp.grid));
    o.slots.add("price", m.price);
    o.slots.add("E_c_demand", m.E_c);
    o.slots.add("E_h_demand", m.E_h);
    o.slots.add("E_l_demand", m.E_l);
    for (std::size_t i = 0; i < m.chillers.size(); ++i) {
        const std::string& n = m.chillers[i].name;
        std::vector<int> on, ec, el;
        for (const auto& v : mp.chillers[i]) {
            on.push_back(v.delta);
            ec.push_back(v.E_c);
            el.push_back(v.E_l);
        }
        const auto c = col(ec), e = col(el);
        std::vector<double> r;
        for (int k = 0; k < M; ++k) r.push_back(cop(c[k], e[k]));
        o.slots.add(n + ".on", col(on));
        o.slots.add(n + ".E_c", c);
        o.slots.add(n + ".E_l", e);
        o.slots.add(n + ".COP", r);
    }
    std::vector<int> on, u, el, eh;
    for (const auto& v : mp.chp) {
        on.push_back(v.delta);
        u.push_back(v.u);
        el.push_back(v.E_l);
        eh.push_back(v.E_h);
    }
    const std::string& cn = m.chp.name;
    o.slots.add(cn + ".on", col(on));
    o.slots.add(cn + ".u", col(u));
    o.slots.add(cn + ".E_l", col(el));
    o.slots.add(cn + ".E_h", col(eh));

    o.knots.add("knot", detail::count(M + 1));
    o.knots.add("t_h", detail::hours(M + 1, m.delta));
    for (const auto* s : {&mp.heat, &mp.cool, &mp.elec}) {
        const auto& spec = s == &mp.heat ? m.heat : s == &mp.cool ? m.cool : m.elec;
        o.knots.add(spec.name + ".S", col(s->S));
        if (!s->s.empty()) {
            o.slots.add(spec.name + ".s", col(s->s));
        } else {
            std::vector<double> net;
            const auto c = col(s->s_C), d = col(s->s_D);
            for (int k = 0; k < M; ++k) net.push_back(c[k] - d[k]);
            o.slots.add(spec.name + ".s", net);
        }
    }
    return o;
}

inline Outcome solve_scenario(const scn::Scenario& sc, int rate, const opt::MilpOptions& opt, double check_tol = 1e-8) {
    return sc.kind == scn::Kind::building ? solve_building(sc, rate, opt, check_tol)
                                          : solve_microgrid(sc, rate, opt, check_tol);
}

inline const opt::MathProgram& program_of(const scn::Scenario& sc, std::optional<net::BuildingProgram>& bp,
                                          std::optional<net::MicrogridProgram>& mp) {
    if (sc.kind == scn::Kind::building) {
        bp = net::build_building_program(sc.building);
        return bp->program;
    }
    mp = net::build_microgrid_program(sc.microgrid);
    return mp->program;
}

struct SimulationOutcome {
    sim::Trajectory tr;
    json summary;
    Table series;
};

inline SimulationOutcome simulate_scenario(const scn::Scenario& sc, std::optional<bool> thermostat = std::nullopt,
                                           double duration = -1.0) {
    require(sc.kind == scn::Kind::building, "simulate: scenario '" + sc.name + "' is not a building");
    const auto& b = sc.building;
    const auto& st = sc.sim;
    sim::SimulationConfig cfg;
    cfg.step = st.step;
    cfg.duration = duration >= 0.0 ? duration : st.duration;
    const bool th = thermostat.value_or(st.thermostat);
    if (th) cfg.thermostat = sim::Thermostat{st.heat_on_below, st.cool_on_above, st.kp, st.ki, st.heat_max, st.cool_max};
    sim::Inputs in{b.delta, b.disturbances, b.occupancy};
    const Index nz = b.model.n_zones();

    SimulationOutcome out;
    out.tr = sim::simulate(b.model, in, cfg, Vec::Constant(nz, st.initial));
    const auto& tr = out.tr;
    json& j = out.summary;
    j = header(sc, "simulate");
    j["mode"] = th ? "thermostat" : "free-float";
    j["step"] = tr.step;
    j["duration"] = tr.time.back();
    j["energy_closure"] = tr.energy.closure();
    j["co_applied_max"] = tr.co_applied;
    json zones = json::array();
    for (Index z = 0; z < nz; ++z) {
        const auto& s = tr.stats[z];
        json zj;
        zj["zone"] = sc.zone_names[z];
        zj["max_C"] = s.max - scn::kelvin;
        zj["min_C"] = s.min - scn::kelvin;
        zj["mean_C"] = s.mean - scn::kelvin;
        zj["peak_heating_hourly"] = s.peak_heating / sc.energy_unit;
        zj["peak_cooling_hourly"] = s.peak_cooling / sc.energy_unit;
        zj["heating"] = tr.energy.heating(z) / sc.energy_unit;
        zj["cooling"] = tr.energy.cooling(z) / sc.energy_unit;
        if (th) {
            double above = 0.0, below = 0.0, outside = 0.0;
            for (std::size_t i = 0; i < tr.time.size(); ++i) {
                const double a = tr.Tz(i, z) - st.cool_on_above, bl = st.heat_on_below - tr.Tz(i, z);
                above = std::max(above, a);
                below = std::max(below, bl);
                if (i > 0 && (a > 0.0 || bl > 0.0)) outside += tr.time[i] - tr.time[i - 1];
            }
            zj["band"] = {{"max_above_K", above}, {"max_below_K", below}, {"seconds_outside", outside}};
        }
        zones.push_back(zj);
    }
    j["zones"] = zones;

    out.series.add("t_h", [&] {
        std::vector<double> h;
        for (double t : tr.time) h.push_back(t / 3600.0);
        return h;
    }());
    for (Index z = 0; z < nz; ++z) {
        const auto& n = sc.zone_names[z];
        std::vector<double> t(tr.Tz.rows()), h(tr.Tz.rows()), c(tr.Tz.rows());
        for (Index i = 0; i < tr.Tz.rows(); ++i) {
            t[i] = tr.Tz(i, z) - scn::kelvin;
            h[i] = tr.heating(i, z);
            c[i] = tr.cooling(i, z);
        }
        out.series.add("T_" + n, t);
        out.series.add("heating_" + n + "_W", h);
        out.series.add("cooling_" + n + "_W", c);
    }
    return out;
}

}  // namespace district::report
