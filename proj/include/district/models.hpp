#pragma once

#include "district/chiller.hpp"
#include "district/chp.hpp"
#include "district/discretize.hpp"
#include "district/network.hpp"
#include "district/storage.hpp"

#include <optional>

namespace district::net {

enum class Objective { cooling, electric, priced };

inline const char* objective_name(Objective o) {
    switch (o) {
    case Objective::cooling: return "cooling";
    case Objective::electric: return "electric";
    case Objective::priced: return "priced";
    }
    return "?";
}

enum class ChillerCurve { biquadratic, pwa };

/// One controlled building served by one chiller.
struct BuildingScenario {
    thermal::BuildingModel model;
    double delta = 600.0;
    int M = 144;
    Mat occupancy;     // (M+1) x nz
    Mat disturbances;  // (M+1) x 5
    Mat u_lo, u_hi;    // (M+1) x nz, K
    comp::ChillerSpec chiller;
    double T_o = 295.15;
    ChillerCurve curve = ChillerCurve::biquadratic;
    Objective objective = Objective::electric;
    std::vector<double> price;  // per slot, priced objective only
    bool periodic = true;
    bool tie_zones = false;
    std::optional<Vec> T_z0;
    double energy_unit = 1e6;
    double drop_tol = 1e-13;
};

struct BuildingProgram {
    MathProgram program;
    CostBook costs;
    discrete::LiftedBuilding lb;
    Vec omega;
    std::vector<int> u, T0, Ec, Ech, Eel;  // Eel empty for the biquadratic curve
    comp::Biquadratic f;                   // program units
    comp::Pwa pwa;                         // program units, PWA curve only
    double unit = 1e6;

    /// Chiller electrical energy per slot in program units.
    std::vector<double> electrical(const Vec& x) const {
        std::vector<double> e;
        for (std::size_t k = 0; k < Ech.size(); ++k) e.push_back(Eel.empty() ? f(x(Ech[k])) : pwa(x(Ech[k])));
        return e;
    }
};

inline BuildingProgram build_building_program(const BuildingScenario& sc) {
    const int M = sc.M;
    const Index nz = sc.model.n_zones();
    const Index nd = thermal::n_disturbances;
    require(sc.disturbances.rows() == M + 1 && sc.disturbances.cols() == nd,
            "building scenario: disturbances must have M+1 rows and 5 columns");
    require(sc.u_lo.rows() == M + 1 && sc.u_lo.cols() == nz && sc.u_hi.rows() == M + 1 && sc.u_hi.cols() == nz,
            "building scenario: comfort bounds must have M+1 rows and one column per zone");
    require(sc.energy_unit > 0.0, "building scenario: energy unit must be positive");
    if (sc.objective == Objective::priced)
        require(static_cast<int>(sc.price.size()) == M, "building scenario: priced objective needs M prices");

    BuildingProgram bp;
    bp.unit = sc.energy_unit;
    const double U = sc.energy_unit;
    bp.lb = discrete::build_lifted(sc.model, sc.delta, M, sc.occupancy);
    const auto& lb = bp.lb;
    bp.omega = discrete::flatten(sc.disturbances);
    MathProgram& p = bp.program;
    p.name = "building";
    const Index n = lb.n;

    for (int k = 0; k <= M; ++k)
        for (Index j = 0; j < nz; ++j)
            bp.u.push_back(p.add_var("u[" + std::to_string(k) + "," + std::to_string(j) + "]", 230.0, 370.0));
    for (Index i = 0; i < n; ++i) bp.T0.push_back(p.add_var("T0[" + std::to_string(i) + "]", 230.0, 370.0));
    for (int k = 0; k < M; ++k)
        for (Index j = 0; j < nz; ++j)
            bp.Ec.push_back(p.add_var("Ec[" + std::to_string(k) + "," + std::to_string(j) + "]", 0.0, inf));

    // Entries below drop_tol times the largest of their row are decayed powers of Phi.
    auto dense_terms = [&](std::vector<Term> t, const Mat& a, Index r, const std::vector<int>& vars, double scale) {
        const double big = a.row(r).cwiseAbs().maxCoeff();
        for (Index c = 0; c < a.cols(); ++c)
            if (std::abs(a(r, c)) > sc.drop_tol * big) t.push_back({vars[c], scale * a(r, c)});
        return t;
    };

    // E_c = Ac T0 + Bc u + Wc w + b, energies divided by U.
    const Vec rhs = (lb.Wc * bp.omega + lb.b) / U;
    for (Index r = 0; r < static_cast<Index>(M) * nz; ++r) {
        auto t = dense_terms({{bp.Ec[r], 1.0}}, lb.Ac, r, bp.T0, -1.0 / U);
        t = dense_terms(std::move(t), lb.Bc, r, bp.u, -1.0 / U);
        p.add_row("building.Ec[" + std::to_string(r) + "]", std::move(t), rhs(r), rhs(r), Tag::single_component);
    }

    {
        std::vector<double> lo, hi;
        for (int k = 0; k <= M; ++k)
            for (Index j = 0; j < nz; ++j) {
                lo.push_back(sc.u_lo(k, j));
                hi.push_back(sc.u_hi(k, j));
            }
        add_box(p, bp.u, lo, hi, "comfort");
    }
    if (sc.periodic) {
        for (Index j = 0; j < nz; ++j)
            add_equal(p, bp.u[M * nz + j], bp.u[j], "periodic.u[" + std::to_string(j) + "]");
        const auto& L = lb.lifted;
        const Mat IminusPhi = Mat::Identity(n, n) - L.Phi;
        const Vec wr = L.Omega * bp.omega;
        for (Index i = 0; i < n; ++i) {
            auto t = dense_terms({}, IminusPhi, i, bp.T0, 1.0);
            t = dense_terms(std::move(t), L.Psi, i, bp.u, -1.0);
            p.add_row("periodic.T[" + std::to_string(i) + "]", std::move(t), wr(i), wr(i), Tag::control);
        }
    }
    if (sc.T_z0) {
        require(sc.T_z0->size() == nz, "building scenario: one initial temperature per zone");
        for (Index j = 0; j < nz; ++j)
            p.add_row("initial.u[" + std::to_string(j) + "]", {{bp.u[j], 1.0}}, (*sc.T_z0)(j), (*sc.T_z0)(j),
                      Tag::control);
    }
    if (sc.tie_zones)
        for (int k = 0; k <= M; ++k)
            for (Index j = 1; j < nz; ++j)
                add_equal(p, bp.u[k * nz + j], bp.u[k * nz], "tie[" + std::to_string(k) + "," + std::to_string(j) + "]");

    sc.chiller.validate(sc.delta);
    const double emax = sc.chiller.E_max / U;
    Network net(M);
    net.add_port("building", Carrier::cooling);
    net.add_port("chiller", Carrier::cooling);
    if (sc.curve == ChillerCurve::biquadratic) {
        bp.f = comp::scaled(comp::fit_biquadratic(sc.chiller, sc.T_o, sc.delta), U);
        for (int k = 0; k < M; ++k) bp.Ech.push_back(p.add_var("chiller.Ec[" + std::to_string(k) + "]", 0.0, emax));
    } else {
        bp.pwa = comp::scaled(comp::fit_pwa(sc.chiller, sc.T_o, sc.delta), U);
        for (int k = 0; k < M; ++k) {
            auto v = comp::add_chiller_slot(p, "chiller[" + std::to_string(k) + "]", bp.pwa, emax, false, 0.0);
            bp.Ech.push_back(v.E_c);
            bp.Eel.push_back(v.E_l);
        }
    }
    for (int k = 0; k < M; ++k) {
        net.flux("chiller", Carrier::cooling, k, bp.Ech[k], 1.0);
        for (Index j = 0; j < nz; ++j) net.flux("building", Carrier::cooling, k, bp.Ec[k * nz + j], -1.0);
    }
    net.compose(p);

    for (int k = 0; k < M; ++k) {
        if (sc.objective == Objective::cooling) {
            bp.costs.linear(p, "cooling", bp.Ech[k], 1.0);
            continue;
        }
        const double w = sc.objective == Objective::priced ? sc.price[k] : 1.0;
        const std::string cat = sc.objective == Objective::priced ? "C_l" : "electric";
        if (bp.Eel.empty())
            bp.costs.smooth(p, cat, {bp.Ech[k], bp.f.c1, bp.f.c2, bp.f.c3, w});
        else
            bp.costs.linear(p, cat, bp.Eel[k], w);
    }

    for (Index j = 0; j < nz; ++j) {
        opt::Series s{"u" + std::to_string(j), {}, true, sc.periodic, true};
        for (int k = 0; k <= M; ++k) s.vars.push_back(bp.u[k * nz + j]);
        p.series.push_back(std::move(s));
    }
    p.series.push_back({"chiller.Ec", bp.Ech, false, false, false});
    return bp;
}

/// Microgrid of uncontrolled buildings, chillers, one CHP and three storages.
struct MicrogridScenario {
    int M = 24;
    double delta = 3600.0;
    std::vector<comp::ChillerSpec> chillers;
    double T_o = 295.15;
    comp::ChpSpec chp;
    comp::StorageSpec heat, cool, elec;
    std::vector<double> E_c, E_h, E_l;  // demands in program units
    std::vector<double> price;          // per program energy unit
    std::vector<double> fuel_price;     // per unit flow and hour
    double eps = 1e-3;
    double energy_unit = 1e6;
    bool periodic_status = true;
};

struct MicrogridProgram {
    MathProgram program;
    CostBook costs;
    std::vector<std::vector<comp::ChillerVars>> chillers;  // [i][k]
    std::vector<comp::Pwa> pwa;                            // program units
    std::vector<comp::ChpVars> chp;
    comp::StorageVars heat, cool, elec;
    std::vector<int> grid;
    std::map<Carrier, std::vector<int>> balance;
    double unit = 1e6;
};

inline MicrogridProgram build_microgrid_program(const MicrogridScenario& sc) {
    const int M = sc.M;
    for (const auto* v : {&sc.E_c, &sc.E_h, &sc.E_l, &sc.price, &sc.fuel_price})
        require(static_cast<int>(v->size()) == M, "microgrid scenario: every series needs M slot values");
    require(!sc.chillers.empty(), "microgrid scenario: no chillers");
    const double U = sc.energy_unit;

    MicrogridProgram mp;
    mp.unit = U;
    MathProgram& p = mp.program;
    p.name = "microgrid";
    Network net(M);
    net.add_port("buildings", Carrier::cooling);
    net.add_port("buildings", Carrier::heating);
    net.add_port("buildings", Carrier::electrical);
    net.add_port("chp", Carrier::electrical);
    net.add_port("chp", Carrier::heating);
    net.add_port(sc.heat.name, Carrier::heating);
    net.add_port(sc.cool.name, Carrier::cooling);
    net.add_port(sc.elec.name, Carrier::electrical);

    for (const auto& c : sc.chillers) {
        c.validate(sc.delta);
        mp.pwa.push_back(comp::scaled(comp::fit_pwa(c, sc.T_o, sc.delta), U));
        net.add_port(c.name, Carrier::cooling);
        net.add_port(c.name, Carrier::electrical);
    }
    sc.chp.validate();

    mp.chillers.resize(sc.chillers.size());
    for (int k = 0; k < M; ++k) {
        const std::string ks = "[" + std::to_string(k) + "]";
        for (std::size_t i = 0; i < sc.chillers.size(); ++i) {
            const auto& c = sc.chillers[i];
            auto v = comp::add_chiller_slot(p, c.name + ks, mp.pwa[i], c.E_max / U, true, sc.eps);
            mp.chillers[i].push_back(v);
            net.flux(c.name, Carrier::cooling, k, v.E_c, 1.0);
            net.flux(c.name, Carrier::electrical, k, v.E_l, -1.0);
        }
        mp.chp.push_back(comp::add_chp_slot(p, sc.chp, sc.chp.name + ks, sc.eps));
        net.flux("chp", Carrier::electrical, k, mp.chp.back().E_l, 1.0);
        net.flux("chp", Carrier::heating, k, mp.chp.back().E_h, 1.0);
        net.demand("buildings", Carrier::cooling, k, sc.E_c[k]);
        net.demand("buildings", Carrier::heating, k, sc.E_h[k]);
        net.demand("buildings", Carrier::electrical, k, sc.E_l[k]);
    }

    mp.heat = comp::add_storage(p, sc.heat, M);
    mp.cool = comp::add_storage(p, sc.cool, M);
    mp.elec = comp::add_storage(p, sc.elec, M);
    for (int k = 0; k < M; ++k) {
        for (const auto& t : comp::exchange_terms(mp.heat, k)) net.flux(sc.heat.name, Carrier::heating, k, t.var, t.coef);
        for (const auto& t : comp::exchange_terms(mp.cool, k)) net.flux(sc.cool.name, Carrier::cooling, k, t.var, t.coef);
        for (const auto& t : comp::exchange_terms(mp.elec, k))
            net.flux(sc.elec.name, Carrier::electrical, k, t.var, t.coef);
    }
    mp.grid = net.connect_grid(p);
    mp.balance = net.compose(p);

    add_tariff(p, mp.costs, Tariff::linear(sc.price), mp.grid, "C_l");
    std::vector<int> w, dmt;
    for (const auto& v : mp.chp) {
        w.push_back(v.w);
        dmt.push_back(v.delta);
    }
    add_fuel_cost(p, mp.costs, w, sc.fuel_price, sc.delta / 3600.0, "C_f");
    const StartupBoundary bnd{sc.periodic_status, 0};
    if (sc.chp.model == comp::ChpModel::linear_onoff)
        add_startup(p, mp.costs, "C_mt", dmt, sc.chp.startup_cost, bnd, sc.chp.name);
    for (std::size_t i = 0; i < sc.chillers.size(); ++i) {
        std::vector<int> d;
        for (const auto& v : mp.chillers[i]) d.push_back(v.delta);
        add_startup(p, mp.costs, "C_ch", d, sc.chillers[i].startup_cost, bnd, sc.chillers[i].name);
    }

    auto slot_series = [&](const std::string& name, std::vector<int> vars) {
        p.series.push_back({name, std::move(vars), false, false, true});
    };
    for (std::size_t i = 0; i < sc.chillers.size(); ++i) {
        std::vector<int> d, e;
        for (const auto& v : mp.chillers[i]) {
            d.push_back(v.delta);
            e.push_back(v.E_c);
        }
        slot_series(sc.chillers[i].name + ".on", d);
        slot_series(sc.chillers[i].name + ".Ec", e);
    }
    slot_series(sc.chp.name + ".on", dmt);
    {
        std::vector<int> u;
        for (const auto& v : mp.chp) u.push_back(v.u);
        slot_series(sc.chp.name + ".u", u);
    }
    if (!mp.heat.s.empty()) slot_series(sc.heat.name + ".s", mp.heat.s);
    if (!mp.cool.s.empty()) slot_series(sc.cool.name + ".s", mp.cool.s);
    if (!mp.elec.s.empty()) slot_series(sc.elec.name + ".s", mp.elec.s);
    return mp;
}

}  // namespace district::net
