#include "district/milp.hpp"
#include "district/models.hpp"
#include "district/scenario.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace district;
using namespace district::net;
using opt::MathProgram;

namespace {

const std::string dir = DISTRICT_SCENARIO_DIR;

// Direct count of 0 -> 1 transitions.
int count_startups(const std::vector<int>& d, bool periodic, int initial) {
    int n = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const int prev = k > 0 ? d[k - 1] : (periodic ? d.back() : initial);
        n += std::max(d[k] - prev, 0);
    }
    return n;
}

double startup_cost_of(const std::vector<int>& d, double C, StartupBoundary b) {
    MathProgram p;
    CostBook book;
    std::vector<int> vars;
    for (std::size_t k = 0; k < d.size(); ++k) vars.push_back(p.add_var("d" + std::to_string(k), d[k], d[k]));
    add_startup(p, book, "C", vars, C, b, "unit");
    const auto s = opt::solve_lp(p);
    EXPECT_TRUE(s.optimal());
    return s.objective;
}

}  // namespace

TEST(Network, SingleChillerCoversBuildingLoad) {
    MathProgram p;
    Network net(3);
    net.add_port("building", Carrier::cooling);
    net.add_port("chiller", Carrier::cooling);
    std::vector<int> ec, ech;
    for (int k = 0; k < 3; ++k) {
        ec.push_back(p.add_var("Ec" + std::to_string(k), 0.0, inf));
        ech.push_back(p.add_var("Ech" + std::to_string(k), 0.0, inf));
        net.flux("building", Carrier::cooling, k, ec[k], -1.0);
        net.flux("chiller", Carrier::cooling, k, ech[k], 1.0);
    }
    const auto rows = net.compose(p);
    ASSERT_EQ(rows.at(Carrier::cooling).size(), 3u);
    for (int k = 0; k < 3; ++k) {
        const auto& r = p.rows[rows.at(Carrier::cooling)[k]];
        EXPECT_EQ(r.tag, opt::Tag::interconnection);
        EXPECT_EQ(r.lo, 0.0);
        EXPECT_EQ(r.hi, 0.0);
        ASSERT_EQ(r.terms.size(), 2u);
        Vec x = Vec::Zero(p.n_vars());
        x(ec[k]) = 4.0;
        x(ech[k]) = 4.0;
        EXPECT_EQ(p.row_activity(rows.at(Carrier::cooling)[k], x), 0.0);
    }
}

TEST(Network, GridOnlyForcesZeroExchange) {
    MathProgram p;
    Network net(4);
    const auto el = net.connect_grid(p);
    net.compose(p);
    for (int v : el) p.cost[v] = 1.0;
    const auto s = opt::solve_lp(p);
    ASSERT_TRUE(s.optimal());
    for (int v : el) EXPECT_EQ(s.x(v), 0.0);
}

TEST(Network, CompositionErrors) {
    MathProgram p;
    const int v = p.add_var("x", 0.0, 1.0);
    {
        Network net(1);
        net.connect_grid(p);
        EXPECT_THROW(net.connect_grid(p), ModelError);
    }
    {
        Network net(1);
        net.add_port("chiller", Carrier::cooling);
        EXPECT_THROW(net.flux("chiller", Carrier::heating, 0, v, 1.0), ModelError);
        EXPECT_THROW(net.flux("boiler", Carrier::heating, 0, v, 1.0), ModelError);
    }
    {
        Network net(1);
        net.add_port("chiller", Carrier::cooling);
        net.add_port("chiller", Carrier::electrical);
        net.flux("chiller", Carrier::cooling, 0, v, 1.0);
        try {
            net.compose(p);
            FAIL() << "expected a dangling port";
        } catch (const ModelError& e) {
            EXPECT_NE(std::string(e.what()).find("dangling electrical port of 'chiller'"), std::string::npos);
        }
    }
    {
        Network net(1);
        net.add_port("chiller", Carrier::cooling);
        net.flux("chiller", Carrier::cooling, 0, 99, 1.0);
        EXPECT_THROW(net.compose(p), ModelError);
    }
}

TEST(Network, MicrogridThermalBalances) {
    const auto sc = scn::load_scenario(dir + "/microgrid_4.ini");
    const auto mp = build_microgrid_program(sc.microgrid);
    const auto& p = mp.program;
    for (int k = 0; k < sc.microgrid.M; ++k) {
        const auto& cool = p.rows[mp.balance.at(Carrier::cooling)[k]];
        std::set<int> want;
        for (const auto& ch : mp.chillers) want.insert(ch[k].E_c);
        want.insert(mp.cool.s[k]);
        std::set<int> got;
        for (const auto& t : cool.terms) {
            got.insert(t.var);
            EXPECT_EQ(t.coef, 1.0);
        }
        EXPECT_EQ(got, want);
        EXPECT_EQ(cool.lo, sc.microgrid.E_c[k]);

        const auto& heat = p.rows[mp.balance.at(Carrier::heating)[k]];
        got.clear();
        for (const auto& t : heat.terms) got.insert(t.var);
        EXPECT_EQ(got, (std::set<int>{mp.chp[k].E_h, mp.heat.s[k]}));
        EXPECT_EQ(heat.hi, sc.microgrid.E_h[k]);
    }
}

TEST(Network, BalancesAndCostDecompositionAtOptimum) {
    const auto sc = scn::load_scenario(dir + "/microgrid_4.ini");
    const auto mp = build_microgrid_program(sc.microgrid);
    const auto s = opt::solve(mp.program);
    ASSERT_TRUE(s.optimal()) << s.message;
    for (const auto& [c, rows] : mp.balance)
        for (int r : rows) {
            const auto& row = mp.program.rows[r];
            const double scale = std::max(1.0, std::abs(row.lo));
            EXPECT_LE(std::abs(mp.program.row_activity(r, s.x) - row.lo), 1e-9 * scale);
        }
    const auto parts = mp.costs.evaluate(mp.program, s.x);
    double sum = 0.0;
    for (const auto& [c, v] : parts) sum += v;
    EXPECT_NEAR(sum, s.objective, 1e-9 * std::abs(s.objective));
    EXPECT_EQ(parts.size(), 4u);
    EXPECT_GE(parts.at("C_mt"), -1e-12);
    EXPECT_GE(parts.at("C_ch"), -1e-12);

    // Independent recomputation from the raw solution.
    double cl = 0.0, cf = 0.0;
    for (int k = 0; k < sc.microgrid.M; ++k) {
        double el = sc.microgrid.E_l[k] - s.x(mp.chp[k].E_l) - s.x(mp.elec.s[k]);
        for (const auto& ch : mp.chillers) el += s.x(ch[k].E_l);
        cl += sc.microgrid.price[k] * el;
        cf += sc.microgrid.fuel_price[k] * std::round(s.x(mp.chp[k].delta)) * s.x(mp.chp[k].u);
    }
    EXPECT_NEAR(parts.at("C_l"), cl, 1e-9 * std::max(1.0, std::abs(cl)));
    EXPECT_NEAR(parts.at("C_f"), cf, 1e-9 * std::max(1.0, cf));
}

TEST(Startup, SingleTransitionChargedOnce) {
    EXPECT_NEAR(startup_cost_of({0, 1}, 0.7, {false, 0}), 0.7, 1e-12);
}

TEST(Startup, AlwaysOnIsFree) {
    EXPECT_NEAR(startup_cost_of({1, 1, 1, 1, 1, 1}, 2.0, {true, 0}), 0.0, 1e-12);
    EXPECT_NEAR(startup_cost_of({1, 1, 1}, 2.0, {false, 1}), 0.0, 1e-12);
}

TEST(Startup, PeriodicAlternation) {
    const std::vector<int> d{1, 0, 1, 0, 1};
    EXPECT_EQ(count_startups(d, true, 0), 2);
    EXPECT_NEAR(startup_cost_of(d, 1.0, {true, 0}), 2.0, 1e-12);
    EXPECT_NEAR(startup_cost_of(d, 1.0, {false, 0}), 3.0, 1e-12);
}

TEST(Startup, AllPatternsMatchDirectCount) {
    for (int mask = 0; mask < 64; ++mask) {
        std::vector<int> d;
        for (int k = 0; k < 6; ++k) d.push_back((mask >> k) & 1);
        for (bool periodic : {true, false})
            for (int init : {0, 1})
                EXPECT_NEAR(startup_cost_of(d, 0.3, {periodic, init}), 0.3 * count_startups(d, periodic, init), 1e-12)
                    << "mask " << mask;
    }
}

TEST(Tariff, SinglePieceIsLinearPrice) {
    MathProgram p;
    CostBook book;
    const std::vector<double> price{0.1, 0.25, 0.05};
    std::vector<int> el;
    const std::vector<double> e{3.0, -2.0, 7.0};
    for (int k = 0; k < 3; ++k) el.push_back(p.add_var("E", e[k], e[k]));
    const auto t = add_tariff(p, book, Tariff::linear(price), el);
    for (int v : t) EXPECT_EQ(v, -1);
    const auto s = opt::solve_lp(p);
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.objective, 0.1 * 3.0 - 0.25 * 2.0 + 0.05 * 7.0, 1e-12);
}

TEST(Tariff, KinkAtOriginCostsNothing) {
    MathProgram p;
    CostBook book;
    const int e = p.add_var("E", 0.0, 0.0);
    add_tariff(p, book, Tariff::buy_sell({0.3}, {0.1}), {e});
    const auto s = opt::solve_lp(p);
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.objective, 0.0, 1e-12);
}

TEST(Tariff, EpigraphEqualsPointwiseMax) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ue(-50.0, 50.0), up(0.0, 1.0);
    MathProgram p;
    CostBook book;
    Tariff tariff;
    std::vector<int> el;
    std::vector<double> vals;
    for (int k = 0; k < 100; ++k) {
        vals.push_back(ue(rng));
        el.push_back(p.add_var("E", vals.back(), vals.back()));
        const double sell = up(rng), buy = sell + up(rng);
        tariff.slots.push_back({{sell, 0.0}, {buy, 0.0}, {buy + up(rng), -10.0 * up(rng)}});
    }
    const auto t = add_tariff(p, book, tariff, el);
    const auto s = opt::solve_lp(p);
    ASSERT_TRUE(s.optimal());
    double direct = 0.0;
    for (int k = 0; k < 100; ++k) {
        double mx = -inf;
        for (const auto& pc : tariff.slots[k]) mx = std::max(mx, pc.slope * vals[k] + pc.intercept);
        direct += mx;
        EXPECT_LE(std::abs(s.x(t[k]) - mx), 1e-9 * std::max(1.0, std::abs(mx)));
    }
    EXPECT_NEAR(s.objective, direct, 1e-9 * std::abs(direct));
}

TEST(Tariff, NonconvexRejected) {
    MathProgram p;
    CostBook book;
    const int e = p.add_var("E", -1.0, 1.0);
    try {
        add_tariff(p, book, Tariff::buy_sell({0.1}, {0.3}), {e});
        FAIL() << "expected rejection";
    } catch (const ModelError& err) {
        EXPECT_NE(std::string(err.what()).find("nonconvex"), std::string::npos);
    }
}

TEST(Fuel, CostFollowsGateAndFlow) {
    comp::ChpSpec s;
    s.m_l = s.q_l = 90.0;
    s.m_h = s.q_h = 180.0;
    s.u_min = 2.0;
    s.u_max = 10.0;
    auto cost_at = [&](int on, double u) {
        MathProgram p;
        CostBook book;
        auto v = comp::add_chp_slot(p, s, "mt", 1e-3);
        p.vars[v.delta].lo = p.vars[v.delta].hi = on;
        p.vars[v.u].lo = p.vars[v.u].hi = u;
        add_fuel_cost(p, book, {v.w}, {1.0}, 1.0);
        const auto r = opt::solve(p);
        EXPECT_TRUE(r.optimal());
        return r.objective;
    };
    EXPECT_NEAR(cost_at(1, 5.0), 5.0, 1e-12);
    EXPECT_NEAR(cost_at(0, 0.0), 0.0, 1e-12);
    EXPECT_NEAR(cost_at(0, 1.5), 0.0, 1e-12);
    for (double u = 2.5; u <= 10.0; u += 0.5) EXPECT_NEAR(cost_at(1, u), u, 1e-9);
}

TEST(Control, ComfortBoxEmitsTaggedRows) {
    MathProgram p;
    std::vector<int> u;
    for (int k = 0; k < 5; ++k) u.push_back(p.add_var("u", 230.0, 370.0));
    add_box(p, u, std::vector<double>(5, 293.15), std::vector<double>(5, 300.15), "comfort");
    ASSERT_EQ(p.n_rows(), 5);
    for (const auto& r : p.rows) {
        EXPECT_EQ(r.tag, opt::Tag::control);
        EXPECT_EQ(r.lo, 293.15);
        EXPECT_EQ(r.hi, 300.15);
    }
    EXPECT_THROW(add_box(p, {u[0]}, {301.0}, {300.0}, "bad"), ModelError);
}

TEST(Control, PeriodicStorageRow) {
    MathProgram p;
    comp::StorageSpec s;
    s.name = "tank";
    s.S_max = 10.0;
    s.s_min = -1.0;
    s.s_max = 1.0;
    const auto v = comp::add_storage(p, s, 4);
    const auto& r = p.rows.back();
    EXPECT_EQ(r.tag, opt::Tag::control);
    ASSERT_EQ(r.terms.size(), 2u);
    EXPECT_EQ(r.terms[0].var, v.S[4]);
    EXPECT_EQ(r.terms[1].var, v.S[0]);
}

TEST(Control, WallPeriodicityThroughTerminalMap) {
    auto sc = scn::load_scenario(dir + "/single_zone.ini");
    sc.building.objective = Objective::cooling;
    const auto bp = build_building_program(sc.building);
    const auto s = opt::solve(bp.program);
    ASSERT_TRUE(s.optimal()) << s.message;

    // Step the one-slot recursion from T(0) and compare with T(0) after M slots.
    const auto& d = bp.lb.disc;
    const Index n = bp.lb.n, nz = bp.lb.nz, nd = thermal::n_disturbances;
    Vec T(n);
    for (Index i = 0; i < n; ++i) T(i) = s.x(bp.T0[i]);
    const Vec T0 = T;
    auto u_at = [&](int k) {
        Vec u(nz);
        for (Index j = 0; j < nz; ++j) u(j) = s.x(bp.u[k * nz + j]);
        return u;
    };
    for (int k = 0; k < sc.building.M; ++k) {
        const Vec w0 = bp.omega.segment(k * nd, nd), w1 = bp.omega.segment((k + 1) * nd, nd);
        const Vec u0 = u_at(k), u1 = u_at(k + 1);
        // T(k+1) = Gx T + Gu0 u0 + Gu1 (u1 - u0) + ... in ramp form.
        T = d.Gx * T + d.Gu0 * u0 + d.Gu1 * (u1 - u0) + d.Gw0 * w0 + d.Gw1 * (w1 - w0);
    }
    EXPECT_LE((T - T0).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE(std::abs(u_at(sc.building.M)(0) - u_at(0)(0)), 1e-9);
}

TEST(Control, TiedZonesShareSetpoints) {
    const auto sc = scn::load_scenario(dir + "/multi_zone_tied.ini");
    auto b = sc.building;
    b.M = 12;
    b.delta = 3600.0 * 2.0;
    b.occupancy = Mat(b.occupancy.topRows(13));
    b.disturbances = Mat(b.disturbances.topRows(13));
    b.u_lo = Mat(b.u_lo.topRows(13));
    b.u_hi = Mat(b.u_hi.topRows(13));
    b.price.resize(12);
    b.chiller.E_max = 0.9 * b.chiller.pole(b.delta);
    const auto bp = build_building_program(b);
    const auto s = opt::solve(bp.program);
    ASSERT_TRUE(s.optimal()) << s.message;
    for (int k = 0; k <= 12; ++k)
        for (int j = 1; j < 3; ++j) EXPECT_NEAR(s.x(bp.u[k * 3 + j]), s.x(bp.u[k * 3]), 1e-8);
}

TEST(Control, InitialTemperaturePinsFirstSetpoint) {
    auto sc = scn::load_scenario(dir + "/single_zone.ini");
    sc.building.objective = Objective::cooling;
    sc.building.T_z0 = Vec::Constant(1, 295.65);
    const auto bp = build_building_program(sc.building);
    const auto s = opt::solve(bp.program);
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.x(bp.u[0]), 295.65, 1e-9);
    EXPECT_NEAR(s.x(bp.u[sc.building.M]), 295.65, 1e-9);
}
