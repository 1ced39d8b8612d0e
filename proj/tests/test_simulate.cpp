#include "fixtures.hpp"

#include "district/simulate.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace district;
using namespace district::sim;
using std::numbers::pi;

namespace {

// Full coupled matrix with zones as states, people off.
Mat coupled(const thermal::BuildingModel& bm) {
    const Index n = bm.n_states(), nz = bm.n_zones();
    Mat K(n + nz, n + nz);
    K << bm.A, bm.B, bm.C, bm.D;
    for (Index j = 0; j < nz; ++j) K.row(n + j) /= bm.zones[j].capacity;
    return K;
}

double slowest_rate(const thermal::BuildingModel& bm) {
    Eigen::EigenSolver<Mat> es(coupled(bm));
    return es.eigenvalues().real().cwiseAbs().minCoeff();
}

Inputs constant_inputs(const Vec& d, double span, Index nz, double occ = 0.0) {
    Inputs in;
    in.delta = span;
    in.disturbances = Mat(2, 5);
    in.disturbances.row(0) = d.transpose();
    in.disturbances.row(1) = d.transpose();
    in.occupancy = Mat::Constant(2, nz, occ);
    return in;
}

Vec weather(double tout, double tgnd, double qs, double ql) {
    Vec d(5);
    d << tout, tgnd, qs, ql, 1.0;
    return d;
}

// Hot afternoon, cold night, hourly knots.
Inputs swinging_day(Index nz) {
    Inputs in;
    in.delta = 3600.0;
    in.disturbances.resize(25, 5);
    in.occupancy = Mat::Zero(25, nz);
    for (int k = 0; k <= 24; ++k) {
        const double tout = 290.0 + 22.0 * std::sin(2.0 * pi * (k - 9) / 24.0);
        const double qs = (k > 6 && k < 20) ? 650.0 * std::sin(pi * (k - 6) / 14.0) : 0.0;
        in.disturbances.row(k) << tout, 288.0, qs, 300.0, 1.0;
        if (k >= 8 && k <= 18) in.occupancy.row(k).setConstant(12.0);
    }
    return in;
}

}  // namespace

TEST(SteadyState, MatchesIndependentSolve) {
    const auto bm = fixtures::three_slice_wall();
    const Vec d = weather(303.0, 288.0, 400.0, 320.0);
    const Vec occ = Vec::Constant(1, 10.0);
    const Vec x = steady_state(bm, d, occ);

    // Gauss-Seidel on the same balance, slow but unrelated to the library solve.
    const Index n = bm.n_states();
    const auto pc = thermal::people_heat_coeffs(bm.zones[0].comfort_temp);
    const auto& z = bm.zones[0];
    Mat K(n + 1, n + 1);
    K << bm.A, bm.B, bm.C, bm.D;
    K(n, n) += occ(0) * pc.p1;
    Vec r(n + 1);
    r.head(n) = -bm.W * d;
    r(n) = -(occ(0) * pc.p0 + z.solar_aperture * d(thermal::d_qs) + z.base_load + z.occupancy_load);
    Vec g = Vec::Constant(n + 1, 295.0);
    for (int it = 0; it < 200000; ++it) {
        for (Index i = 0; i <= n; ++i) g(i) = (r(i) - K.row(i).dot(g) + K(i, i) * g(i)) / K(i, i);
        if ((K * g - r).cwiseAbs().maxCoeff() < 1e-11) break;
    }
    EXPECT_LT((x - g).cwiseAbs().maxCoeff() / g.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SteadyState, FreeFloatConvergesToIt) {
    const auto bm = fixtures::three_slice_wall();
    const Vec d = weather(280.0, 285.0, 200.0, 290.0);
    const Vec xs = steady_state(bm, d, Vec::Zero(1));
    const double span = 40.0 / slowest_rate(bm);
    SimulationConfig cfg;
    cfg.step = 300.0;
    const auto tr = simulate_free_float(bm, constant_inputs(d, span, 1), cfg, Vec::Constant(1, 295.0));
    Vec end(bm.n_states() + 1);
    end << tr.T.bottomRows(1).transpose(), tr.Tz(tr.Tz.rows() - 1, 0);
    EXPECT_LT((end - xs).cwiseAbs().maxCoeff() / xs.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SteadyState, IsAnEquilibrium) {
    const auto bm = fixtures::three_slice_wall();
    const Vec d = weather(300.0, 288.0, 0.0, 310.0);
    const Vec xs = steady_state(bm, d, Vec::Zero(1));
    SimulationConfig cfg;
    cfg.step = 600.0;
    const auto tr = simulate_free_float(bm, constant_inputs(d, 86400.0, 1), cfg, xs.tail(1), Vec(xs.head(bm.n_states())));
    EXPECT_LT((tr.Tz.col(0).array() - xs(bm.n_states())).abs().maxCoeff(), 1e-9);
    EXPECT_LT((tr.T.bottomRows(1).transpose() - xs.head(bm.n_states())).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FreeFloat, DoublingCapacityHalvesRates) {
    auto slow = [](double f) {
        auto w = fixtures::three_slice_wall();
        for (auto& s : w.walls[0].slices) s.density *= f;
        auto zones = w.zones;
        zones[0].capacity *= f;
        return thermal::assemble_building(w.walls, zones);
    };
    Eigen::EigenSolver<Mat> a(coupled(slow(1.0))), b(coupled(slow(2.0)));
    std::vector<double> ra, rb;
    for (Index i = 0; i < a.eigenvalues().size(); ++i) {
        ra.push_back(a.eigenvalues()(i).real());
        rb.push_back(b.eigenvalues()(i).real());
    }
    std::sort(ra.begin(), ra.end());
    std::sort(rb.begin(), rb.end());
    for (std::size_t i = 0; i < ra.size(); ++i) EXPECT_NEAR(rb[i], 0.5 * ra[i], 1e-12 * std::abs(ra[i]));
}

TEST(FreeFloat, ShiftInvariantWithoutRadiation) {
    const auto bm = fixtures::three_slice_wall(0.0);
    auto in = swinging_day(1);
    in.occupancy.setZero();
    auto hot = in;
    hot.disturbances.col(0).array() += 10.0;
    hot.disturbances.col(1).array() += 10.0;
    SimulationConfig cfg;
    const Vec t0 = Vec::Constant(bm.n_states(), 293.0);
    const auto a = simulate_free_float(bm, in, cfg, Vec::Constant(1, 294.0), t0);
    const auto b = simulate_free_float(bm, hot, cfg, Vec::Constant(1, 304.0), Vec(t0.array() + 10.0));
    EXPECT_LT(((b.Tz.array() - a.Tz.array()) - 10.0).abs().maxCoeff(), 1e-8);
    EXPECT_LT(((b.T.array() - a.T.array()) - 10.0).abs().maxCoeff(), 1e-8);
}

TEST(FreeFloat, EnergyCloses) {
    const auto bm = fixtures::three_slice_wall();
    SimulationConfig cfg;
    const auto tr = simulate_free_float(bm, swinging_day(1), cfg, Vec::Constant(1, 296.0));
    EXPECT_LT(tr.energy.closure(), 1e-6);
    EXPECT_EQ(tr.energy.heating(0), 0.0);
    EXPECT_EQ(tr.energy.cooling(0), 0.0);
}

TEST(Thermostat, IdleInsideBand) {
    auto bm = fixtures::three_slice_wall();
    bm.zones[0].base_load = 0.0;
    const Vec d = weather(299.0, 297.0, 0.0, 450.0);
    const Vec xs = steady_state(bm, d, Vec::Zero(1));
    ASSERT_GT(xs(bm.n_states()), 293.15);
    ASSERT_LT(xs(bm.n_states()), 300.15);
    SimulationConfig cfg;
    const auto tr = simulate_thermostat(bm, constant_inputs(d, 86400.0, 1), cfg, xs.tail(1), Vec(xs.head(bm.n_states())));
    EXPECT_EQ(tr.heating.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(tr.cooling.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Thermostat, SteadyCoolingEqualsConductionLoad) {
    const auto bm = fixtures::three_slice_wall();
    const Vec d = weather(313.0, 290.0, 0.0, 400.0);
    const Thermostat th;
    const Index n = bm.n_states();
    // Walls at rest against a zone held at the cooling threshold.
    const Vec Tw = bm.A.fullPivLu().solve(-(bm.B * th.cool_on_above + bm.W * d));
    const double load = (bm.C * Tw)(0) + bm.D(0, 0) * th.cool_on_above + bm.zones[0].base_load;
    ASSERT_GT(load, 0.0);
    SimulationConfig cfg;
    cfg.step = 120.0;
    cfg.thermostat = th;
    const auto tr = simulate(bm, constant_inputs(d, 40.0 / slowest_rate(bm), 1), cfg, Vec::Constant(1, 298.0));
    EXPECT_NEAR(tr.cooling.bottomRows(1)(0, 0), load, 1e-5 * load);
    EXPECT_NEAR(tr.Tz.bottomRows(1)(0, 0), th.cool_on_above, 1e-6);
    EXPECT_EQ(tr.heating.bottomRows(1)(0, 0), 0.0);
    (void)n;
}

TEST(Thermostat, HoldsBandAfterTransient) {
    auto bm = fixtures::three_slice_wall();
    bm.zones[0].base_load = 0.0;
    SimulationConfig cfg;
    cfg.thermostat = Thermostat{};
    auto in = swinging_day(1);
    in.disturbances.col(0).array() -= 6.0;
    const auto tr = simulate(bm, in, cfg, Vec::Constant(1, 293.5), Vec(Vec::Constant(bm.n_states(), 280.0)));
    for (std::size_t i = 0; i < tr.time.size(); ++i) {
        if (tr.time[i] < 7200.0) continue;
        EXPECT_LE(tr.Tz(i, 0), 300.15 + 0.5) << "t = " << tr.time[i];
        EXPECT_GE(tr.Tz(i, 0), 293.15 - 0.5) << "t = " << tr.time[i];
    }
    EXPECT_GT(tr.energy.heating(0), 0.0);
    EXPECT_GT(tr.energy.cooling(0), 0.0);
}

TEST(Thermostat, NeverHeatsAndCoolsTogether) {
    const auto bm = fixtures::three_slice_wall();
    SimulationConfig cfg;
    cfg.step = 30.0;
    cfg.thermostat = Thermostat{};
    cfg.thermostat->heat_on_below = 295.0;
    cfg.thermostat->cool_on_above = 295.5;
    const auto tr = simulate(bm, swinging_day(1), cfg, Vec::Constant(1, 290.0));
    EXPECT_EQ(tr.co_applied, 0.0);
    EXPECT_EQ((tr.heating.array() * tr.cooling.array()).abs().maxCoeff(), 0.0);
}

TEST(Thermostat, EnergyCloses) {
    const auto bm = fixtures::three_slice_wall();
    SimulationConfig cfg;
    cfg.thermostat = Thermostat{};
    cfg.thermostat->cool_max = 1500.0;
    const auto tr = simulate(bm, swinging_day(1), cfg, Vec::Constant(1, 296.0));
    EXPECT_LT(tr.energy.closure(), 1e-6);
}

TEST(Thermostat, CapacityLimitRespected) {
    const auto bm = fixtures::three_slice_wall();
    SimulationConfig cfg;
    cfg.thermostat = Thermostat{};
    cfg.thermostat->cool_max = 400.0;
    cfg.thermostat->heat_max = 300.0;
    const auto tr = simulate(bm, swinging_day(1), cfg, Vec::Constant(1, 296.0));
    EXPECT_LE(tr.cooling.maxCoeff(), 400.0);
    EXPECT_LE(tr.heating.maxCoeff(), 300.0);
}

TEST(Thermostat, RejectsInvertedBand) {
    const auto bm = fixtures::three_slice_wall();
    SimulationConfig cfg;
    cfg.thermostat = Thermostat{};
    cfg.thermostat->heat_on_below = 301.0;
    EXPECT_THROW(simulate(bm, swinging_day(1), cfg, Vec::Constant(1, 296.0)), ModelError);
}

TEST(Stats, RecomputableFromSeries) {
    const auto bm = fixtures::three_slice_wall();
    SimulationConfig cfg;
    cfg.step = 90.0;
    cfg.thermostat = Thermostat{};
    const auto tr = simulate(bm, swinging_day(1), cfg, Vec::Constant(1, 296.0));
    const auto& s = tr.stats.at(0);
    EXPECT_DOUBLE_EQ(s.max, tr.Tz.col(0).maxCoeff());
    EXPECT_DOUBLE_EQ(s.min, tr.Tz.col(0).minCoeff());
    double area = 0.0, total_cool = 0.0;
    for (std::size_t i = 1; i < tr.time.size(); ++i) {
        const double h = tr.time[i] - tr.time[i - 1];
        area += 0.5 * h * (tr.Tz(i, 0) + tr.Tz(i - 1, 0));
        total_cool += 0.5 * h * (tr.cooling(i, 0) + tr.cooling(i - 1, 0));
    }
    EXPECT_NEAR(s.mean, area / 86400.0, 1e-9);
    EXPECT_GT(s.peak_cooling, total_cool / 24.0);
    EXPECT_LE(s.peak_cooling, total_cool);
    EXPECT_NEAR(total_cool, tr.energy.cooling(0), 1e-3 * tr.energy.cooling(0));
}

TEST(Stepping, HalvesStepOnDivergence) {
    const auto bm = fixtures::three_slice_wall();
    SimulationConfig cfg;
    cfg.step = 7200.0;
    cfg.max_halvings = 6;
    const auto tr = simulate_free_float(bm, swinging_day(1), cfg, Vec::Constant(1, 296.0));
    EXPECT_LT(tr.step, cfg.step);
    EXPECT_LT(tr.energy.closure(), 1e-6);
    cfg.max_halvings = 0;
    EXPECT_THROW(simulate_free_float(bm, swinging_day(1), cfg, Vec::Constant(1, 296.0)), SimulationError);
}

TEST(Stepping, RejectsBadConfiguration) {
    const auto bm = fixtures::three_slice_wall();
    SimulationConfig cfg;
    cfg.step = 0.0;
    EXPECT_THROW(simulate_free_float(bm, swinging_day(1), cfg, Vec::Constant(1, 296.0)), ModelError);
    cfg.step = 60.0;
    cfg.duration = 2.0 * 86400.0;
    EXPECT_THROW(simulate_free_float(bm, swinging_day(1), cfg, Vec::Constant(1, 296.0)), ModelError);
}

TEST(Crosscheck, PiecewiseLinearInputsAgree) {
    const auto bm = fixtures::three_slice_wall();
    std::mt19937 rng(7);
    const int M = 24;
    const Mat u = fixtures::random_series(rng, M + 1, {{293.0, 299.0}});
    const Mat d = fixtures::random_weather(rng, M + 1);
    const Mat occ = fixtures::random_series(rng, M + 1, {{0.0, 20.0}});
    const auto rep = crosscheck_discretization(bm, 600.0, u, d, occ, Vec::Constant(bm.n_states(), 294.0));
    EXPECT_LT(rep.state, 1e-6);
    EXPECT_LT(rep.output, 1e-6);
    EXPECT_EQ(rep.state_vs_exact, -1.0);
}

TEST(Crosscheck, ZeroInputStaysZero) {
    const auto bm = fixtures::three_slice_wall(0.0);
    auto zones = bm.zones;
    zones[0].base_load = zones[0].occupancy_load = zones[0].solar_aperture = 0.0;
    const auto quiet = thermal::assemble_building(bm.walls, zones);
    const int M = 6;
    const auto rep = crosscheck_discretization(quiet, 600.0, Mat::Zero(M + 1, 1), Mat::Zero(M + 1, 5),
                                               Mat::Zero(M + 1, 1), Vec::Zero(quiet.n_states()), 50);
    EXPECT_EQ(rep.state, 0.0);
    EXPECT_EQ(rep.output, 0.0);
    EXPECT_EQ(rep.energy, 0.0);
}

TEST(Crosscheck, SeparatesSamplingErrorFromDiscretization) {
    const auto bm = fixtures::three_slice_wall();
    const int M = 24;
    const double delta = 3600.0;
    auto exact = [](double t) {
        Vec d(5);
        d << 295.0 + 8.0 * std::sin(2.0 * pi * t / 86400.0 * 3.0), 288.0, 0.0, 300.0, 1.0;
        return d;
    };
    Mat d(M + 1, 5);
    for (int k = 0; k <= M; ++k) d.row(k) = exact(k * delta).transpose();
    const auto rep = crosscheck_discretization(bm, delta, Mat::Constant(M + 1, 1, 296.0), d, Mat::Zero(M + 1, 1),
                                               Vec::Constant(bm.n_states(), 295.0), 400, exact);
    EXPECT_LT(rep.state, 1e-6);
    EXPECT_GT(rep.state_vs_exact, 100.0 * rep.state);
}
