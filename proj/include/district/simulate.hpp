#pragma once

#include "district/discretize.hpp"

#include <functional>
#include <optional>

namespace district::sim {

struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two saturated PI loops with conditional-integration antiwindup. Zero gains select defaults.
struct Thermostat {
    double heat_on_below = 293.15;
    double cool_on_above = 300.15;
    double kp = 0.0;  // W/K, default C_z / 300 s
    double ki = 0.0;  // W/(K s), default kp / 600 s
    double heat_max = inf;
    double cool_max = inf;
};

struct SimulationConfig {
    double step = 60.0;
    double duration = 0.0;  // 0: full input span
    std::optional<Thermostat> thermostat;
    int max_halvings = 4;
    double divergence_limit = 1e4;  // K
};

/// Knot series, linear in between; row k is time k * delta.
struct Inputs {
    double delta = 3600.0;
    Mat disturbances;  // K x 5
    Mat occupancy;     // K x nz

    double span() const { return delta * static_cast<double>(disturbances.rows() - 1); }

    Vec at(const Mat& s, double t) const {
        const Index K = s.rows();
        double f = t / delta;
        Index k = static_cast<Index>(std::floor(f));
        if (k >= K - 1) return s.row(K - 1).transpose();
        if (k < 0) return s.row(0).transpose();
        f -= static_cast<double>(k);
        return ((1.0 - f) * s.row(k) + f * s.row(k + 1)).transpose();
    }
};

struct ZoneStats {
    double max = -inf, min = inf, mean = 0.0;
    double peak_heating = 0.0, peak_cooling = 0.0;  // largest clock-hour energy, J
};

/// Per-zone integrals over the run, J.
struct EnergyBook {
    Vec stored, walls, people, internal, heating, cooling;

    /// |stored - net inflow| over the gross flow, worst zone.
    double closure() const {
        double worst = 0.0;
        for (Index j = 0; j < stored.size(); ++j) {
            const double net = walls(j) + people(j) + internal(j) + heating(j) - cooling(j);
            const double gross = std::abs(walls(j)) + std::abs(people(j)) + std::abs(internal(j)) + heating(j) +
                                 cooling(j) + std::abs(stored(j));
            worst = std::max(worst, std::abs(stored(j) - net) / std::max(gross, 1e-300));
        }
        return worst;
    }
};

struct Trajectory {
    std::vector<double> time;
    Mat T;        // rows: time
    Mat Tz;       // rows: time
    Mat Q;        // wall heat flow into each zone, W
    Mat heating;  // W
    Mat cooling;  // W
    std::vector<ZoneStats> stats;
    EnergyBook energy;
    double step = 0.0;
    bool thermostat = false;
    double co_applied = 0.0;  // largest min(heating, cooling) seen
};

namespace detail {

struct Plant {
    const thermal::BuildingModel& bm;
    const Inputs& in;
    std::vector<thermal::PeopleCoeffs> people;
    Vec cz;
    std::optional<Thermostat> th;
    Index n, nz;

    Plant(const thermal::BuildingModel& b, const Inputs& i, const std::optional<Thermostat>& t)
        : bm(b), in(i), th(t), n(b.n_states()), nz(b.n_zones()) {
        cz = bm.zone_capacities();
        for (const auto& z : bm.zones) people.push_back(thermal::people_heat_coeffs(z.comfort_temp));
        if (th) {
            require(th->heat_on_below < th->cool_on_above, "thermostat: heating threshold must be below cooling threshold");
            require(th->heat_max > 0.0 && th->cool_max > 0.0, "thermostat: capacity limits must be positive");
        }
    }

    // Layout: T (n), Tz, I_heat, I_cool, then accumulators walls, people, internal, heating, cooling.
    Index size() const { return n + 8 * nz; }

    double kp(Index j) const { return th->kp > 0.0 ? th->kp : cz(j) / 300.0; }
    double ki(Index j) const { return th->ki > 0.0 ? th->ki : kp(j) / 600.0; }

    struct Flows {
        Vec qw, qp, qi, qh, qc;
    };

    Flows flows(double t, const Vec& x) const {
        const Vec d = in.at(in.disturbances, t);
        const Vec occ = in.at(in.occupancy, t);
        const double k = t / in.delta;
        const Index kk = std::min<Index>(static_cast<Index>(std::floor(k)), in.occupancy.rows() - 2);
        const double f = std::clamp(k - static_cast<double>(kk), 0.0, 1.0);
        const Vec tz = x.segment(n, nz);
        Flows fl{bm.C * x.head(n) + bm.D * tz, Vec(nz), Vec(nz), Vec::Zero(nz), Vec::Zero(nz)};
        for (Index j = 0; j < nz; ++j) {
            const auto& z = bm.zones[j];
            fl.qp(j) = occ(j) * (people[j].p1 * tz(j) + people[j].p0);
            const double on = (1.0 - f) * (in.occupancy(kk, j) > 0.0 ? 1.0 : 0.0) +
                              f * (in.occupancy(kk + 1, j) > 0.0 ? 1.0 : 0.0);
            fl.qi(j) = z.solar_aperture * d(thermal::d_qs) + z.base_load + z.occupancy_load * on;
            if (th) {
                const double vh = kp(j) * (th->heat_on_below - tz(j)) + ki(j) * x(n + nz + j);
                const double vc = kp(j) * (tz(j) - th->cool_on_above) + ki(j) * x(n + 2 * nz + j);
                fl.qh(j) = std::clamp(vh, 0.0, th->heat_max);
                fl.qc(j) = fl.qh(j) > 0.0 ? 0.0 : std::clamp(vc, 0.0, th->cool_max);
            }
        }
        return fl;
    }

    Vec rhs(double t, const Vec& x) const {
        const Vec d = in.at(in.disturbances, t);
        const Vec tz = x.segment(n, nz);
        Vec dx = Vec::Zero(size());
        dx.head(n) = bm.A * x.head(n) + bm.B * tz + bm.W * d;
        const Flows fl = flows(t, x);
        for (Index j = 0; j < nz; ++j) {
            dx(n + j) = (fl.qw(j) + fl.qp(j) + fl.qi(j) + fl.qh(j) - fl.qc(j)) / cz(j);
            if (th) {
                const double eh = th->heat_on_below - tz(j), ec = tz(j) - th->cool_on_above;
                const double vh = kp(j) * eh + ki(j) * x(n + nz + j);
                const double vc = kp(j) * ec + ki(j) * x(n + 2 * nz + j);
                const bool hold_h = (vh >= th->heat_max && eh > 0.0) || (vh <= 0.0 && eh < 0.0);
                const bool hold_c = (vc >= th->cool_max && ec > 0.0) || (vc <= 0.0 && ec < 0.0) || fl.qh(j) > 0.0;
                dx(n + nz + j) = hold_h ? 0.0 : eh;
                dx(n + 2 * nz + j) = hold_c ? 0.0 : ec;
            }
        }
        dx.segment(n + 3 * nz, nz) = fl.qw;
        dx.segment(n + 4 * nz, nz) = fl.qp;
        dx.segment(n + 5 * nz, nz) = fl.qi;
        dx.segment(n + 6 * nz, nz) = fl.qh;
        dx.segment(n + 7 * nz, nz) = fl.qc;
        return dx;
    }
};

template <class F>
Vec rk4_step(const F& f, double t, const Vec& x, double h) {
    const Vec k1 = f(t, x);
    const Vec k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const Vec k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const Vec k4 = f(t + h, x + h * k3);
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline std::vector<ZoneStats> zone_stats(const Trajectory& tr) {
    std::vector<ZoneStats> out(tr.Tz.cols());
    const std::size_t N = tr.time.size();
    for (Index j = 0; j < tr.Tz.cols(); ++j) {
        auto& s = out[j];
        double area = 0.0;
        std::map<long, double> heat, cool;
        for (std::size_t i = 0; i < N; ++i) {
            s.max = std::max(s.max, tr.Tz(i, j));
            s.min = std::min(s.min, tr.Tz(i, j));
            if (i == 0) continue;
            const double h = tr.time[i] - tr.time[i - 1];
            area += 0.5 * h * (tr.Tz(i, j) + tr.Tz(i - 1, j));
            const long hour = static_cast<long>(std::floor(0.5 * (tr.time[i] + tr.time[i - 1]) / 3600.0));
            heat[hour] += 0.5 * h * (tr.heating(i, j) + tr.heating(i - 1, j));
            cool[hour] += 0.5 * h * (tr.cooling(i, j) + tr.cooling(i - 1, j));
        }
        const double span = tr.time.back() - tr.time.front();
        s.mean = span > 0.0 ? area / span : tr.Tz(0, j);
        for (const auto& [hr, e] : heat) s.peak_heating = std::max(s.peak_heating, e);
        for (const auto& [hr, e] : cool) s.peak_cooling = std::max(s.peak_cooling, e);
    }
    return out;
}

inline Trajectory run(const thermal::BuildingModel& bm, const Inputs& in, const SimulationConfig& cfg, const Vec& Tz0,
                      const Vec& T0, double step) {
    Plant pl(bm, in, cfg.thermostat);
    const double duration = cfg.duration > 0.0 ? cfg.duration : in.span();
    const long steps = static_cast<long>(std::ceil(duration / step - 1e-9));
    const Index n = pl.n, nz = pl.nz;
    Vec x = Vec::Zero(pl.size());
    x.head(n) = T0;
    x.segment(n, nz) = Tz0;

    Trajectory tr;
    tr.step = step;
    tr.thermostat = cfg.thermostat.has_value();
    tr.T.resize(steps + 1, n);
    tr.Tz.resize(steps + 1, nz);
    tr.Q.resize(steps + 1, nz);
    tr.heating.resize(steps + 1, nz);
    tr.cooling.resize(steps + 1, nz);
    auto record = [&](long i, double t) {
        tr.time.push_back(t);
        tr.T.row(i) = x.head(n).transpose();
        tr.Tz.row(i) = x.segment(n, nz).transpose();
        const auto fl = pl.flows(t, x);
        tr.Q.row(i) = fl.qw.transpose();
        tr.heating.row(i) = fl.qh.transpose();
        tr.cooling.row(i) = fl.qc.transpose();
        for (Index j = 0; j < nz; ++j) tr.co_applied = std::max(tr.co_applied, std::min(fl.qh(j), fl.qc(j)));
    };
    auto f = [&](double t, const Vec& s) { return pl.rhs(t, s); };

    double t = 0.0;
    record(0, t);
    for (long i = 1; i <= steps; ++i) {
        const double h = std::min(step, duration - t);
        x = rk4_step(f, t, x, h);
        t = i == steps ? duration : t + h;
        if (!x.allFinite() || x.segment(0, n + nz).cwiseAbs().maxCoeff() > cfg.divergence_limit)
            throw SimulationError("simulation diverged at t = " + std::to_string(t) + " s");
        record(i, t);
    }
    tr.energy.stored = (x.segment(n, nz) - Tz0).cwiseProduct(pl.cz);
    tr.energy.walls = x.segment(n + 3 * nz, nz);
    tr.energy.people = x.segment(n + 4 * nz, nz);
    tr.energy.internal = x.segment(n + 5 * nz, nz);
    tr.energy.heating = x.segment(n + 6 * nz, nz);
    tr.energy.cooling = x.segment(n + 7 * nz, nz);
    tr.stats = zone_stats(tr);
    return tr;
}

}  // namespace detail

inline void check_inputs(const thermal::BuildingModel& bm, const Inputs& in, const SimulationConfig& cfg) {
    require(cfg.step > 0.0, "simulation: step must be positive");
    require(in.delta > 0.0, "simulation: knot spacing must be positive");
    require(in.disturbances.rows() >= 2 && in.disturbances.cols() == thermal::n_disturbances,
            "simulation: disturbances need at least two knots and 5 columns");
    require(in.occupancy.rows() == in.disturbances.rows() && in.occupancy.cols() == bm.n_zones(),
            "simulation: occupancy must match the disturbance knots and zone count");
    require(cfg.duration <= in.span() * (1.0 + 1e-12), "simulation: duration exceeds the input series");
    for (const auto& z : bm.zones) require(z.capacity > 0.0, "simulation: zone '" + z.name + "' needs a heat capacity");
}

/// RK4 of walls and zones; a diverging run is retried with half the step.
inline Trajectory simulate(const thermal::BuildingModel& bm, const Inputs& in, const SimulationConfig& cfg,
                           const Vec& Tz0, std::optional<Vec> T0 = std::nullopt) {
    check_inputs(bm, in, cfg);
    require(Tz0.size() == bm.n_zones(), "simulation: one initial temperature per zone");
    const Vec t0 = T0 ? *T0 : bm.mean_temps;
    require(t0.size() == bm.n_states(), "simulation: initial wall state size mismatch");
    double step = cfg.step;
    for (int attempt = 0;; ++attempt) {
        try {
            return detail::run(bm, in, cfg, Tz0, t0, step);
        } catch (const SimulationError& e) {
            if (attempt >= cfg.max_halvings)
                throw SimulationError(std::string(e.what()) + " after " + std::to_string(attempt) + " step halvings");
            step *= 0.5;
        }
    }
}

inline Trajectory simulate_free_float(const thermal::BuildingModel& bm, const Inputs& in, SimulationConfig cfg,
                                      const Vec& Tz0, std::optional<Vec> T0 = std::nullopt) {
    cfg.thermostat.reset();
    return simulate(bm, in, cfg, Tz0, std::move(T0));
}

inline Trajectory simulate_thermostat(const thermal::BuildingModel& bm, const Inputs& in, SimulationConfig cfg,
                                      const Vec& Tz0, std::optional<Vec> T0 = std::nullopt) {
    if (!cfg.thermostat) cfg.thermostat = Thermostat{};
    return simulate(bm, in, cfg, Tz0, std::move(T0));
}

/// Equilibrium of the free-floating building under constant disturbances and occupancy.
inline Vec steady_state(const thermal::BuildingModel& bm, const Vec& d, const Vec& occupancy) {
    const Index n = bm.n_states(), nz = bm.n_zones();
    Mat K = Mat::Zero(n + nz, n + nz);
    Vec r = Vec::Zero(n + nz);
    K.topLeftCorner(n, n) = bm.A;
    K.topRightCorner(n, nz) = bm.B;
    r.head(n) = -bm.W * d;
    K.bottomLeftCorner(nz, n) = bm.C;
    K.bottomRightCorner(nz, nz) = bm.D;
    for (Index j = 0; j < nz; ++j) {
        const auto& z = bm.zones[j];
        const auto pc = thermal::people_heat_coeffs(z.comfort_temp);
        K(n + j, n + j) += occupancy(j) * pc.p1;
        r(n + j) = -(occupancy(j) * pc.p0 + z.solar_aperture * d(thermal::d_qs) + z.base_load +
                     (occupancy(j) > 0.0 ? z.occupancy_load : 0.0));
    }
    return K.fullPivLu().solve(r);
}

struct CrosscheckReport {
    double state = 0.0;   // max |T_discrete - T_continuous| / max |T_continuous|
    double output = 0.0;  // same for the wall heat flow C T + D u
    double energy = 0.0;  // slot cooling energy, trapezoid vs integrated
    double state_vs_exact = -1.0;  // against the unsampled disturbance, when given
    int substeps = 0;
};

/**
 * Discrete lifted model against RK4 of the wall ODE with the same
 * piecewise-linear u and d. u is (M+1) x nz, d is (M+1) x 5.
 */
inline CrosscheckReport crosscheck_discretization(const thermal::BuildingModel& bm, double delta, const Mat& u,
                                                  const Mat& d, const Mat& occupancy, const Vec& T0,
                                                  int substeps = 1000,
                                                  const std::function<Vec(double)>& d_exact = {}) {
    const int M = static_cast<int>(u.rows()) - 1;
    require(M >= 1 && d.rows() == M + 1 && occupancy.rows() == M + 1, "crosscheck: series need M+1 knots");
    require(substeps >= 1, "crosscheck: need at least one substep");
    const Index n = bm.n_states(), nz = bm.n_zones();
    const auto lb = discrete::build_lifted(bm, delta, M, occupancy);
    const Vec uf = discrete::flatten(u), wf = discrete::flatten(d);
    const Index ny = bm.C.rows();
    const Vec y_disc = lb.lifted.F * T0 + lb.lifted.G * uf + lb.lifted.H * wf;
    const Vec e_disc = lb.Ac * T0 + lb.Bc * uf + lb.Wc * wf + lb.b;

    Inputs in{delta, d, occupancy};
    Inputs uin{delta, u, occupancy};
    auto integrate = [&](const std::function<Vec(double)>& dist, Mat& states, Mat& outs, Vec& energy) {
        // State: T, then accumulated wall heat flow and people heat per zone.
        auto f = [&](double t, const Vec& x) {
            const Vec ut = uin.at(u, t);
            Vec dx(n + 2 * nz);
            dx.head(n) = bm.A * x.head(n) + bm.B * ut + bm.W * dist(t);
            dx.segment(n, nz) = bm.C * x.head(n) + bm.D * ut;
            const Vec occ = in.at(occupancy, t);
            for (Index j = 0; j < nz; ++j) {
                const auto pc = thermal::people_heat_coeffs(bm.zones[j].comfort_temp);
                dx(n + nz + j) = occ(j) * (pc.p1 * ut(j) + pc.p0);
            }
            return dx;
        };
        Vec x = Vec::Zero(n + 2 * nz);
        x.head(n) = T0;
        states.resize(M + 1, n);
        outs.resize(M + 1, ny);
        energy.resize(M * nz);
        states.row(0) = T0.transpose();
        outs.row(0) = (bm.C * T0 + bm.D * u.row(0).transpose()).transpose();
        const double h = delta / substeps;
        for (int k = 0; k < M; ++k) {
            const Vec acc0 = x.tail(2 * nz);
            for (int s = 0; s < substeps; ++s) x = detail::rk4_step(f, k * delta + s * h, x, h);
            states.row(k + 1) = x.head(n).transpose();
            outs.row(k + 1) = (bm.C * x.head(n) + bm.D * u.row(k + 1).transpose()).transpose();
            const Vec acc = x.tail(2 * nz) - acc0;
            for (Index j = 0; j < nz; ++j) {
                const auto& z = bm.zones[j];
                const double qs = 0.5 * delta * (d(k, thermal::d_qs) + d(k + 1, thermal::d_qs));
                const double on = 0.5 * ((occupancy(k, j) > 0.0) + (occupancy(k + 1, j) > 0.0));
                energy(k * nz + j) = acc(j) + acc(nz + j) + z.solar_aperture * qs + delta * z.base_load +
                                     delta * z.occupancy_load * on - z.capacity * (u(k + 1, j) - u(k, j));
            }
        }
    };

    Mat states, outs;
    Vec energy;
    integrate([&](double t) { return in.at(d, t); }, states, outs, energy);

    CrosscheckReport rep;
    rep.substeps = substeps;
    double ts = 0.0, ys = 0.0, es = 0.0;
    const auto& disc = lb.disc;
    Vec T = T0;
    for (int k = 0; k <= M; ++k) {
        if (k > 0) {
            const Vec u0 = u.row(k - 1).transpose(), u1 = u.row(k).transpose();
            const Vec w0 = d.row(k - 1).transpose(), w1 = d.row(k).transpose();
            T = disc.Gx * T + disc.Gu0 * u0 + disc.Gu1 * (u1 - u0) + disc.Gw0 * w0 + disc.Gw1 * (w1 - w0);
        }
        rep.state = std::max(rep.state, (T - states.row(k).transpose()).cwiseAbs().maxCoeff());
        ts = std::max(ts, states.row(k).cwiseAbs().maxCoeff());
        rep.output = std::max(rep.output, (y_disc.segment(k * ny, ny) - outs.row(k).transpose()).cwiseAbs().maxCoeff());
        ys = std::max(ys, outs.row(k).cwiseAbs().maxCoeff());
    }
    rep.energy = (e_disc - energy).cwiseAbs().maxCoeff();
    es = energy.cwiseAbs().maxCoeff();
    rep.state /= std::max(ts, 1e-300);
    rep.output /= std::max(ys, 1e-300);
    rep.energy /= std::max(es, 1e-300);
    if (ts == 0.0) rep.state = 0.0;
    if (ys == 0.0) rep.output = 0.0;
    if (es == 0.0) rep.energy = 0.0;

    if (d_exact) {
        Mat s2, o2;
        Vec e2;
        integrate(d_exact, s2, o2, e2);
        double err = 0.0;
        T = T0;
        for (int k = 0; k <= M; ++k) {
            if (k > 0) {
                const Vec u0 = u.row(k - 1).transpose(), u1 = u.row(k).transpose();
                const Vec w0 = d.row(k - 1).transpose(), w1 = d.row(k).transpose();
                T = disc.Gx * T + disc.Gu0 * u0 + disc.Gu1 * (u1 - u0) + disc.Gw0 * w0 + disc.Gw1 * (w1 - w0);
            }
            err = std::max(err, (T - s2.row(k).transpose()).cwiseAbs().maxCoeff());
        }
        rep.state_vs_exact = err / std::max(s2.cwiseAbs().maxCoeff(), 1e-300);
    }
    return rep;
}

}  // namespace district::sim
