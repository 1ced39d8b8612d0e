#pragma once

#include "district/common.hpp"
#include "district/program.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <functional>
#include <sstream>

namespace district::comp {

enum class ChillerModel { biquadratic, pwa, biquadratic_onoff, pwa_onoff };

inline bool has_onoff(ChillerModel m) { return m == ChillerModel::biquadratic_onoff || m == ChillerModel::pwa_onoff; }
inline bool is_pwa(ChillerModel m) { return m == ChillerModel::pwa || m == ChillerModel::pwa_onoff; }

/**
 * Ng-Gordon chiller. a1 [W/K], a2 [W], a3 [K/W], a4 [-]; `power_unit`
 * rescales coefficients quoted per kW (1000) instead of per W (1).
 * Energies are J per slot.
 */
struct ChillerSpec {
    std::string name = "chiller";
    double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
    double power_unit = 1.0;
    double T_cw = 283.15;
    double E_max = 0.0;
    ChillerModel model = ChillerModel::pwa;
    int pwa_knots = 10;
    double startup_cost = 0.0;

    double si_a1() const { return a1 * power_unit; }
    double si_a2() const { return a2 * power_unit; }
    double si_a3() const { return a3 / power_unit; }

    /// Cooling energy at which the Ng-Gordon denominator vanishes.
    double pole(double delta) const { return si_a3() > 0.0 ? T_cw * delta / si_a3() : inf; }

    void validate(double delta) const {
        require(E_max > 0.0, "chiller '" + name + "': E_max must be positive");
        require(pwa_knots >= 2, "chiller '" + name + "': at least 2 PWA knots");
        require(T_cw > 0.0 && power_unit > 0.0, "chiller '" + name + "': bad T_cw or unit");
        if (E_max >= pole(delta)) {
            std::ostringstream os;
            os << "chiller '" << name << "': E_max = " << E_max << " J is beyond the model pole " << pole(delta)
               << " J (a3 E/delta must stay below T_cw)";
            throw ModelError(os.str());
        }
    }
};

inline double ng_gordon_electrical(const ChillerSpec& s, double T_o, double delta, double E_c) {
    const double den = s.T_cw - s.si_a3() / delta * E_c;
    if (!(den > 0.0)) throw DomainError("chiller '" + s.name + "': operating point beyond the model pole");
    if (E_c < 0.0) throw DomainError("chiller '" + s.name + "': negative cooling energy");
    const double num = s.si_a1() * T_o * s.T_cw * delta + s.si_a2() * (T_o - s.T_cw) * delta + s.a4 * T_o * E_c;
    return num / den - E_c;
}

inline double chiller_cop(const ChillerSpec& s, double T_o, double delta, double E_c) {
    return E_c / ng_gordon_electrical(s, T_o, delta, E_c);
}

/// Cooling energy of maximum COP on (0, E_max].
inline double cop_maximizer(const ChillerSpec& s, double T_o, double delta) {
    auto neg = [&](double e) { return -chiller_cop(s, T_o, delta, e); };
    const auto r = boost::math::tools::brent_find_minima(neg, 1e-9 * s.E_max, s.E_max, 52);
    return r.first;
}

struct Biquadratic {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
    double operator()(double e) const { return (c1 * e * e + c2) * e * e + c3; }
};

/**
 * Weighted least squares for c1 e^4 + c2 e^2 + c3 with c1, c2 >= 0. Uniform
 * samples on [0, E_max]; the two anchor points carry weight `anchor_weight`.
 */
inline Biquadratic fit_biquadratic(const std::function<double(double)>& f, double E_max, double E_anchor,
                                   int samples = 201, double anchor_weight = 1e6) {
    require(E_max > 0.0 && samples >= 3, "fit_biquadratic: bad range");
    std::vector<double> e, w;
    for (int i = 0; i < samples; ++i) {
        e.push_back(E_max * i / (samples - 1));
        w.push_back(1.0);
    }
    e.push_back(0.0);
    w.push_back(anchor_weight);
    e.push_back(E_anchor);
    w.push_back(anchor_weight);
    // Columns scaled to unit magnitude on the range.
    const double s4 = std::pow(E_max, 4), s2 = E_max * E_max;
    Mat A(e.size(), 3);
    Vec b(e.size());
    double fscale = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) fscale = std::max(fscale, std::abs(f(e[i])));
    fscale = std::max(fscale, 1e-300);
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double sw = std::sqrt(w[i]);
        const double x = e[i] / E_max;
        A(i, 0) = sw * x * x * x * x;
        A(i, 1) = sw * x * x;
        A(i, 2) = sw;
        b(i) = sw * f(e[i]) / fscale;
    }
    // Non-negativity on the first two coefficients by active-set enumeration.
    double best = inf;
    Vec coef = Vec::Zero(3);
    for (int mask = 0; mask < 4; ++mask) {
        std::vector<int> cols{2};
        if (mask & 1) cols.push_back(0);
        if (mask & 2) cols.push_back(1);
        Mat As(A.rows(), cols.size());
        for (std::size_t k = 0; k < cols.size(); ++k) As.col(k) = A.col(cols[k]);
        const Vec x = As.colPivHouseholderQr().solve(b);
        bool ok = true;
        for (std::size_t k = 0; k < cols.size(); ++k)
            if (cols[k] != 2 && x(k) < 0.0) ok = false;
        if (!ok) continue;
        const double r = (As * x - b).squaredNorm();
        if (r < best) {
            best = r;
            coef.setZero();
            for (std::size_t k = 0; k < cols.size(); ++k) coef(cols[k]) = x(k);
        }
    }
    Biquadratic q{coef(0) * fscale / s4, coef(1) * fscale / s2, coef(2) * fscale};
    if (q.c1 < 0.0 || q.c2 < 0.0) throw ModelError("fit_biquadratic: negative coefficient");
    return q;
}

inline Biquadratic fit_biquadratic(const ChillerSpec& s, double T_o, double delta) {
    s.validate(delta);
    return fit_biquadratic([&](double e) { return ng_gordon_electrical(s, T_o, delta, e); }, s.E_max,
                           cop_maximizer(s, T_o, delta));
}

/// Convex piecewise-affine interpolant, stored both as knots and as max-of-affine pieces.
struct Pwa {
    std::vector<double> knots, values;
    std::vector<double> slopes, intercepts;

    double operator()(double e) const {
        double v = -inf;
        for (std::size_t i = 0; i < slopes.size(); ++i) v = std::max(v, slopes[i] * e + intercepts[i]);
        return v;
    }
    double max_value() const { return *std::max_element(values.begin(), values.end()); }
    std::size_t pieces() const { return slopes.size(); }
};

inline Pwa pwa_from_samples(std::vector<double> x, std::vector<double> y, bool strict = true) {
    require(x.size() == y.size() && x.size() >= 2, "PWA: need at least two knots");
    Pwa p;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        require(x[i + 1] > x[i], "PWA: knots must be strictly increasing");
        const double m = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        if (!strict && !p.slopes.empty() && m >= p.slopes.back() - 1e-12 * std::abs(m) && !(m > p.slopes.back()))
            continue;
        if (!p.slopes.empty() && !(m > p.slopes.back())) {
            std::ostringstream os;
            os.precision(12);
            os << "PWA: sampled curve is not convex at knots (" << x[i - 1] << ", " << x[i] << ", " << x[i + 1]
               << ") with values (" << y[i - 1] << ", " << y[i] << ", " << y[i + 1] << ")";
            throw ModelError(os.str());
        }
        p.slopes.push_back(m);
        p.intercepts.push_back(y[i] - m * x[i]);
    }
    p.knots = std::move(x);
    p.values = std::move(y);
    return p;
}

/// Knots: uniform on [0, E_max] plus the COP maximizer (for more than two knots).
inline std::vector<double> pwa_knots(const ChillerSpec& s, double T_o, double delta) {
    std::vector<double> k;
    if (s.pwa_knots == 2) return {0.0, s.E_max};
    const int uniform = s.pwa_knots - 1;
    for (int i = 0; i < uniform; ++i) k.push_back(s.E_max * i / (uniform - 1));
    const double star = cop_maximizer(s, T_o, delta);
    const double h = s.E_max / (uniform - 1);
    bool close = false;
    for (double v : k) close = close || std::abs(v - star) < 1e-6 * h;
    if (close) {
        k.clear();
        for (int i = 0; i < s.pwa_knots; ++i) k.push_back(s.E_max * i / (s.pwa_knots - 1));
    } else {
        k.push_back(star);
        std::sort(k.begin(), k.end());
    }
    return k;
}

inline Pwa fit_pwa(const ChillerSpec& s, double T_o, double delta) {
    s.validate(delta);
    auto x = pwa_knots(s, T_o, delta);
    std::vector<double> y;
    for (double e : x) y.push_back(ng_gordon_electrical(s, T_o, delta, e));
    return pwa_from_samples(std::move(x), std::move(y));
}

/// Interpolating PWA of an arbitrary biquadratic, used when a MILP cannot carry smooth terms.
inline Pwa pwa_of(const Biquadratic& q, double E_max, int knots) {
    std::vector<double> x, y;
    for (int i = 0; i < knots; ++i) {
        x.push_back(E_max * i / (knots - 1));
        y.push_back(q(x.back()));
    }
    return pwa_from_samples(std::move(x), std::move(y), false);
}

struct ChillerVars {
    int E_c = -1;
    int E_l = -1;
    int delta = -1;
};

/**
 * One slot of a PWA chiller in program units. Without on-off the epigraph
 * E_l >= m_i E_c + q_i is exact under minimization. With on-off:
 *   eps d <= E_c <= E_max d,  E_l >= m_i E_c + q_i d,  0 <= E_l <= f_max d.
 */
inline ChillerVars add_chiller_slot(opt::MathProgram& p, const std::string& name, const Pwa& f, double E_max,
                                    bool onoff, double eps) {
    using opt::Tag;
    ChillerVars v;
    v.E_c = p.add_var(name + ".Ec", 0.0, E_max);
    v.E_l = p.add_var(name + ".El", 0.0, f.max_value());
    if (onoff) {
        v.delta = p.add_binary(name + ".on");
        p.add_row(name + ".on_lo", {{v.E_c, 1.0}, {v.delta, -eps}}, 0.0, inf, Tag::single_component);
        p.add_row(name + ".on_hi", {{v.E_c, 1.0}, {v.delta, -E_max}}, -inf, 0.0, Tag::single_component);
        p.add_row(name + ".El_gate", {{v.E_l, 1.0}, {v.delta, -f.max_value()}}, -inf, 0.0, Tag::single_component);
    }
    for (std::size_t i = 0; i < f.pieces(); ++i) {
        std::vector<opt::Term> t{{v.E_l, 1.0}, {v.E_c, -f.slopes[i]}};
        if (onoff) {
            t.push_back({v.delta, -f.intercepts[i]});
            p.add_row(name + ".pwa" + std::to_string(i), t, 0.0, inf, Tag::single_component);
        } else {
            p.add_row(name + ".pwa" + std::to_string(i), t, f.intercepts[i], inf, Tag::single_component);
        }
    }
    return v;
}

/// Rescale a PWA from J to program units of `unit` J.
inline Pwa scaled(const Pwa& f, double unit) {
    Pwa g = f;
    for (auto& x : g.knots) x /= unit;
    for (auto& y : g.values) y /= unit;
    for (auto& q : g.intercepts) q /= unit;
    return g;
}

inline Biquadratic scaled(const Biquadratic& q, double unit) {
    return {q.c1 * unit * unit * unit, q.c2 * unit, q.c3 / unit};
}

}  // namespace district::comp
