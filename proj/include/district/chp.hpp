#pragma once

#include "district/program.hpp"

namespace district::comp {

enum class ChpModel { linear, linear_onoff };

/// Microturbine with affine electrical and heat characteristics in the fuel flow u.
struct ChpSpec {
    std::string name = "chp";
    double m_l = 0.0, q_l = 0.0, m_h = 0.0, q_h = 0.0;
    double u_min = 0.0, u_max = 0.0;
    double E_max_l = inf, E_max_h = inf;
    double startup_cost = 0.0;
    double fuel_price = 0.0;
    ChpModel model = ChpModel::linear_onoff;

    void validate() const {
        require(m_l > 0.0 && q_l > 0.0 && m_h > 0.0 && q_h > 0.0,
                "chp '" + name + "': characteristic coefficients must be positive");
        require(u_min < u_max, "chp '" + name + "': need u_min < u_max");
        require(u_min >= 0.0, "chp '" + name + "': negative minimum flow");
    }
};

struct ChpEnergies {
    double E_l = 0.0, E_h = 0.0;
};

/// Energies of one slot; flags a flow below the minimum while on.
inline ChpEnergies chp_energies(const ChpSpec& s, double u, bool on) {
    if (!on) return {};
    if (u < s.u_min || u > s.u_max) throw DomainError("chp '" + s.name + "': flow outside [u_min, u_max] while on");
    return {s.m_l * u + s.q_l, s.m_h * u + s.q_h};
}

struct ChpVars {
    int u = -1, delta = -1, w = -1, E_l = -1, E_h = -1;
};

/**
 * One slot. With on-off, w = delta u is linearized by
 *   w <= u_max d,  w <= u,  w >= u - u_max (1 - d),  w >= 0
 * and the gate d (u_min + eps) <= u <= d u_max + (1 - d) u_min.
 */
inline ChpVars add_chp_slot(opt::MathProgram& p, const ChpSpec& s, const std::string& n, double eps) {
    using opt::Tag;
    ChpVars v;
    v.E_l = p.add_var(n + ".El", 0.0, s.E_max_l);
    v.E_h = p.add_var(n + ".Eh", 0.0, s.E_max_h);
    if (s.model == ChpModel::linear) {
        v.u = p.add_var(n + ".u", s.u_min, s.u_max);
        v.w = v.u;
        p.add_row(n + ".El_def", {{v.E_l, 1.0}, {v.u, -s.m_l}}, s.q_l, s.q_l, Tag::single_component);
        p.add_row(n + ".Eh_def", {{v.E_h, 1.0}, {v.u, -s.m_h}}, s.q_h, s.q_h, Tag::single_component);
        return v;
    }
    v.u = p.add_var(n + ".u", 0.0, s.u_max);
    v.delta = p.add_binary(n + ".on");
    v.w = p.add_var(n + ".w", 0.0, s.u_max);
    p.add_row(n + ".gate_lo", {{v.u, 1.0}, {v.delta, -(s.u_min + eps)}}, 0.0, inf, Tag::single_component);
    p.add_row(n + ".gate_hi", {{v.u, 1.0}, {v.delta, -(s.u_max - s.u_min)}}, -inf, s.u_min, Tag::single_component);
    p.add_row(n + ".w_d", {{v.w, 1.0}, {v.delta, -s.u_max}}, -inf, 0.0, Tag::single_component);
    p.add_row(n + ".w_u", {{v.w, 1.0}, {v.u, -1.0}}, -inf, 0.0, Tag::single_component);
    p.add_row(n + ".w_ud", {{v.w, 1.0}, {v.u, -1.0}, {v.delta, -s.u_max}}, -s.u_max, inf, Tag::single_component);
    p.add_row(n + ".El_def", {{v.E_l, 1.0}, {v.w, -s.m_l}, {v.delta, -s.q_l}}, 0.0, 0.0, Tag::single_component);
    p.add_row(n + ".Eh_def", {{v.E_h, 1.0}, {v.w, -s.m_h}, {v.delta, -s.q_h}}, 0.0, 0.0, Tag::single_component);
    return v;
}

}  // namespace district::comp
