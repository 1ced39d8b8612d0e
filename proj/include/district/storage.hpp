#pragma once

#include "district/program.hpp"

#include <optional>

namespace district::comp {

enum class StorageModel { linear, charge_discharge };

/**
 * Storage with S(k+1) = a S(k) - s(k); s > 0 discharges. Type B splits s into
 * s_C in [s_C_max, s_C_min] (both <= 0) and s_D in [s_D_min, s_D_max] (both >= 0).
 */
struct StorageSpec {
    std::string name = "storage";
    double a = 1.0;
    double S_max = 0.0;
    StorageModel model = StorageModel::linear;
    double s_min = 0.0, s_max = 0.0;
    double beta_C = 0.0, beta_D = 0.0;
    double s_C_max = 0.0, s_C_min = 0.0;
    double s_D_min = 0.0, s_D_max = 0.0;
    std::optional<double> S0;
    bool periodic = true;

    void validate() const {
        require(a > 0.0 && a <= 1.0, "storage '" + name + "': loss factor must be in (0, 1]");
        require(S_max > 0.0, "storage '" + name + "': S_max must be positive");
        if (S0) require(*S0 >= 0.0 && *S0 <= S_max, "storage '" + name + "': S(0) outside [0, S_max]");
        if (model == StorageModel::linear) {
            require(s_min <= s_max, "storage '" + name + "': s_min above s_max");
        } else {
            require(beta_C >= 0.0 && beta_C <= 1.0 && beta_D >= 0.0 && beta_D <= 1.0,
                    "storage '" + name + "': efficiencies must be in [0, 1]");
            require(s_C_max < s_C_min && s_C_min <= 0.0, "storage '" + name + "': need s_C_max < s_C_min <= 0");
            require(0.0 <= s_D_min && s_D_min < s_D_max, "storage '" + name + "': need 0 <= s_D_min < s_D_max");
        }
    }
};

struct StorageLift {
    Vec Xi0;  // a^k, k = 1..M
    Mat Xi1;  // -a^(k-1-h) below the diagonal
};

/// S = Xi0 S(0) + Xi1 s over S(1..M) and s(0..M-1).
inline StorageLift storage_lift(double a, int M) {
    require(M >= 1, "storage_lift: M must be positive");
    StorageLift L{Vec(M), Mat::Zero(M, M)};
    std::vector<double> pw(M + 1, 1.0);
    for (int k = 1; k <= M; ++k) pw[k] = pw[k - 1] * a;
    for (int k = 1; k <= M; ++k) {
        L.Xi0(k - 1) = pw[k];
        for (int h = 0; h < k; ++h) L.Xi1(k - 1, h) = -pw[k - 1 - h];
    }
    return L;
}

struct StorageVars {
    std::vector<int> S;  // M + 1 knots
    std::vector<int> s;  // M slots (net exchange, type A) or empty
    std::vector<int> s_C, s_D, d_C, d_D;
};

/// Mode logic of one slot in a type-B storage.
inline void add_storage_modes(opt::MathProgram& p, const StorageSpec& sp, const std::string& n, int sC, int sD, int dC,
                              int dD) {
    using opt::Tag;
    p.add_row(n + ".excl", {{dC, 1.0}, {dD, 1.0}}, -inf, 1.0, Tag::single_component);
    p.add_row(n + ".sC_lo", {{sC, 1.0}, {dC, -sp.s_C_max}}, 0.0, inf, Tag::single_component);
    p.add_row(n + ".sC_hi", {{sC, 1.0}, {dC, -sp.s_C_min}}, -inf, 0.0, Tag::single_component);
    p.add_row(n + ".sD_lo", {{sD, 1.0}, {dD, -sp.s_D_min}}, 0.0, inf, Tag::single_component);
    p.add_row(n + ".sD_hi", {{sD, 1.0}, {dD, -sp.s_D_max}}, -inf, 0.0, Tag::single_component);
}

/// Stored energy over M slots; quantities already in program units.
inline StorageVars add_storage(opt::MathProgram& p, const StorageSpec& sp, int M) {
    using opt::Tag;
    sp.validate();
    StorageVars v;
    const std::string& n = sp.name;
    for (int k = 0; k <= M; ++k) v.S.push_back(p.add_var(n + ".S[" + std::to_string(k) + "]", 0.0, sp.S_max));
    for (int k = 0; k < M; ++k) {
        const std::string ks = "[" + std::to_string(k) + "]";
        std::vector<opt::Term> dyn{{v.S[k + 1], 1.0}, {v.S[k], -sp.a}};
        if (sp.model == StorageModel::linear) {
            v.s.push_back(p.add_var(n + ".s" + ks, sp.s_min, sp.s_max));
            dyn.push_back({v.s.back(), 1.0});
        } else {
            v.s_C.push_back(p.add_var(n + ".sC" + ks, sp.s_C_max, 0.0));
            v.s_D.push_back(p.add_var(n + ".sD" + ks, 0.0, sp.s_D_max));
            v.d_C.push_back(p.add_binary(n + ".dC" + ks));
            v.d_D.push_back(p.add_binary(n + ".dD" + ks));
            add_storage_modes(p, sp, n + ks, v.s_C.back(), v.s_D.back(), v.d_C.back(), v.d_D.back());
            dyn.push_back({v.s_C.back(), 1.0 - sp.beta_C});
            dyn.push_back({v.s_D.back(), 1.0 + sp.beta_D});
        }
        p.add_row(n + ".dyn" + ks, dyn, 0.0, 0.0, Tag::single_component);
    }
    if (sp.S0) p.add_row(n + ".S0", {{v.S[0], 1.0}}, *sp.S0, *sp.S0, Tag::control);
    if (sp.periodic) p.add_row(n + ".periodic", {{v.S[M], 1.0}, {v.S[0], -1.0}}, 0.0, 0.0, Tag::control);
    return v;
}

/// Net exchange of slot k as terms (s, or s_C + s_D).
inline std::vector<opt::Term> exchange_terms(const StorageVars& v, int k, double sign = 1.0) {
    if (!v.s.empty()) return {{v.s[k], sign}};
    return {{v.s_C[k], sign}, {v.s_D[k], sign}};
}

}  // namespace district::comp
