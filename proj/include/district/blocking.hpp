#pragma once

#include "district/program.hpp"

#include <map>

namespace district::opt {

struct BlockedProgram {
    MathProgram program;
    std::vector<int> map;  // original variable -> reduced variable
    int rate = 1;

    Vec expand(const Vec& reduced) const {
        Vec x(map.size());
        for (std::size_t j = 0; j < map.size(); ++j) x(j) = reduced(map[j]);
        return x;
    }
};

/// Number of free values a decision series keeps after blocking.
inline int decision_count(const Series& s, int rate) {
    const int M = static_cast<int>(s.vars.size()) - (s.on_knots ? 1 : 0);
    return M / rate + (s.on_knots && !s.periodic ? 1 : 0);
}

/**
 * Hold every decision series constant over blocks of `rate` slots. A knot
 * series maps knot k < M to block k / rate; its final knot joins block 0 when
 * the series is periodic and stays free otherwise. Rate 1 returns the program unchanged.
 */
inline BlockedProgram apply_blocking(const MathProgram& p, int rate) {
    require(rate >= 1, "blocking rate must be positive");
    const int n = p.n_vars();
    std::vector<int> rep(n);
    for (int j = 0; j < n; ++j) rep[j] = j;
    for (const auto& s : p.series) {
        if (!s.decision || rate == 1) continue;
        const int M = static_cast<int>(s.vars.size()) - (s.on_knots ? 1 : 0);
        if (M % rate != 0)
            throw ModelError("blocking: horizon " + std::to_string(M) + " of series '" + s.name +
                             "' is not divisible by rate " + std::to_string(rate));
        for (int k = 0; k < static_cast<int>(s.vars.size()); ++k) {
            if (k == M && !s.periodic) continue;
            const int block = k < M ? k / rate : 0;
            rep[s.vars[k]] = rep[s.vars[block * rate]];
        }
    }

    BlockedProgram out;
    out.rate = rate;
    out.map.assign(n, -1);
    MathProgram& q = out.program;
    q.name = p.name;
    q.cost_offset = p.cost_offset;
    for (int j = 0; j < n; ++j) {
        const int r = rep[j];
        if (out.map[r] < 0) out.map[r] = q.add_var(p.vars[r].name, p.vars[r].lo, p.vars[r].hi, 0.0, p.vars[r].type);
        const int k = out.map[r];
        out.map[j] = k;
        auto& v = q.vars[k];
        v.lo = std::max(v.lo, p.vars[j].lo);
        v.hi = std::min(v.hi, p.vars[j].hi);
        require(v.lo <= v.hi, "blocking: empty bound intersection for '" + v.name + "'");
        q.cost[k] += p.cost[j];
    }
    for (const auto& row : p.rows) {
        // Merged terms keep their first position, so rate 1 reproduces the program.
        std::map<int, std::size_t> at;
        std::vector<Term> merged;
        for (const auto& t : row.terms) {
            const int k = out.map[t.var];
            const auto [it, fresh] = at.try_emplace(k, merged.size());
            if (fresh) merged.push_back({k, t.coef});
            else merged[it->second].coef += t.coef;
        }
        std::vector<Term> terms;
        for (const auto& t : merged)
            if (t.coef != 0.0) terms.push_back(t);
        if (terms.empty() && row.lo <= 0.0 && row.hi >= 0.0) continue;
        q.rows.push_back({row.name, std::move(terms), row.lo, row.hi, row.tag});
    }
    for (auto t : p.smooth) {
        t.var = out.map[t.var];
        q.smooth.push_back(t);
    }
    for (const auto& s : p.series) {
        Series b = s;
        for (auto& v : b.vars) v = out.map[v];
        q.series.push_back(std::move(b));
    }
    return out;
}

}  // namespace district::opt
