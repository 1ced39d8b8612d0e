#pragma once

#include "district/ipm.hpp"
#include "district/lp.hpp"

#include <queue>

namespace district::opt {

struct MilpOptions {
    double rel_gap = 1e-6;
    double int_tol = 1e-6;
    long max_nodes = 2000000;
    double time_limit = inf;
    int threads = 1;
    LpOptions lp;
};

namespace detail {

struct BranchNode {
    double bound;
    long id;
    std::vector<std::pair<int, double>> fixes;  // binary index, value
    Basis basis;
};

struct NodeOrder {
    bool operator()(const BranchNode& a, const BranchNode& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

}  // namespace detail

/**
 * Best-first branch and bound over the binaries. Branches on the most
 * fractional binary (lowest index on ties); integral relaxations are
 * re-solved with all binaries fixed before becoming the incumbent.
 */
inline Solution solve_milp(const MathProgram& p, const MilpOptions& opt = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    const std::vector<int> bins = p.binaries();
    Simplex lp(p, opt.lp);

    Solution best;
    best.status = Status::infeasible;
    best.objective = inf;
    long lp_solves = 0, iterations = 0, nodes = 0;

    auto tol_of = [&](double v) { return opt.rel_gap * std::max(1.0, std::abs(v)); };

    auto apply = [&](const std::vector<std::pair<int, double>>& fixes) {
        lp.reset_bounds();
        for (auto [j, v] : fixes) lp.set_var_bounds(j, v, v);
    };

    auto polish = [&](const Vec& x, const std::vector<std::pair<int, double>>& fixes) {
        auto all = fixes;
        for (int j : bins) all.emplace_back(j, std::round(x(j)));
        apply(all);
        const Basis keep = lp.basis();
        Solution s = lp.solve();
        ++lp_solves;
        iterations += s.stats.iterations;
        lp.set_basis(keep);
        if (s.optimal() && s.objective < best.objective) {
            for (int j : bins) s.x(j) = std::round(s.x(j));
            best = s;
        }
    };

    std::priority_queue<detail::BranchNode, std::vector<detail::BranchNode>, detail::NodeOrder> open;
    open.push({-inf, 0, {}, {}});
    long next_id = 1;
    Status stop = Status::optimal;
    double open_bound = inf;

    while (!open.empty()) {
        if (nodes >= opt.max_nodes) {
            stop = Status::node_limit;
            break;
        }
        if (elapsed() > opt.time_limit) {
            stop = Status::time_limit;
            break;
        }
        detail::BranchNode node = open.top();
        if (node.bound >= best.objective - tol_of(best.objective)) break;
        open.pop();
        ++nodes;
        apply(node.fixes);
        if (!node.basis.status.empty()) lp.set_basis(node.basis);
        Solution s = lp.solve();
        ++lp_solves;
        iterations += s.stats.iterations;
        if (s.status == Status::infeasible) continue;
        if (s.status == Status::unbounded) {
            if (nodes == 1) {
                best = s;
                best.stats.nodes = nodes;
                return best;
            }
            continue;
        }
        if (!s.optimal()) {
            stop = s.status;
            break;
        }
        if (s.objective >= best.objective - tol_of(best.objective)) continue;

        int branch = -1;
        double frac_best = opt.int_tol;
        for (int j : bins) {
            const double f = std::abs(s.x(j) - std::round(s.x(j)));
            if (f > frac_best + 1e-15) {
                frac_best = f;
                branch = j;
            }
        }
        const Basis here = lp.basis();
        if (branch < 0) {
            polish(s.x, node.fixes);
            continue;
        }
        if (nodes == 1) polish(s.x, node.fixes);
        for (double v : {std::round(s.x(branch)) == 0.0 ? 0.0 : 1.0, std::round(s.x(branch)) == 0.0 ? 1.0 : 0.0}) {
            auto f = node.fixes;
            f.emplace_back(branch, v);
            open.push({s.objective, next_id++, std::move(f), here});
        }
    }
    if (!open.empty()) open_bound = open.top().bound;
    lp.reset_bounds();

    Solution out = best;
    out.stats.nodes = nodes;
    out.stats.lp_solves = lp_solves;
    out.stats.iterations = iterations;
    out.stats.seconds = elapsed();
    if (std::isfinite(best.objective)) {
        out.bound = std::min(open_bound, best.objective);
        out.gap = best.objective - out.bound;
        out.status = stop;
        out.residuals = compute_residuals(p, out.x);
    } else {
        out.status = stop == Status::optimal ? Status::infeasible : stop;
        out.bound = open_bound;
    }
    return out;
}

/// Dispatch on problem class.
inline Solution solve(const MathProgram& p, const MilpOptions& opt = {}) {
    if (p.has_smooth()) {
        require(!p.has_binaries(), "smooth terms inside a mixed-integer program: convert them to PWA first");
        return solve_convex(p);
    }
    if (p.has_binaries()) return solve_milp(p, opt);
    return solve_lp(p, opt.lp);
}

}  // namespace district::opt
