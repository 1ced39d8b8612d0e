#pragma once

#include "district/program.hpp"

#include <chrono>

namespace district::opt {

struct IpmOptions {
    double tol = 1e-9;
    int max_iterations = 300;
    double regularization = 1e-10;
    double step_fraction = 0.995;
};

/**
 * Primal-dual path-following method with Mehrotra correction for
 *   min c'x + sum_j f_j(x_j)  s.t.  rlo <= A x <= rhi,  lo <= x <= hi
 * where each f_j is a convex even quartic. Row activities become slack
 * columns; fixed columns are substituted out.
 */
inline Solution solve_convex(const MathProgram& p, const IpmOptions& opt = {}) {
    require(!p.has_binaries(), "solve_convex: program has binary variables");
    for (const auto& t : p.smooth)
        require(t.quartic >= 0.0 && t.quadratic >= 0.0 && t.weight >= 0.0,
                "solve_convex: non-convex term on variable '" + p.vars.at(t.var).name + "'");
    const auto t0 = std::chrono::steady_clock::now();
    const int n = p.n_vars(), m = p.n_rows(), N = n + m;
    const SpMat A = p.matrix();

    Vec lo(N), hi(N), c = Vec::Zero(N);
    for (int j = 0; j < n; ++j) {
        lo(j) = p.vars[j].lo;
        hi(j) = p.vars[j].hi;
        c(j) = p.cost[j];
    }
    for (int i = 0; i < m; ++i) {
        lo(n + i) = p.rows[i].lo;
        hi(n + i) = p.rows[i].hi;
    }
    Vec q4 = Vec::Zero(N), q2 = Vec::Zero(N);
    for (const auto& t : p.smooth) {
        q4(t.var) += t.weight * t.quartic;
        q2(t.var) += t.weight * t.quadratic;
    }

    // Free index map over non-fixed columns of K = [A, -I].
    std::vector<int> live;
    Vec zfix = Vec::Zero(N);
    for (int j = 0; j < N; ++j) {
        if (lo(j) == hi(j)) zfix(j) = lo(j);
        else live.push_back(j);
    }
    const int L = static_cast<int>(live.size());
    std::vector<Triplet> kt;
    for (int a = 0; a < L; ++a) {
        const int j = live[a];
        if (j < n) {
            for (SpMat::InnerIterator it(A, j); it; ++it) kt.emplace_back(it.row(), a, it.value());
        } else {
            kt.emplace_back(j - n, a, -1.0);
        }
    }
    SpMat K(m, L);
    K.setFromTriplets(kt.begin(), kt.end());
    Vec b = Vec::Zero(m);
    for (int j = 0; j < N; ++j) {
        if (lo(j) != hi(j) || zfix(j) == 0.0) continue;
        if (j < n) {
            for (SpMat::InnerIterator it(A, j); it; ++it) b(it.row()) -= it.value() * zfix(j);
        } else {
            b(j - n) += zfix(j);
        }
    }

    Vec l(L), u(L), cc(L), a4(L), a2(L);
    std::vector<char> hasl(L), hasu(L);
    for (int a = 0; a < L; ++a) {
        const int j = live[a];
        l(a) = lo(j);
        u(a) = hi(j);
        cc(a) = c(j);
        a4(a) = q4(j);
        a2(a) = q2(j);
        hasl[a] = std::isfinite(l(a));
        hasu[a] = std::isfinite(u(a));
    }

    Vec z(L);
    for (int a = 0; a < L; ++a) {
        if (hasl[a] && hasu[a]) z(a) = 0.5 * (l(a) + u(a));
        else if (hasl[a]) z(a) = l(a) + std::max(1.0, 0.1 * std::abs(l(a)));
        else if (hasu[a]) z(a) = u(a) - std::max(1.0, 0.1 * std::abs(u(a)));
        else z(a) = 0.0;
    }
    const double cnorm = std::max(1.0, cc.cwiseAbs().maxCoeff());
    Vec sl = Vec::Zero(L), su = Vec::Zero(L);
    int ncomp = 0;
    for (int a = 0; a < L; ++a) {
        if (hasl[a]) sl(a) = cnorm, ++ncomp;
        if (hasu[a]) su(a) = cnorm, ++ncomp;
    }
    Vec y = Vec::Zero(m);
    const double bnorm = 1.0 + (b.size() ? b.cwiseAbs().maxCoeff() : 0.0);

    auto grad = [&](const Vec& zz) {
        Vec g = cc;
        for (int a = 0; a < L; ++a) g(a) += 4.0 * a4(a) * zz(a) * zz(a) * zz(a) + 2.0 * a2(a) * zz(a);
        return g;
    };
    auto gaps = [&](const Vec& zz, Vec& gl, Vec& gu) {
        gl = Vec::Ones(L);
        gu = Vec::Ones(L);
        for (int a = 0; a < L; ++a) {
            if (hasl[a]) gl(a) = zz(a) - l(a);
            if (hasu[a]) gu(a) = u(a) - zz(a);
        }
    };

    Solution sol;
    sol.status = Status::iteration_limit;
    int iter = 0;
    Vec gl, gu;
    for (; iter < opt.max_iterations; ++iter) {
        gaps(z, gl, gu);
        const Vec rp = K * z - b;
        const Vec rd = grad(z) - K.transpose() * y - sl + su;
        double mu = 0.0;
        for (int a = 0; a < L; ++a) mu += (hasl[a] ? gl(a) * sl(a) : 0.0) + (hasu[a] ? gu(a) * su(a) : 0.0);
        mu = ncomp ? mu / ncomp : 0.0;
        const double fval = cc.dot(z);
        const double pres = rp.size() ? rp.cwiseAbs().maxCoeff() / bnorm : 0.0;
        const double dres = L ? rd.cwiseAbs().maxCoeff() / cnorm : 0.0;
        if (pres <= opt.tol && dres <= opt.tol && mu <= opt.tol * (1.0 + std::abs(fval) / std::max(1, ncomp))) {
            sol.status = Status::optimal;
            break;
        }
        if (!z.allFinite() || z.cwiseAbs().maxCoeff() > 1e15) {
            sol.status = Status::unbounded;
            sol.message = "iterates diverged";
            break;
        }

        Vec D(L);
        for (int a = 0; a < L; ++a) {
            D(a) = 12.0 * a4(a) * z(a) * z(a) + 2.0 * a2(a) + opt.regularization;
            if (hasl[a]) D(a) += sl(a) / gl(a);
            if (hasu[a]) D(a) += su(a) / gu(a);
        }
        const Vec Dinv = D.cwiseInverse();
        SpMat KD = K * Dinv.asDiagonal();
        Mat NE = Mat(KD * K.transpose());
        NE.diagonal().array() += opt.regularization;
        Eigen::LDLT<Mat> ldlt(NE);

        // Solve for a complementarity target given as per-bound right-hand sides.
        auto direction = [&](const Vec& tl, const Vec& tu, Vec& dz, Vec& dy, Vec& dsl, Vec& dsu) {
            Vec rho = -rd;
            for (int a = 0; a < L; ++a) {
                if (hasl[a]) rho(a) += tl(a) / gl(a);
                if (hasu[a]) rho(a) -= tu(a) / gu(a);
            }
            const Vec rhs = -rp - K * (Dinv.asDiagonal() * rho);
            dy = m ? Vec(ldlt.solve(rhs)) : Vec();
            dz = Dinv.asDiagonal() * (rho + (m ? Vec(K.transpose() * dy) : Vec::Zero(L)));
            dsl = Vec::Zero(L);
            dsu = Vec::Zero(L);
            for (int a = 0; a < L; ++a) {
                if (hasl[a]) dsl(a) = (tl(a) - sl(a) * dz(a)) / gl(a);
                if (hasu[a]) dsu(a) = (tu(a) + su(a) * dz(a)) / gu(a);
            }
        };
        auto max_step = [&](const Vec& dz, const Vec& dsl, const Vec& dsu) {
            double ap = 1.0, ad = 1.0;
            for (int a = 0; a < L; ++a) {
                if (hasl[a]) {
                    if (dz(a) < 0) ap = std::min(ap, -gl(a) / dz(a));
                    if (dsl(a) < 0) ad = std::min(ad, -sl(a) / dsl(a));
                }
                if (hasu[a]) {
                    if (dz(a) > 0) ap = std::min(ap, gu(a) / dz(a));
                    if (dsu(a) < 0) ad = std::min(ad, -su(a) / dsu(a));
                }
            }
            return std::pair{ap, ad};
        };

        Vec tl = Vec::Zero(L), tu = Vec::Zero(L);
        for (int a = 0; a < L; ++a) {
            if (hasl[a]) tl(a) = -gl(a) * sl(a);
            if (hasu[a]) tu(a) = -gu(a) * su(a);
        }
        Vec dz, dy, dsl, dsu;
        direction(tl, tu, dz, dy, dsl, dsu);
        auto [apa, ada] = max_step(dz, dsl, dsu);
        double mu_aff = 0.0;
        for (int a = 0; a < L; ++a) {
            if (hasl[a]) mu_aff += (gl(a) + apa * dz(a)) * (sl(a) + ada * dsl(a));
            if (hasu[a]) mu_aff += (gu(a) - apa * dz(a)) * (su(a) + ada * dsu(a));
        }
        mu_aff = ncomp ? mu_aff / ncomp : 0.0;
        const double sigma = mu > 0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;
        for (int a = 0; a < L; ++a) {
            if (hasl[a]) tl(a) += sigma * mu - dz(a) * dsl(a);
            if (hasu[a]) tu(a) += sigma * mu + dz(a) * dsu(a);
        }
        direction(tl, tu, dz, dy, dsl, dsu);
        auto [ap, ad] = max_step(dz, dsl, dsu);
        ap = std::min(1.0, opt.step_fraction * ap);
        ad = std::min(1.0, opt.step_fraction * ad);
        if (p.has_smooth()) ap = ad = std::min(ap, ad);
        z += ap * dz;
        if (m) y += ad * dy;
        sl += ad * dsl;
        su += ad * dsu;
    }

    Vec full = zfix;
    for (int a = 0; a < L; ++a) full(live[a]) = z(a);
    sol.x = full.head(n);
    sol.objective = p.objective(sol.x);
    sol.row_duals = y;
    sol.reduced_costs = Vec::Zero(n);
    {
        Vec g = Vec::Map(p.cost.data(), n);
        for (const auto& t : p.smooth) g(t.var) += t.grad(sol.x(t.var));
        sol.reduced_costs = g - A.transpose() * y;
    }
    if (sol.optimal()) {
        sol.bound = sol.objective;
        sol.gap = 0.0;
    }
    sol.residuals = compute_residuals(p, sol.x);
    sol.stats.iterations = iter;
    sol.stats.lp_solves = 1;
    sol.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
}

}  // namespace district::opt
