#pragma once

#include "district/program.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>

namespace district::opt {

struct LpOptions {
    double primal_tol = 1e-9;
    double dual_tol = 1e-9;
    double pivot_tol = 1e-9;
    long max_iterations = 500000;
    int refactor_interval = 64;
    int degenerate_streak = 50;
    bool scale = true;
    double time_limit = inf;
};

enum class BasisStatus : signed char { basic, at_lower, at_upper, free_zero };

/// Status of every structural followed by every row logical.
struct Basis {
    std::vector<BasisStatus> status;
};

namespace detail {

// Basis factorization: sparse LU of a reference basis plus a product-form eta file.
class BasisFactor {
public:
    bool factor(const SpMat& b) {
        etas_.clear();
        m_ = b.rows();
        if (m_ == 0) return true;
        lu_.analyzePattern(b);
        lu_.factorize(b);
        return lu_.info() == Eigen::Success;
    }

    void ftran(Vec& v) const {
        if (m_ == 0) return;
        v = lu_.solve(v).eval();
        for (const auto& e : etas_) {
            const double pr = v(e.r) / e.col(e.r);
            if (pr != 0.0) v -= pr * e.col;
            v(e.r) = pr;
        }
    }

    void btran(Vec& v) const {
        if (m_ == 0) return;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            const double vr = v(it->r);
            const double dot = it->col.dot(v) - it->col(it->r) * vr;
            v(it->r) = (vr - dot) / it->col(it->r);
        }
        v = lu_.transpose().solve(v).eval();
    }

    void push(int r, const Vec& alpha) { etas_.push_back({r, alpha}); }
    std::size_t updates() const { return etas_.size(); }

private:
    struct Eta {
        int r;
        Vec col;
    };
    Index m_ = 0;
    mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
    std::vector<Eta> etas_;
};

inline double pow2_round(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) return 1.0;
    return std::ldexp(1.0, static_cast<int>(std::lround(std::log2(s))));
}

}  // namespace detail

/**
 * Bounded primal revised simplex on A x - r = 0 with bounds on x and on the
 * row activities r. Composite phase 1, Dantzig pricing with a Bland fallback
 * after a run of degenerate pivots, Harris ratio test with bound flipping.
 */
class Simplex {
public:
    explicit Simplex(const MathProgram& p, LpOptions opt = {}) : opt_(opt) {
        require(!p.has_smooth(), "solve_lp: smooth objective terms need the convex solver");
        n_ = p.n_vars();
        m_ = p.n_rows();
        N_ = n_ + m_;
        A_ = p.matrix();
        offset_ = p.cost_offset;
        c_orig_ = Vec::Map(p.cost.data(), n_);
        lo0_ = Vec(N_);
        hi0_ = Vec(N_);
        for (int j = 0; j < n_; ++j) {
            lo0_(j) = p.vars[j].lo;
            hi0_(j) = p.vars[j].hi;
        }
        for (int i = 0; i < m_; ++i) {
            lo0_(n_ + i) = p.rows[i].lo;
            hi0_(n_ + i) = p.rows[i].hi;
        }
        compute_scaling();
        c_ = Vec::Zero(N_);
        for (int j = 0; j < n_; ++j) c_(j) = c_orig_(j) * cs_(j);
        for (int k = 0; k < A_.outerSize(); ++k)
            for (SpMat::InnerIterator it(A_, k); it; ++it) it.valueRef() *= rs_(it.row()) * cs_(it.col());
        lo_ = Vec(N_);
        hi_ = Vec(N_);
        reset_bounds();
        slack_basis();
        x_ = Vec::Zero(N_);
    }

    int n_structural() const { return n_; }
    int n_rows() const { return m_; }

    /// Override bounds of a structural variable, original units.
    void set_var_bounds(int j, double lo, double hi) {
        lo_(j) = lo / cs_(j);
        hi_(j) = hi / cs_(j);
    }

    void reset_bounds() {
        for (int j = 0; j < n_; ++j) {
            lo_(j) = lo0_(j) / cs_(j);
            hi_(j) = hi0_(j) / cs_(j);
        }
        for (int i = 0; i < m_; ++i) {
            lo_(n_ + i) = lo0_(n_ + i) * rs_(i);
            hi_(n_ + i) = hi0_(n_ + i) * rs_(i);
        }
    }

    Basis basis() const { return {st_}; }

    void set_basis(const Basis& b) {
        int nb = 0;
        for (auto s : b.status) nb += (s == BasisStatus::basic);
        if (static_cast<int>(b.status.size()) != N_ || nb != m_) {
            slack_basis();
            return;
        }
        st_ = b.status;
        head_.clear();
        for (int j = 0; j < N_; ++j)
            if (st_[j] == BasisStatus::basic) head_.push_back(j);
        fresh_ = true;
    }

    Solution solve() {
        const auto t0 = std::chrono::steady_clock::now();
        Solution sol;
        for (int j = 0; j < N_; ++j)
            if (st_[j] != BasisStatus::basic && lo_(j) > hi_(j)) {
                sol.status = Status::infeasible;
                sol.message = "contradictory bounds";
                return finish(sol, t0);
            }
        if (!refactor()) {
            slack_basis();
            refactor();
        }
        long iter = 0;
        int streak = 0;
        bool bland = false;
        Vec cb(m_), y(m_), alpha(m_);
        std::vector<double> d(N_, 0.0);

        while (true) {
            if (iter >= opt_.max_iterations) {
                sol.status = Status::iteration_limit;
                break;
            }
            if (opt_.time_limit < inf && (iter & 63) == 0 &&
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() > opt_.time_limit) {
                sol.status = Status::time_limit;
                break;
            }
            if (static_cast<int>(factor_.updates()) >= opt_.refactor_interval)
                if (!refactor()) {
                    slack_basis();
                    refactor();
                }

            bool phase1 = false;
            for (int i = 0; i < m_; ++i) {
                const int j = head_[i];
                double ci = 0.0;
                if (x_(j) < lo_(j) - opt_.primal_tol) ci = -1.0;
                else if (x_(j) > hi_(j) + opt_.primal_tol) ci = 1.0;
                if (ci != 0.0) phase1 = true;
                cb(i) = ci;
            }
            if (!phase1)
                for (int i = 0; i < m_; ++i) cb(i) = c_(head_[i]);
            y = cb;
            factor_.btran(y);

            int q = -1;
            double best = 0.0;
            for (int j = 0; j < N_; ++j) {
                if (st_[j] == BasisStatus::basic) continue;
                double dj = phase1 ? 0.0 : c_(j);
                if (j < n_) {
                    for (SpMat::InnerIterator it(A_, j); it; ++it) dj -= y(it.row()) * it.value();
                } else {
                    dj += y(j - n_);
                }
                d[j] = dj;
                if (lo_(j) == hi_(j)) continue;
                double score = 0.0;
                switch (st_[j]) {
                case BasisStatus::at_lower: score = dj < -opt_.dual_tol ? -dj : 0.0; break;
                case BasisStatus::at_upper: score = dj > opt_.dual_tol ? dj : 0.0; break;
                case BasisStatus::free_zero: score = std::abs(dj) > opt_.dual_tol ? std::abs(dj) : 0.0; break;
                default: break;
                }
                if (score <= 0.0) continue;
                if (bland) {
                    q = j;
                    break;
                }
                if (score > best) {
                    best = score;
                    q = j;
                }
            }

            if (q < 0) {
                if (!fresh_) {
                    if (!refactor()) {
                        slack_basis();
                        refactor();
                    }
                    continue;
                }
                if (phase1) {
                    sol.status = Status::infeasible;
                    sol.farkas = Vec(m_);
                    for (int i = 0; i < m_; ++i) sol.farkas(i) = y(i) * rs_(i);
                } else {
                    sol.status = Status::optimal;
                    sol.row_duals = Vec(m_);
                    for (int i = 0; i < m_; ++i) sol.row_duals(i) = y(i) * rs_(i);
                    sol.reduced_costs = Vec(n_);
                    for (int j = 0; j < n_; ++j) sol.reduced_costs(j) = st_[j] == BasisStatus::basic ? 0.0 : d[j] / cs_(j);
                }
                break;
            }

            column(q, alpha);
            factor_.ftran(alpha);
            const double dir = d[q] < 0.0 ? 1.0 : -1.0;

            int r = -1;
            double theta = inf;
            double target = 0.0;
            bool to_upper = false;
            ratio_test(alpha, dir, phase1, bland, r, theta, target, to_upper);

            const double range = hi_(q) - lo_(q);
            if (std::isfinite(range) && range <= theta) {
                // Bound flip of the entering variable.
                const double step = dir * range;
                x_(q) += step;
                for (int i = 0; i < m_; ++i) x_(head_[i]) -= step * alpha(i);
                st_[q] = dir > 0 ? BasisStatus::at_upper : BasisStatus::at_lower;
                x_(q) = dir > 0 ? hi_(q) : lo_(q);
                ++iter;
                streak = 0;
                bland = false;
                continue;
            }
            if (r < 0) {
                if (phase1) {
                    sol.status = Status::error;
                    sol.message = "unbounded phase-1 direction";
                    break;
                }
                sol.status = Status::unbounded;
                sol.ray = Vec::Zero(n_);
                if (q < n_) sol.ray(q) = dir * cs_(q);
                for (int i = 0; i < m_; ++i)
                    if (head_[i] < n_) sol.ray(head_[i]) = -dir * alpha(i) * cs_(head_[i]);
                break;
            }

            theta = std::max(theta, 0.0);
            const double step = dir * theta;
            x_(q) += step;
            for (int i = 0; i < m_; ++i) x_(head_[i]) -= step * alpha(i);
            const int leave = head_[r];
            x_(leave) = target;
            st_[leave] = to_upper ? BasisStatus::at_upper : BasisStatus::at_lower;
            if (!std::isfinite(target)) st_[leave] = BasisStatus::free_zero;
            head_[r] = q;
            st_[q] = BasisStatus::basic;
            factor_.push(r, alpha);
            fresh_ = false;
            ++iter;
            if (theta <= 1e-12) {
                if (++streak >= opt_.degenerate_streak) bland = true;
            } else {
                streak = 0;
                bland = false;
            }
        }
        sol.stats.iterations = iter;
        sol.stats.lp_solves = 1;
        return finish(sol, t0);
    }

private:
    void compute_scaling() {
        rs_ = Vec::Ones(m_);
        cs_ = Vec::Ones(n_);
        if (!opt_.scale || A_.nonZeros() == 0) return;
        for (int pass = 0; pass < 6; ++pass) {
            Vec rmin = Vec::Constant(m_, inf), rmax = Vec::Zero(m_);
            for (int k = 0; k < A_.outerSize(); ++k)
                for (SpMat::InnerIterator it(A_, k); it; ++it) {
                    const double v = std::abs(it.value()) * rs_(it.row()) * cs_(it.col());
                    if (v == 0.0) continue;
                    rmin(it.row()) = std::min(rmin(it.row()), v);
                    rmax(it.row()) = std::max(rmax(it.row()), v);
                }
            for (int i = 0; i < m_; ++i)
                if (rmax(i) > 0.0) rs_(i) *= detail::pow2_round(1.0 / std::sqrt(rmin(i) * rmax(i)));
            for (int k = 0; k < A_.outerSize(); ++k) {
                double cmin = inf, cmax = 0.0;
                for (SpMat::InnerIterator it(A_, k); it; ++it) {
                    const double v = std::abs(it.value()) * rs_(it.row()) * cs_(it.col());
                    if (v == 0.0) continue;
                    cmin = std::min(cmin, v);
                    cmax = std::max(cmax, v);
                }
                if (cmax > 0.0) cs_(k) *= detail::pow2_round(1.0 / std::sqrt(cmin * cmax));
            }
        }
    }

    void column(int j, Vec& out) const {
        out.setZero();
        if (j < n_) {
            for (SpMat::InnerIterator it(A_, j); it; ++it) out(it.row()) = it.value();
        } else {
            out(j - n_) = -1.0;
        }
    }

    void slack_basis() {
        st_.assign(N_, BasisStatus::at_lower);
        head_.clear();
        for (int j = 0; j < n_; ++j) {
            if (std::isfinite(lo_(j))) st_[j] = BasisStatus::at_lower;
            else if (std::isfinite(hi_(j))) st_[j] = BasisStatus::at_upper;
            else st_[j] = BasisStatus::free_zero;
        }
        for (int i = 0; i < m_; ++i) {
            st_[n_ + i] = BasisStatus::basic;
            head_.push_back(n_ + i);
        }
        fresh_ = false;
    }

    double nonbasic_value(int j) const {
        switch (st_[j]) {
        case BasisStatus::at_lower: return std::isfinite(lo_(j)) ? lo_(j) : (std::isfinite(hi_(j)) ? hi_(j) : 0.0);
        case BasisStatus::at_upper: return std::isfinite(hi_(j)) ? hi_(j) : (std::isfinite(lo_(j)) ? lo_(j) : 0.0);
        default: return 0.0;
        }
    }

    bool refactor() {
        x_ = Vec::Zero(N_);
        for (int j = 0; j < N_; ++j)
            if (st_[j] != BasisStatus::basic) {
                if (st_[j] == BasisStatus::at_lower && !std::isfinite(lo_(j)) && std::isfinite(hi_(j)))
                    st_[j] = BasisStatus::at_upper;
                if (st_[j] == BasisStatus::at_upper && !std::isfinite(hi_(j)) && std::isfinite(lo_(j)))
                    st_[j] = BasisStatus::at_lower;
                if (!std::isfinite(lo_(j)) && !std::isfinite(hi_(j))) st_[j] = BasisStatus::free_zero;
                x_(j) = nonbasic_value(j);
            }
        std::vector<Triplet> trips;
        for (int i = 0; i < m_; ++i) {
            const int j = head_[i];
            if (j < n_) {
                for (SpMat::InnerIterator it(A_, j); it; ++it) trips.emplace_back(it.row(), i, it.value());
            } else {
                trips.emplace_back(j - n_, i, -1.0);
            }
        }
        SpMat b(m_, m_);
        b.setFromTriplets(trips.begin(), trips.end());
        b.makeCompressed();
        if (!factor_.factor(b)) return false;
        Vec rhs = Vec::Zero(m_);
        for (int j = 0; j < N_; ++j) {
            if (st_[j] == BasisStatus::basic || x_(j) == 0.0) continue;
            if (j < n_) {
                for (SpMat::InnerIterator it(A_, j); it; ++it) rhs(it.row()) -= it.value() * x_(j);
            } else {
                rhs(j - n_) += x_(j);
            }
        }
        Vec xb = rhs;
        if (m_ > 0) factor_.ftran(xb);
        Vec chk = b * xb - rhs;
        if (m_ > 0 && !(chk.cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, rhs.cwiseAbs().maxCoeff()))) return false;
        for (int i = 0; i < m_; ++i) x_(head_[i]) = xb(i);
        fresh_ = true;
        return true;
    }

    void ratio_test(const Vec& alpha, double dir, bool phase1, bool bland, int& r, double& theta, double& target,
                    bool& to_upper) const {
        const double tol = opt_.primal_tol;
        struct Cand {
            int i;
            double ratio;
            double target;
            bool upper;
        };
        std::vector<Cand> cands;
        double theta_max = inf;
        for (int i = 0; i < m_; ++i) {
            const double a = alpha(i);
            if (std::abs(a) <= opt_.pivot_tol) continue;
            const int j = head_[i];
            const double rate = -dir * a;
            const double v = x_(j), l = lo_(j), u = hi_(j);
            double ratio = inf, relaxed = inf, tgt = 0.0;
            bool up = false;
            if (phase1 && v < l - tol) {
                if (rate > 0.0) {
                    ratio = (l - v) / rate;
                    relaxed = (l - v + tol) / rate;
                    tgt = l;
                }
            } else if (phase1 && v > u + tol) {
                if (rate < 0.0) {
                    ratio = (v - u) / -rate;
                    relaxed = (v - u + tol) / -rate;
                    tgt = u;
                    up = true;
                }
            } else if (rate < 0.0 && std::isfinite(l)) {
                ratio = (v - l) / -rate;
                relaxed = (v - l + tol) / -rate;
                tgt = l;
            } else if (rate > 0.0 && std::isfinite(u)) {
                ratio = (u - v) / rate;
                relaxed = (u - v + tol) / rate;
                tgt = u;
                up = true;
            }
            if (!std::isfinite(ratio)) continue;
            cands.push_back({i, ratio, tgt, up});
            theta_max = std::min(theta_max, bland ? ratio : relaxed);
        }
        r = -1;
        theta = inf;
        if (cands.empty()) return;
        if (bland) {
            int best_var = std::numeric_limits<int>::max();
            for (const auto& c : cands)
                if (c.ratio <= theta_max + 1e-12 && head_[c.i] < best_var) {
                    best_var = head_[c.i];
                    r = c.i;
                    theta = c.ratio;
                    target = c.target;
                    to_upper = c.upper;
                }
            return;
        }
        double best = -1.0;
        for (const auto& c : cands)
            if (c.ratio <= theta_max && std::abs(alpha(c.i)) > best) {
                best = std::abs(alpha(c.i));
                r = c.i;
                theta = c.ratio;
                target = c.target;
                to_upper = c.upper;
            }
    }

    Solution& finish(Solution& sol, std::chrono::steady_clock::time_point t0) {
        sol.x = Vec(n_);
        for (int j = 0; j < n_; ++j) sol.x(j) = x_(j) * cs_(j);
        sol.objective = offset_ + c_orig_.dot(sol.x);
        if (sol.status == Status::optimal) {
            sol.bound = sol.objective;
            sol.gap = 0.0;
        }
        sol.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return sol;
    }

    LpOptions opt_;
    int n_ = 0, m_ = 0, N_ = 0;
    SpMat A_;
    Vec c_orig_, c_, lo0_, hi0_, lo_, hi_, rs_, cs_, x_;
    double offset_ = 0.0;
    std::vector<int> head_;
    std::vector<BasisStatus> st_;
    detail::BasisFactor factor_;
    bool fresh_ = false;
};

/// Solve a pure LP. Binaries are rejected; use solve_milp.
inline Solution solve_lp(const MathProgram& p, const LpOptions& opt = {}) {
    require(!p.has_binaries(), "solve_lp: program has binary variables");
    Simplex s(p, opt);
    Solution sol = s.solve();
    sol.residuals = compute_residuals(p, sol.x);
    return sol;
}

}  // namespace district::opt
