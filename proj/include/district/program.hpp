#pragma once

#include "district/common.hpp"

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace district::opt {

enum class VarType { continuous, binary };

enum class Tag { single_component = 0, interconnection = 1, control = 2 };
inline constexpr int n_tags = 3;

inline const char* tag_name(Tag t) {
    switch (t) {
    case Tag::single_component: return "single_component";
    case Tag::interconnection: return "interconnection";
    case Tag::control: return "control";
    }
    return "?";
}

struct Variable {
    std::string name;
    double lo = 0.0;
    double hi = inf;
    VarType type = VarType::continuous;
};

struct Term {
    int var;
    double coef;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    double lo = -inf;
    double hi = inf;
    Tag tag = Tag::single_component;
};

/// weight * (quartic x^4 + quadratic x^2 + constant), convex when quartic, quadratic >= 0.
struct SmoothTerm {
    int var = 0;
    double quartic = 0.0;
    double quadratic = 0.0;
    double constant = 0.0;
    double weight = 1.0;

    double value(double x) const { return weight * ((quartic * x * x + quadratic) * x * x + constant); }
    double grad(double x) const { return weight * (4.0 * quartic * x * x * x + 2.0 * quadratic * x); }
    double hess(double x) const { return weight * (12.0 * quartic * x * x + 2.0 * quadratic); }
};

/// A named sequence of variables over the horizon; decision series are blocked by the multirate map.
struct Series {
    std::string name;
    std::vector<int> vars;
    bool on_knots = false;  // M+1 entries (else M slot entries)
    bool periodic = false;
    bool decision = true;
};

class MathProgram {
public:
    std::vector<Variable> vars;
    std::vector<Constraint> rows;
    std::vector<double> cost;
    double cost_offset = 0.0;
    std::vector<SmoothTerm> smooth;
    std::vector<Series> series;
    std::string name;

    int add_var(std::string vname, double lo, double hi, double c = 0.0, VarType t = VarType::continuous) {
        if (t == VarType::binary) {
            lo = std::max(lo, 0.0);
            hi = std::min(hi, 1.0);
        }
        require(lo <= hi, "variable '" + vname + "': lower bound above upper bound");
        vars.push_back({std::move(vname), lo, hi, t});
        cost.push_back(c);
        return static_cast<int>(vars.size()) - 1;
    }

    int add_binary(std::string vname, double c = 0.0) { return add_var(std::move(vname), 0.0, 1.0, c, VarType::binary); }

    int add_row(std::string rname, std::vector<Term> terms, double lo, double hi, Tag tag) {
        require(lo <= hi, "constraint '" + rname + "': contradictory bounds");
        for (const auto& t : terms)
            require(t.var >= 0 && t.var < n_vars(), "constraint '" + rname + "': unknown variable");
        rows.push_back({std::move(rname), std::move(terms), lo, hi, tag});
        return static_cast<int>(rows.size()) - 1;
    }

    void add_cost(int var, double c) { cost.at(var) += c; }

    int n_vars() const { return static_cast<int>(vars.size()); }
    int n_rows() const { return static_cast<int>(rows.size()); }

    bool has_binaries() const {
        for (const auto& v : vars)
            if (v.type == VarType::binary) return true;
        return false;
    }
    bool has_smooth() const { return !smooth.empty(); }

    std::vector<int> binaries() const {
        std::vector<int> b;
        for (int j = 0; j < n_vars(); ++j)
            if (vars[j].type == VarType::binary) b.push_back(j);
        return b;
    }

    int find_var(const std::string& vname) const {
        for (int j = 0; j < n_vars(); ++j)
            if (vars[j].name == vname) return j;
        return -1;
    }

    const Series* find_series(const std::string& sname) const {
        for (const auto& s : series)
            if (s.name == sname) return &s;
        return nullptr;
    }

    SpMat matrix() const {
        std::vector<Triplet> trips;
        for (int i = 0; i < n_rows(); ++i)
            for (const auto& t : rows[i].terms) trips.emplace_back(i, t.var, t.coef);
        SpMat a(n_rows(), n_vars());
        a.setFromTriplets(trips.begin(), trips.end());
        a.makeCompressed();
        return a;
    }

    double row_activity(int i, const Vec& x) const {
        double s = 0.0;
        for (const auto& t : rows[i].terms) s += t.coef * x(t.var);
        return s;
    }

    double objective(const Vec& x) const {
        double f = cost_offset;
        for (int j = 0; j < n_vars(); ++j) f += cost[j] * x(j);
        for (const auto& s : smooth) f += s.value(x(s.var));
        return f;
    }
};

enum class Status { optimal, infeasible, unbounded, iteration_limit, node_limit, time_limit, error };

inline const char* status_name(Status s) {
    switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
    case Status::node_limit: return "node_limit";
    case Status::time_limit: return "time_limit";
    case Status::error: return "error";
    }
    return "?";
}

struct SolverStats {
    long iterations = 0;
    long nodes = 0;
    long lp_solves = 0;
    double seconds = 0.0;
};

struct Residuals {
    std::array<double, n_tags> by_tag{};  // max row violation per tag
    double bounds = 0.0;                  // max bound violation
    double integrality = 0.0;

    double max_row() const { return std::max({by_tag[0], by_tag[1], by_tag[2]}); }
};

inline Residuals compute_residuals(const MathProgram& p, const Vec& x) {
    Residuals r;
    for (int i = 0; i < p.n_rows(); ++i) {
        const double a = p.row_activity(i, x);
        const double v = std::max({0.0, p.rows[i].lo - a, a - p.rows[i].hi});
        auto& slot = r.by_tag[static_cast<int>(p.rows[i].tag)];
        slot = std::max(slot, v);
    }
    for (int j = 0; j < p.n_vars(); ++j) {
        r.bounds = std::max({r.bounds, p.vars[j].lo - x(j), x(j) - p.vars[j].hi});
        if (p.vars[j].type == VarType::binary) r.integrality = std::max(r.integrality, std::abs(x(j) - std::round(x(j))));
    }
    return r;
}

struct Solution {
    Status status = Status::error;
    Vec x;
    double objective = 0.0;
    Vec row_duals;       // c - A^T y = reduced costs
    Vec reduced_costs;
    Vec farkas;          // row multipliers proving infeasibility
    Vec ray;             // primal direction of unboundedness
    double bound = -inf;  // best proven lower bound
    double gap = inf;
    Residuals residuals;
    SolverStats stats;
    std::string message;

    bool optimal() const { return status == Status::optimal; }
};

}  // namespace district::opt
