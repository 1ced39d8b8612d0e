#pragma once

#include "district/program.hpp"

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace district::net {

using opt::MathProgram;
using opt::Tag;
using opt::Term;

enum class Carrier { electrical = 0, heating = 1, cooling = 2 };

inline const char* carrier_name(Carrier c) {
    switch (c) {
    case Carrier::electrical: return "electrical";
    case Carrier::heating: return "heating";
    case Carrier::cooling: return "cooling";
    }
    return "?";
}

/// Cost terms grouped by category so that the total can be split after a solve.
class CostBook {
public:
    void linear(MathProgram& p, const std::string& cat, int var, double c) {
        p.add_cost(var, c);
        lin_.push_back({cat, var, c});
        touch(cat);
    }

    void constant(MathProgram& p, const std::string& cat, double c) {
        p.cost_offset += c;
        consts_.emplace_back(cat, c);
        touch(cat);
    }

    void smooth(MathProgram& p, const std::string& cat, const opt::SmoothTerm& t) {
        p.smooth.push_back(t);
        smooth_.emplace_back(cat, static_cast<int>(p.smooth.size()) - 1);
        touch(cat);
    }

    const std::vector<std::string>& categories() const { return order_; }

    std::map<std::string, double> evaluate(const MathProgram& p, const Vec& x) const {
        std::map<std::string, double> out;
        for (const auto& c : order_) out[c] = 0.0;
        for (const auto& l : lin_) out[l.cat] += l.c * x(l.var);
        for (const auto& [cat, c] : consts_) out[cat] += c;
        for (const auto& [cat, i] : smooth_) out[cat] += p.smooth[i].value(x(p.smooth[i].var));
        return out;
    }

    double total(const MathProgram& p, const Vec& x) const {
        double s = 0.0;
        for (const auto& [cat, v] : evaluate(p, x)) s += v;
        return s;
    }

private:
    struct Lin {
        std::string cat;
        int var;
        double c;
    };
    void touch(const std::string& cat) {
        for (const auto& c : order_)
            if (c == cat) return;
        order_.push_back(cat);
    }
    std::vector<Lin> lin_;
    std::vector<std::pair<std::string, double>> consts_;
    std::vector<std::pair<std::string, int>> smooth_;
    std::vector<std::string> order_;
};

/**
 * Energy-balance nodes, one per carrier. Components declare ports, attach
 * signed fluxes (positive = supplied to the node) and fixed demands;
 * compose() emits one equality per node and slot.
 */
class Network {
public:
    explicit Network(int M) : M_(M) { require(M >= 1, "network: horizon must be positive"); }

    int horizon() const { return M_; }

    void add_port(const std::string& component, Carrier c) { ports_[component].insert(c); }

    void flux(const std::string& component, Carrier c, int k, int var, double sign) {
        check_port(component, c);
        require(k >= 0 && k < M_, "network: slot out of range for '" + component + "'");
        node(c).terms[k].push_back({var, sign});
        used_.insert({component, c});
    }

    void demand(const std::string& component, Carrier c, int k, double value) {
        check_port(component, c);
        require(k >= 0 && k < M_, "network: slot out of range for '" + component + "'");
        node(c).demand[k] += value;
        used_.insert({component, c});
    }

    /// Grid exchange E_L, positive when imported.
    std::vector<int> connect_grid(MathProgram& p, double lo = -inf, double hi = inf) {
        if (!grid_.empty()) throw ModelError("network: two grid connections");
        for (int k = 0; k < M_; ++k) grid_.push_back(p.add_var("E_L[" + std::to_string(k) + "]", lo, hi));
        node(Carrier::electrical);
        return grid_;
    }

    const std::vector<int>& grid() const { return grid_; }

    /// Row indices per carrier and slot.
    std::map<Carrier, std::vector<int>> compose(MathProgram& p) const {
        for (const auto& [comp, set] : ports_)
            for (Carrier c : set)
                if (!used_.count({comp, c}))
                    throw ModelError("network: dangling " + std::string(carrier_name(c)) + " port of '" + comp + "'");
        std::map<Carrier, std::vector<int>> rows;
        for (const auto& [c, nd] : nodes_) {
            for (int k = 0; k < M_; ++k) {
                std::vector<Term> t = nd.terms[k];
                if (c == Carrier::electrical && !grid_.empty()) t.push_back({grid_[k], 1.0});
                for (const auto& term : t)
                    if (term.var < 0 || term.var >= p.n_vars())
                        throw ModelError("network: dangling flux in " + std::string(carrier_name(c)) + " node");
                const std::string name = std::string(carrier_name(c)) + ".balance[" + std::to_string(k) + "]";
                rows[c].push_back(p.add_row(name, std::move(t), nd.demand[k], nd.demand[k], Tag::interconnection));
            }
        }
        return rows;
    }

private:
    struct Node {
        std::vector<std::vector<Term>> terms;
        std::vector<double> demand;
    };

    Node& node(Carrier c) {
        auto it = nodes_.find(c);
        if (it == nodes_.end()) it = nodes_.emplace(c, Node{std::vector<std::vector<Term>>(M_), std::vector<double>(M_, 0.0)}).first;
        return it->second;
    }

    void check_port(const std::string& component, Carrier c) const {
        auto it = ports_.find(component);
        if (it == ports_.end()) throw ModelError("network: unknown component '" + component + "'");
        if (!it->second.count(c))
            throw ModelError("network: carrier mismatch, '" + component + "' has no " + carrier_name(c) + " port");
    }

    int M_;
    std::map<std::string, std::set<Carrier>> ports_;
    std::set<std::pair<std::string, Carrier>> used_;
    std::map<Carrier, Node> nodes_;
    std::vector<int> grid_;
};

struct TariffPiece {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Per-slot pieces ordered left to right; the cost is their maximum.
struct Tariff {
    std::vector<std::vector<TariffPiece>> slots;

    static Tariff linear(const std::vector<double>& price) {
        Tariff t;
        for (double v : price) t.slots.push_back({{v, 0.0}});
        return t;
    }

    /// Buy above zero, sell below zero.
    static Tariff buy_sell(const std::vector<double>& buy, const std::vector<double>& sell) {
        require(buy.size() == sell.size(), "tariff: buy and sell series differ in length");
        Tariff t;
        for (std::size_t k = 0; k < buy.size(); ++k) t.slots.push_back({{sell[k], 0.0}, {buy[k], 0.0}});
        return t;
    }

    void validate() const {
        for (std::size_t k = 0; k < slots.size(); ++k) {
            require(!slots[k].empty(), "tariff: slot " + std::to_string(k) + " has no pieces");
            for (std::size_t i = 1; i < slots[k].size(); ++i)
                if (slots[k][i].slope < slots[k][i - 1].slope) {
                    std::ostringstream os;
                    os << "tariff: nonconvex in slot " << k << " (slope " << slots[k][i].slope << " after "
                       << slots[k][i - 1].slope << ")";
                    throw ModelError(os.str());
                }
        }
    }

    double cost(int k, double e) const {
        double v = -inf;
        for (const auto& pc : slots.at(k)) v = std::max(v, pc.slope * e + pc.intercept);
        return v;
    }
};

/// Epigraph t(k) >= c1 E_L + c0 for every piece; single-piece slots are charged directly (entry -1).
inline std::vector<int> add_tariff(MathProgram& p, CostBook& book, const Tariff& tariff, const std::vector<int>& E_L,
                                   const std::string& cat = "C_l") {
    tariff.validate();
    require(tariff.slots.size() == E_L.size(), "tariff: one slot per grid exchange variable");
    std::vector<int> t;
    for (std::size_t k = 0; k < E_L.size(); ++k) {
        const auto& pcs = tariff.slots[k];
        if (pcs.size() == 1) {
            book.linear(p, cat, E_L[k], pcs[0].slope);
            if (pcs[0].intercept != 0.0) book.constant(p, cat, pcs[0].intercept);
            t.push_back(-1);
            continue;
        }
        const std::string ks = "[" + std::to_string(k) + "]";
        const int v = p.add_var("tariff.t" + ks, -inf, inf);
        book.linear(p, cat, v, 1.0);
        for (std::size_t i = 0; i < pcs.size(); ++i)
            p.add_row("tariff.piece" + std::to_string(i) + ks, {{v, 1.0}, {E_L[k], -pcs[i].slope}}, pcs[i].intercept,
                      inf, Tag::single_component);
        t.push_back(v);
    }
    return t;
}

struct StartupBoundary {
    bool periodic = true;
    int initial = 0;  // status before slot 0 when not periodic
};

/// sigma(k) >= delta(k) - delta(k-1), sigma >= 0, cost C sigma(k).
inline std::vector<int> add_startup(MathProgram& p, CostBook& book, const std::string& cat,
                                    const std::vector<int>& delta, double C, StartupBoundary bnd,
                                    const std::string& name) {
    require(C >= 0.0, "startup cost of '" + name + "' must be nonnegative");
    require(bnd.initial == 0 || bnd.initial == 1, "startup: initial status must be 0 or 1");
    const int M = static_cast<int>(delta.size());
    std::vector<int> sigma;
    for (int k = 0; k < M; ++k) {
        const std::string ks = "[" + std::to_string(k) + "]";
        const int s = p.add_var(name + ".startup" + ks, 0.0, 1.0);
        book.linear(p, cat, s, C);
        if (k > 0 || bnd.periodic) {
            const int prev = delta[k > 0 ? k - 1 : M - 1];
            if (prev == delta[k]) {
                sigma.push_back(s);
                continue;
            }
            p.add_row(name + ".startup_def" + ks, {{s, 1.0}, {delta[k], -1.0}, {prev, 1.0}}, 0.0, inf,
                      Tag::single_component);
        } else {
            p.add_row(name + ".startup_def" + ks, {{s, 1.0}, {delta[k], -1.0}}, -bnd.initial, inf,
                      Tag::single_component);
        }
        sigma.push_back(s);
    }
    return sigma;
}

/// psi(k) w(k) delta_h with w = delta u already linearized.
inline void add_fuel_cost(MathProgram& p, CostBook& book, const std::vector<int>& w, const std::vector<double>& psi,
                          double delta_hours, const std::string& cat = "C_f") {
    require(w.size() == psi.size(), "fuel cost: one price per slot");
    require(delta_hours > 0.0, "fuel cost: slot length must be positive");
    for (std::size_t k = 0; k < w.size(); ++k) book.linear(p, cat, w[k], psi[k] * delta_hours);
}

/// lo <= x <= hi as rows tagged control.
inline void add_box(MathProgram& p, const std::vector<int>& vars, const std::vector<double>& lo,
                    const std::vector<double>& hi, const std::string& name) {
    require(vars.size() == lo.size() && vars.size() == hi.size(), "box: size mismatch");
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (lo[i] > hi[i]) {
            std::ostringstream os;
            os << name << ": contradictory bounds " << lo[i] << " > " << hi[i] << " at entry " << i;
            throw ModelError(os.str());
        }
        p.add_row(name + "[" + std::to_string(i) + "]", {{vars[i], 1.0}}, lo[i], hi[i], Tag::control);
    }
}

inline int add_equal(MathProgram& p, int a, int b, const std::string& name) {
    return p.add_row(name, {{a, 1.0}, {b, -1.0}}, 0.0, 0.0, Tag::control);
}

}  // namespace district::net
