#pragma once

#include "district/program.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace district::opt {

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string code(char prefix, int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%07d", prefix, i + 1);
    return buf;
}

inline std::string field(const std::string& s, std::size_t w) {
    return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

inline void no_smooth(const MathProgram& p, const char* fmt) {
    if (p.has_smooth())
        throw ModelError(std::string(fmt) +
                         " export: program has smooth (biquadratic) objective terms; convert the chiller to a PWA model first");
}

inline double parse_num(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ModelError("line " + std::to_string(line) + ": bad number '" + s + "'");
    }
}

}  // namespace detail

/**
 * Fixed-format MPS. Names are 8-character codes laid out in the standard
 * columns; numbers carry 17 significant digits. The original names travel in
 * comment lines and are restored by read_mps.
 */
inline void write_mps(const MathProgram& p, std::ostream& os) {
    using detail::code;
    using detail::field;
    using detail::num;
    detail::no_smooth(p, "MPS");
    for (int j = 0; j < p.n_vars(); ++j) os << "* " << code('x', j) << " " << p.vars[j].name << "\n";
    for (int i = 0; i < p.n_rows(); ++i) os << "* " << code('r', i) << " " << p.rows[i].name << "\n";
    os << field("NAME", 14) << (p.name.empty() ? "DISTRICT" : p.name.substr(0, 8)) << "\n";
    os << "ROWS\n N  COST\n";
    for (int i = 0; i < p.n_rows(); ++i) {
        const auto& r = p.rows[i];
        const char* t = r.lo == r.hi ? "E" : (std::isfinite(r.lo) ? "G" : (std::isfinite(r.hi) ? "L" : "N"));
        os << " " << field(t, 3) << code('r', i) << "\n";
    }
    std::vector<std::vector<std::pair<int, double>>> cols(p.n_vars());
    for (int i = 0; i < p.n_rows(); ++i)
        for (const auto& t : p.rows[i].terms) cols[t.var].emplace_back(i, t.coef);
    os << "COLUMNS\n";
    for (int j = 0; j < p.n_vars(); ++j) {
        if (p.cost[j] != 0.0) os << "    " << field(code('x', j), 10) << field("COST", 10) << num(p.cost[j]) << "\n";
        for (auto [i, v] : cols[j]) os << "    " << field(code('x', j), 10) << field(code('r', i), 10) << num(v) << "\n";
        if (p.cost[j] == 0.0 && cols[j].empty()) os << "    " << field(code('x', j), 10) << field("COST", 10) << "0\n";
    }
    os << "RHS\n";
    if (p.cost_offset != 0.0) os << "    " << field("RHS", 10) << field("COST", 10) << num(-p.cost_offset) << "\n";
    for (int i = 0; i < p.n_rows(); ++i) {
        const auto& r = p.rows[i];
        const double rhs = std::isfinite(r.lo) ? r.lo : (std::isfinite(r.hi) ? r.hi : 0.0);
        if (rhs != 0.0) os << "    " << field("RHS", 10) << field(code('r', i), 10) << num(rhs) << "\n";
    }
    bool ranges = false;
    for (int i = 0; i < p.n_rows(); ++i) {
        const auto& r = p.rows[i];
        if (r.lo != r.hi && std::isfinite(r.lo) && std::isfinite(r.hi)) {
            if (!ranges) os << "RANGES\n";
            ranges = true;
            os << "    " << field("RNG", 10) << field(code('r', i), 10) << num(r.hi - r.lo) << "\n";
        }
    }
    os << "BOUNDS\n";
    auto bound = [&](const char* t, int j, const std::string& v) {
        os << " " << field(t, 3) << field("BND", 10) << field(code('x', j), 10) << v << "\n";
    };
    for (int j = 0; j < p.n_vars(); ++j) {
        const auto& v = p.vars[j];
        if (v.type == VarType::binary && v.lo == 0.0 && v.hi == 1.0) {
            bound("BV", j, "");
            continue;
        }
        if (v.type == VarType::binary) {
            bound("BV", j, "");
            bound(v.lo == v.hi ? "FX" : "LO", j, num(v.lo));
            if (v.lo != v.hi) bound("UP", j, num(v.hi));
            continue;
        }
        if (v.lo == v.hi) {
            bound("FX", j, num(v.lo));
        } else if (!std::isfinite(v.lo) && !std::isfinite(v.hi)) {
            bound("FR", j, "");
        } else {
            if (!std::isfinite(v.lo)) bound("MI", j, "");
            else if (v.lo != 0.0) bound("LO", j, num(v.lo));
            if (std::isfinite(v.hi)) bound("UP", j, num(v.hi));
        }
    }
    os << "ENDATA\n";
}

inline MathProgram read_mps(std::istream& is) {
    MathProgram p;
    std::map<std::string, std::string> names;
    std::map<std::string, int> row_of, col_of;
    std::vector<char> row_type;
    std::string obj_name;
    std::string section, line;
    int ln = 0;
    std::vector<char> touched_bound;
    auto col = [&](const std::string& c) {
        auto it = col_of.find(c);
        if (it != col_of.end()) return it->second;
        const int j = p.add_var(names.count(c) ? names[c] : c, 0.0, inf);
        col_of[c] = j;
        return j;
    };
    while (std::getline(is, line)) {
        ++ln;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::vector<std::string> tok;
        for (std::string t; ss >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (line[0] == '*') {
            if (tok.size() >= 3) names[tok[1]] = line.substr(line.find(tok[1]) + tok[1].size() + 1);
            continue;
        }
        if (line[0] != ' ') {
            section = tok[0];
            if (section == "NAME" && tok.size() > 1) p.name = tok[1];
            if (section == "ENDATA") break;
            continue;
        }
        if (section == "ROWS") {
            if (tok.size() != 2) throw ModelError("line " + std::to_string(ln) + ": malformed ROWS entry");
            const char t = tok[0][0];
            if (t == 'N' && obj_name.empty()) {
                obj_name = tok[1];
                continue;
            }
            double lo = -inf, hi = inf;
            if (t == 'E') lo = hi = 0.0;
            else if (t == 'G') lo = 0.0;
            else if (t == 'L') hi = 0.0;
            else if (t != 'N') throw ModelError("line " + std::to_string(ln) + ": unknown row type");
            row_of[tok[1]] = p.n_rows();
            row_type.push_back(t);
            p.rows.push_back({names.count(tok[1]) ? names[tok[1]] : tok[1], {}, lo, hi, Tag::single_component});
        } else if (section == "COLUMNS") {
            if (tok.size() < 3 || tok.size() % 2 == 0) {
                if (tok.size() >= 2 && tok[1] == "'MARKER'") continue;
                throw ModelError("line " + std::to_string(ln) + ": malformed COLUMNS entry");
            }
            const int j = col(tok[0]);
            for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
                const double v = detail::parse_num(tok[k + 1], ln);
                if (tok[k] == obj_name) {
                    p.cost[j] += v;
                } else {
                    auto it = row_of.find(tok[k]);
                    if (it == row_of.end()) throw ModelError("line " + std::to_string(ln) + ": unknown row " + tok[k]);
                    if (v != 0.0) p.rows[it->second].terms.push_back({j, v});
                }
            }
        } else if (section == "RHS") {
            for (std::size_t k = tok.size() % 2 == 1 ? 1 : 0; k + 1 < tok.size(); k += 2) {
                const double v = detail::parse_num(tok[k + 1], ln);
                if (tok[k] == obj_name) {
                    p.cost_offset = -v;
                    continue;
                }
                auto it = row_of.find(tok[k]);
                if (it == row_of.end()) throw ModelError("line " + std::to_string(ln) + ": unknown row " + tok[k]);
                auto& r = p.rows[it->second];
                switch (row_type[it->second]) {
                case 'E': r.lo = r.hi = v; break;
                case 'G': r.lo = v; break;
                case 'L': r.hi = v; break;
                default: break;
                }
            }
        } else if (section == "RANGES") {
            for (std::size_t k = tok.size() % 2 == 1 ? 1 : 0; k + 1 < tok.size(); k += 2) {
                const double v = detail::parse_num(tok[k + 1], ln);
                auto it = row_of.find(tok[k]);
                if (it == row_of.end()) throw ModelError("line " + std::to_string(ln) + ": unknown row " + tok[k]);
                auto& r = p.rows[it->second];
                switch (row_type[it->second]) {
                case 'G': r.hi = r.lo + std::abs(v); break;
                case 'L': r.lo = r.hi - std::abs(v); break;
                case 'E':
                    if (v > 0) r.hi = r.lo + v;
                    else r.lo = r.hi + v;
                    break;
                default: break;
                }
            }
        } else if (section == "BOUNDS") {
            if (tok.size() < 3) throw ModelError("line " + std::to_string(ln) + ": malformed BOUNDS entry");
            const std::string& t = tok[0];
            const int j = col(tok[2]);
            auto& v = p.vars[j];
            const bool needs_value = t == "UP" || t == "LO" || t == "FX";
            if (needs_value && tok.size() < 4) throw ModelError("line " + std::to_string(ln) + ": bound without value");
            const double val = tok.size() >= 4 ? detail::parse_num(tok[3], ln) : 0.0;
            if (t == "UP") {
                v.hi = val;
                if (val < 0.0 && v.lo == 0.0) v.lo = -inf;
            } else if (t == "LO") v.lo = val;
            else if (t == "FX") v.lo = v.hi = val;
            else if (t == "FR") v.lo = -inf, v.hi = inf;
            else if (t == "MI") v.lo = -inf;
            else if (t == "PL") v.hi = inf;
            else if (t == "BV") v.type = VarType::binary, v.lo = 0.0, v.hi = 1.0;
            else throw ModelError("line " + std::to_string(ln) + ": unknown bound type " + t);
        } else {
            throw ModelError("line " + std::to_string(ln) + ": data outside a section");
        }
    }
    return p;
}

/// CPLEX-style LP text. Ranged rows are split into a pair of one-sided rows.
inline void write_lp(const MathProgram& p, std::ostream& os) {
    using detail::code;
    using detail::num;
    detail::no_smooth(p, "LP");
    for (int j = 0; j < p.n_vars(); ++j) os << "\\ " << code('x', j) << " " << p.vars[j].name << "\n";
    auto expr = [&](const std::vector<Term>& terms) {
        std::string s;
        for (const auto& t : terms) {
            if (t.coef == 0.0) continue;
            s += (t.coef < 0 ? " - " : " + ") + num(std::abs(t.coef)) + " " + code('x', t.var);
        }
        return s.empty() ? std::string(" 0 ") + code('x', 0) : s;
    };
    os << "Minimize\n obj:";
    std::vector<Term> obj;
    for (int j = 0; j < p.n_vars(); ++j)
        if (p.cost[j] != 0.0) obj.push_back({j, p.cost[j]});
    os << (obj.empty() && p.n_vars() ? expr({{0, 0.0}}) : expr(obj));
    if (p.cost_offset != 0.0) os << (p.cost_offset < 0 ? " - " : " + ") << num(std::abs(p.cost_offset));
    os << "\nSubject To\n";
    for (int i = 0; i < p.n_rows(); ++i) {
        const auto& r = p.rows[i];
        const std::string e = expr(r.terms);
        if (r.lo == r.hi) {
            os << " " << code('r', i) << ":" << e << " = " << num(r.lo) << "\n";
            continue;
        }
        if (std::isfinite(r.lo)) os << " " << code('r', i) << "_lo:" << e << " >= " << num(r.lo) << "\n";
        if (std::isfinite(r.hi)) os << " " << code('r', i) << "_hi:" << e << " <= " << num(r.hi) << "\n";
    }
    os << "Bounds\n";
    std::vector<int> bins;
    for (int j = 0; j < p.n_vars(); ++j) {
        const auto& v = p.vars[j];
        if (v.type == VarType::binary) bins.push_back(j);
        const std::string x = code('x', j);
        if (v.lo == v.hi) os << " " << x << " = " << num(v.lo) << "\n";
        else if (!std::isfinite(v.lo) && !std::isfinite(v.hi)) os << " " << x << " free\n";
        else
            os << " " << (std::isfinite(v.lo) ? num(v.lo) : "-inf") << " <= " << x << " <= "
               << (std::isfinite(v.hi) ? num(v.hi) : "+inf") << "\n";
    }
    if (!bins.empty()) {
        os << "Binaries\n";
        for (int j : bins) os << " " << code('x', j) << "\n";
    }
    os << "End\n";
}

inline MathProgram read_lp(std::istream& is) {
    MathProgram p;
    std::map<std::string, std::string> names;
    std::map<std::string, int> col_of;
    std::string text, line;
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] == '\\') {
            std::istringstream ss(line.substr(1));
            std::string code, name;
            ss >> code;
            std::getline(ss >> std::ws, name);
            if (!code.empty()) names[code] = name;
            continue;
        }
        text += line + "\n";
    }
    std::istringstream ss(text);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);

    auto col = [&](const std::string& c) {
        auto it = col_of.find(c);
        if (it != col_of.end()) return it->second;
        const int j = p.add_var(names.count(c) ? names[c] : c, 0.0, inf);
        col_of[c] = j;
        return j;
    };
    auto is_num = [](const std::string& s) {
        if (s.empty()) return false;
        char* end = nullptr;
        std::strtod(s.c_str(), &end);
        return end && *end == '\0';
    };
    auto to_num = [](const std::string& s) {
        if (s == "+inf" || s == "inf" || s == "infinity") return inf;
        if (s == "-inf" || s == "-infinity") return -inf;
        return std::stod(s);
    };

    std::size_t k = 0;
    auto section = [&](const std::string& s) {
        return s == "Minimize" || s == "Subject" || s == "Bounds" || s == "Binaries" || s == "End";
    };
    // Linear expression up to a relational operator or a section keyword.
    auto parse_expr = [&](std::vector<Term>& terms, double& constant) {
        double sign = 1.0;
        while (k < tok.size() && !section(tok[k]) && tok[k] != "<=" && tok[k] != ">=" && tok[k] != "=") {
            const std::string& t = tok[k];
            if (t == "+") sign = 1.0, ++k;
            else if (t == "-") sign = -1.0, ++k;
            else if (is_num(t)) {
                const double c = std::stod(t);
                if (k + 1 < tok.size() && !is_num(tok[k + 1]) && tok[k + 1] != "+" && tok[k + 1] != "-" &&
                    !section(tok[k + 1]) && tok[k + 1] != "<=" && tok[k + 1] != ">=" && tok[k + 1] != "=" &&
                    tok[k + 1].back() != ':') {
                    terms.push_back({col(tok[k + 1]), sign * c});
                    k += 2;
                } else {
                    constant += sign * c;
                    ++k;
                }
                sign = 1.0;
            } else if (t.back() == ':') {
                break;
            } else {
                terms.push_back({col(t), sign});
                sign = 1.0;
                ++k;
            }
        }
    };

    while (k < tok.size()) {
        const std::string t = tok[k];
        if (t == "Minimize") {
            ++k;
            if (k < tok.size() && tok[k].back() == ':') ++k;
            std::vector<Term> terms;
            double c0 = 0.0;
            parse_expr(terms, c0);
            for (const auto& tm : terms) p.cost[tm.var] += tm.coef;
            p.cost_offset = c0;
        } else if (t == "Subject") {
            k += 2;
            while (k < tok.size() && !section(tok[k])) {
                std::string name = tok[k];
                require(name.back() == ':', "LP text: constraint without a name near '" + name + "'");
                name.pop_back();
                ++k;
                std::vector<Term> terms;
                double c0 = 0.0;
                parse_expr(terms, c0);
                require(k + 1 < tok.size(), "LP text: truncated constraint " + name);
                const std::string op = tok[k];
                const double rhs = to_num(tok[k + 1]) - c0;
                k += 2;
                double lo = -inf, hi = inf;
                if (op == "=") lo = hi = rhs;
                else if (op == ">=") lo = rhs;
                else hi = rhs;
                std::string base = name;
                for (const char* sfx : {"_lo", "_hi"})
                    if (base.size() > 3 && base.substr(base.size() - 3) == sfx) base = base.substr(0, base.size() - 3);
                if (base != name && !p.rows.empty() && p.rows.back().name == base) {
                    auto& r = p.rows.back();
                    r.lo = std::max(r.lo, lo);
                    r.hi = std::min(r.hi, hi);
                    continue;
                }
                p.rows.push_back({base, std::move(terms), lo, hi, Tag::single_component});
            }
        } else if (t == "Bounds") {
            ++k;
            while (k < tok.size() && !section(tok[k])) {
                if (k + 1 < tok.size() && tok[k + 1] == "free") {
                    auto& v = p.vars[col(tok[k])];
                    v.lo = -inf;
                    v.hi = inf;
                    k += 2;
                } else if (k + 2 < tok.size() && tok[k + 1] == "=") {
                    auto& v = p.vars[col(tok[k])];
                    v.lo = v.hi = to_num(tok[k + 2]);
                    k += 3;
                } else if (k + 4 < tok.size() && tok[k + 1] == "<=" && tok[k + 3] == "<=") {
                    auto& v = p.vars[col(tok[k + 2])];
                    v.lo = to_num(tok[k]);
                    v.hi = to_num(tok[k + 4]);
                    k += 5;
                } else {
                    throw ModelError("LP text: unsupported bound near '" + tok[k] + "'");
                }
            }
        } else if (t == "Binaries") {
            ++k;
            while (k < tok.size() && !section(tok[k])) {
                auto& v = p.vars[col(tok[k])];
                v.type = VarType::binary;
                v.lo = std::max(v.lo, 0.0);
                v.hi = std::min(v.hi, 1.0);
                ++k;
            }
        } else if (t == "End") {
            break;
        } else {
            throw ModelError("LP text: unexpected token '" + t + "'");
        }
    }
    // Restore the original column order.
    MathProgram out;
    out.cost_offset = p.cost_offset;
    std::vector<std::pair<std::string, int>> order;
    for (auto& [c, j] : col_of) order.emplace_back(c, j);
    std::sort(order.begin(), order.end());
    std::vector<int> perm(p.n_vars());
    for (std::size_t a = 0; a < order.size(); ++a) {
        const auto& v = p.vars[order[a].second];
        perm[order[a].second] = out.add_var(v.name, v.lo, v.hi, p.cost[order[a].second], v.type);
    }
    for (auto r : p.rows) {
        for (auto& tm : r.terms) tm.var = perm[tm.var];
        out.rows.push_back(std::move(r));
    }
    return out;
}

inline void export_program(const MathProgram& p, const std::string& path, const std::string& format) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    if (format == "mps") write_mps(p, f);
    else if (format == "lp") write_lp(p, f);
    else throw ModelError("unknown export format '" + format + "' (use mps or lp)");
}

}  // namespace district::opt
