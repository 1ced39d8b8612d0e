#pragma once

#include "district/models.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace district::scn {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kelvin = 273.15;

/// Numeric CSV with a header row.
struct Csv {
    fs::path path;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    bool has(const std::string& name) const {
        return std::find(header.begin(), header.end(), name) != header.end();
    }

    std::vector<double> column(const std::string& name) const {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError(path.string() + ": missing column '" + name + "'");
        const auto c = static_cast<std::size_t>(it - header.begin());
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r[c]);
        return v;
    }
};

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

inline std::string read_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

/// Text columns are kept in `labels` keyed by column name.
inline Csv parse_csv(const std::string& text, const fs::path& path,
                     std::map<std::string, std::vector<std::string>>* labels = nullptr) {
    Csv csv;
    csv.path = path;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto cells = split(line);
        if (csv.header.empty()) {
            csv.header = cells;
            continue;
        }
        if (cells.size() != csv.header.size())
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(csv.header.size()) + " fields, found " + std::to_string(cells.size()));
        std::vector<double> row;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            std::size_t used = 0;
            try {
                v = std::stod(cells[c], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != cells[c].size() || cells[c].empty()) {
                if (!labels)
                    throw ParseError(path.string() + ":" + std::to_string(lineno) + ": '" + cells[c] +
                                     "' is not a number");
                (*labels)[csv.header[c]].push_back(cells[c]);
                v = std::numeric_limits<double>::quiet_NaN();
            }
            row.push_back(v);
        }
        csv.rows.push_back(std::move(row));
    }
    if (csv.header.empty()) throw ParseError(path.string() + ": empty file");
    return csv;
}

inline Csv read_csv(const fs::path& path, std::map<std::string, std::vector<std::string>>* labels = nullptr) {
    return parse_csv(read_file(path), path, labels);
}

/**
 * Wall composition table with columns group, element, k, thickness, density, cp.
 * Layers keep file order within a group.
 */
struct LayerRow {
    std::string element;
    thermal::SliceSpec slice;
};

inline std::map<std::string, std::vector<LayerRow>> read_wall_table(const fs::path& path) {
    std::map<std::string, std::vector<std::string>> labels;
    const Csv csv = read_csv(path, &labels);
    for (const char* c : {"k", "thickness", "density", "cp"}) (void)csv.column(c);
    if (!labels.count("group") || !labels.count("element"))
        throw ParseError(path.string() + ": needs text columns 'group' and 'element'");
    const auto k = csv.column("k"), t = csv.column("thickness"), rho = csv.column("density"), cp = csv.column("cp");
    std::map<std::string, std::vector<LayerRow>> out;
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        thermal::SliceSpec s;
        s.conductivity = k[i];
        s.thickness = t[i];
        s.density = rho[i];
        s.specific_heat = cp[i];
        out[labels["group"].at(i)].push_back({labels["element"].at(i), s});
    }
    return out;
}

inline double energy_unit_of(const std::string& u) {
    if (u == "J") return 1.0;
    if (u == "kJ") return 1e3;
    if (u == "MJ") return 1e6;
    throw ParseError("unknown energy unit '" + u + "' (J, kJ or MJ)");
}

struct SimulationSettings {
    double step = 60.0;
    double duration = 0.0;  // 0: the scenario horizon
    bool thermostat = false;
    double heat_on_below = 20.0 + kelvin;
    double cool_on_above = 27.0 + kelvin;
    double kp = 0.0, ki = 0.0;  // 0: defaults from zone capacity
    double heat_max = inf, cool_max = inf;
    double initial = 22.0 + kelvin;
};

enum class Kind { building, microgrid };

struct Scenario {
    std::string name;
    Kind kind = Kind::building;
    fs::path file;
    std::string hash;
    double energy_unit = 1e6;
    std::string energy_unit_name = "MJ";
    std::vector<int> rates{1};
    int mr = 1;
    net::BuildingScenario building;
    net::MicrogridScenario microgrid;
    std::vector<std::string> zone_names;
    SimulationSettings sim;
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

class Reader {
public:
    Reader(const pt::ptree& t, std::string section, fs::path file)
        : t_(t), section_(std::move(section)), file_(std::move(file)) {}

    template <class T>
    T get(const std::string& key) const {
        auto v = t_.get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) throw ParseError(file_.string() + ": [" + section_ + "] missing key '" + key + "'");
        return convert<T>(key, *v);
    }

    template <class T>
    T get(const std::string& key, T fallback) const {
        auto v = t_.get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        return v ? convert<T>(key, *v) : fallback;
    }

    bool has(const std::string& key) const {
        return t_.get_optional<std::string>(pt::ptree::path_type(key, '\0')).has_value();
    }

    double celsius(const std::string& key) const { return get<double>(key) + kelvin; }
    double celsius(const std::string& key, double fallback_c) const { return get<double>(key, fallback_c) + kelvin; }

private:
    template <class T>
    T convert(const std::string& key, const std::string& raw) const {
        const std::string v = trim(raw);
        if constexpr (std::is_same_v<T, std::string>) {
            return v;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (v == "true" || v == "yes" || v == "1") return true;
            if (v == "false" || v == "no" || v == "0") return false;
            throw ParseError(file_.string() + ": [" + section_ + "] " + key + " = '" + v + "' is not a boolean");
        } else {
            std::istringstream is(v);
            T out{};
            is >> out;
            if (is.fail() || !is.eof())
                throw ParseError(file_.string() + ": [" + section_ + "] " + key + " = '" + v + "' is not a number");
            return out;
        }
    }

    const pt::ptree& t_;
    std::string section_;
    fs::path file_;
};

inline std::pair<std::string, std::string> section_kind(const std::string& s) {
    const auto c = s.find(':');
    if (c == std::string::npos) return {s, ""};
    return {trim(s.substr(0, c)), trim(s.substr(c + 1))};
}

inline thermal::Side parse_side(const std::string& v, const std::vector<std::string>& zones, double h, double eps,
                                const std::string& where) {
    if (v == "outside") return thermal::Side::facing_outside(h, eps);
    if (v == "ground") return thermal::Side::facing_ground();
    if (v.rfind("zone ", 0) == 0) {
        const std::string z = trim(v.substr(5));
        auto it = std::find(zones.begin(), zones.end(), z);
        if (it == zones.end()) throw ParseError(where + ": unknown zone '" + z + "'");
        return thermal::Side::facing_zone(static_cast<int>(it - zones.begin()), h, eps);
    }
    throw ParseError(where + ": side must be 'outside', 'ground' or 'zone <name>', got '" + v + "'");
}

inline std::vector<int> parse_rates(const std::string& s, const std::string& where) {
    std::vector<int> r;
    for (const auto& c : split(s)) {
        try {
            r.push_back(std::stoi(c));
        } catch (const std::exception&) {
            throw ParseError(where + ": bad rate '" + c + "'");
        }
    }
    return r;
}

inline void need_rows(const Csv& c, std::size_t n) {
    if (c.rows.size() != n)
        throw ParseError(c.path.string() + ": expected " + std::to_string(n) + " rows, found " +
                         std::to_string(c.rows.size()));
}

}  // namespace detail

inline Scenario load_scenario(const fs::path& file) {
    const std::string text = read_file(file);
    pt::ptree root;
    try {
        std::istringstream is(text);
        pt::read_ini(is, root);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(file.string() + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    const fs::path dir = file.parent_path();
    std::uint64_t h = detail::fnv1a(text);
    auto resolve = [&](const std::string& rel) {
        fs::path p = dir / rel;
        if (!fs::exists(p)) throw ParseError(file.string() + ": referenced file '" + p.string() + "' does not exist");
        h = detail::fnv1a(read_file(p), h);
        return p;
    };

    auto top = root.get_child_optional(pt::ptree::path_type("scenario", '\0'));
    if (!top) throw ParseError(file.string() + ": missing [scenario] section");
    detail::Reader g(*top, "scenario", file);

    Scenario sc;
    sc.file = file;
    sc.name = g.get<std::string>("name", file.stem().string());
    const std::string kind = g.get<std::string>("kind");
    if (kind == "building")
        sc.kind = Kind::building;
    else if (kind == "microgrid")
        sc.kind = Kind::microgrid;
    else
        throw ParseError(file.string() + ": unknown kind '" + kind + "'");
    sc.energy_unit_name = g.get<std::string>("energy_unit", "MJ");
    sc.energy_unit = energy_unit_of(sc.energy_unit_name);
    const double delta = g.get<double>("delta");
    const int M = g.get<int>("M");
    if (!(delta > 0.0) || M < 1) throw ParseError(file.string() + ": need delta > 0 and M >= 1");
    sc.rates = detail::parse_rates(g.get<std::string>("rates", "1"), file.string());
    sc.mr = g.get<int>("mr", 1);

    std::map<std::string, std::string> series;
    if (auto s = root.get_child_optional(pt::ptree::path_type("series", '\0')))
        for (const auto& [k, v] : *s) series[k] = trim(v.data());
    auto series_file = [&](const std::string& key) {
        auto it = series.find(key);
        if (it == series.end()) throw ParseError(file.string() + ": [series] missing key '" + key + "'");
        return resolve(it->second);
    };

    if (auto s = root.get_child_optional(pt::ptree::path_type("simulation", '\0'))) {
        detail::Reader r(*s, "simulation", file);
        sc.sim.step = r.get<double>("step", 60.0);
        sc.sim.duration = r.get<double>("duration", 0.0);
        sc.sim.thermostat = r.get<std::string>("mode", "free-float") == "thermostat";
        sc.sim.heat_on_below = r.celsius("heat_on_below", 20.0);
        sc.sim.cool_on_above = r.celsius("cool_on_above", 27.0);
        sc.sim.kp = r.get<double>("kp", 0.0);
        sc.sim.ki = r.get<double>("ki", 0.0);
        sc.sim.heat_max = r.get<double>("heat_max", inf);
        sc.sim.cool_max = r.get<double>("cool_max", inf);
        sc.sim.initial = r.celsius("initial", 22.0);
    }

    if (sc.kind == Kind::building) {
        auto& b = sc.building;
        b.delta = delta;
        b.M = M;
        b.energy_unit = sc.energy_unit;
        const std::string obj = g.get<std::string>("objective", "electric");
        if (obj == "cooling")
            b.objective = net::Objective::cooling;
        else if (obj == "electric")
            b.objective = net::Objective::electric;
        else if (obj == "priced")
            b.objective = net::Objective::priced;
        else
            throw ParseError(file.string() + ": unknown objective '" + obj + "'");
        const std::string curve = g.get<std::string>("chiller_curve", "biquadratic");
        if (curve != "biquadratic" && curve != "pwa") throw ParseError(file.string() + ": unknown chiller_curve");
        b.curve = curve == "pwa" ? net::ChillerCurve::pwa : net::ChillerCurve::biquadratic;
        b.periodic = g.get<bool>("periodic", true);
        b.tie_zones = g.get<bool>("tie_zones", false);
        const double min_cap = g.get<double>("min_capacity", 1000.0);

        std::vector<thermal::ZoneSpec> zones;
        std::vector<thermal::WallSpec> walls;
        for (const auto& [sec, t] : root) {
            auto [what, nm] = detail::section_kind(sec);
            if (what != "zone") continue;
            detail::Reader r(t, sec, file);
            thermal::ZoneSpec z;
            z.name = nm;
            z.capacity = r.get<double>("capacity");
            z.solar_aperture = r.get<double>("solar_aperture", 0.0);
            z.base_load = r.get<double>("base_load", 0.0);
            z.occupancy_load = r.get<double>("occupancy_load", 0.0);
            z.comfort_temp = r.celsius("comfort_temp", 22.0);
            zones.push_back(z);
            sc.zone_names.push_back(nm);
        }
        if (zones.empty()) throw ParseError(file.string() + ": no [zone:<name>] sections");
        std::map<fs::path, std::map<std::string, std::vector<LayerRow>>> tables;
        for (const auto& [sec, t] : root) {
            auto [what, nm] = detail::section_kind(sec);
            if (what != "wall") continue;
            detail::Reader r(t, sec, file);
            const std::string where = file.string() + ": [" + sec + "]";
            thermal::WallSpec w;
            w.name = nm;
            w.area = r.get<double>("area");
            const fs::path tp = resolve(r.get<std::string>("construction"));
            if (!tables.count(tp)) tables[tp] = read_wall_table(tp);
            const std::string group = r.get<std::string>("group");
            auto it = tables[tp].find(group);
            if (it == tables[tp].end()) throw ParseError(where + ": group '" + group + "' not in " + tp.string());
            for (const auto& row : it->second) w.slices.push_back(row.slice);
            if (r.get<bool>("reverse", false)) std::reverse(w.slices.begin(), w.slices.end());
            for (auto& s : w.slices)
                if (s.capacity() < min_cap) {
                    s.density = 1.0;
                    s.specific_heat = min_cap / s.thickness;
                }
            w.inner = detail::parse_side(r.get<std::string>("inner"), sc.zone_names, r.get<double>("h_inner", 0.0),
                                         r.get<double>("eps_inner", 0.0), where);
            w.outer = detail::parse_side(r.get<std::string>("outer"), sc.zone_names, r.get<double>("h_outer", 0.0),
                                         r.get<double>("eps_outer", 0.0), where);
            w.alpha_s = r.get<double>("alpha_s", 0.0);
            w.alpha_l = r.get<double>("alpha_l", 0.0);
            walls.push_back(w);
        }
        b.model = thermal::assemble_building(walls, zones);

        auto ch = root.get_child_optional(pt::ptree::path_type("chiller", '\0'));
        if (!ch) throw ParseError(file.string() + ": missing [chiller] section");
        detail::Reader r(*ch, "chiller", file);
        b.chiller.name = "chiller";
        b.chiller.a1 = r.get<double>("a1");
        b.chiller.a2 = r.get<double>("a2");
        b.chiller.a3 = r.get<double>("a3");
        b.chiller.a4 = r.get<double>("a4");
        b.chiller.power_unit = r.get<double>("power_unit", 1.0);
        b.chiller.T_cw = r.celsius("T_cw");
        b.chiller.E_max = r.get<double>("E_max") * sc.energy_unit;
        b.chiller.pwa_knots = r.get<int>("knots", 10);
        b.T_o = r.celsius("T_o");

        const int nz = static_cast<int>(zones.size());
        const Csv w = read_csv(series_file("weather"));
        detail::need_rows(w, M + 1);
        b.disturbances = Mat(M + 1, thermal::n_disturbances);
        {
            const auto to = w.column("T_out"), tg = w.column("T_gnd"), qs = w.column("Q_S"), ql = w.column("Q_L");
            for (int k = 0; k <= M; ++k) b.disturbances.row(k) << to[k] + kelvin, tg[k] + kelvin, qs[k], ql[k], 1.0;
        }
        const Csv occ = read_csv(series_file("occupancy"));
        detail::need_rows(occ, M + 1);
        const Csv cf = read_csv(series_file("comfort"));
        detail::need_rows(cf, M + 1);
        b.occupancy = Mat(M + 1, nz);
        b.u_lo = Mat(M + 1, nz);
        b.u_hi = Mat(M + 1, nz);
        for (int j = 0; j < nz; ++j) {
            const auto o = occ.column(sc.zone_names[j]);
            const auto lo = cf.column("lo_" + sc.zone_names[j]), hi = cf.column("hi_" + sc.zone_names[j]);
            for (int k = 0; k <= M; ++k) {
                b.occupancy(k, j) = o[k];
                b.u_lo(k, j) = lo[k] + kelvin;
                b.u_hi(k, j) = hi[k] + kelvin;
            }
        }
        if (b.objective == net::Objective::priced) {
            const Csv pr = read_csv(series_file("price"));
            detail::need_rows(pr, M);
            b.price = pr.column("price");
        }
        if (g.has("T_z0")) {
            Vec t0(nz);
            t0.setConstant(g.celsius("T_z0"));
            b.T_z0 = t0;
        }
    } else {
        auto& m = sc.microgrid;
        m.M = M;
        m.delta = delta;
        m.energy_unit = sc.energy_unit;
        m.T_o = g.celsius("T_o");
        m.eps = g.get<double>("eps", 1e-3);
        m.periodic_status = g.get<bool>("periodic", true);
        bool have_chp = false;
        int storages = 0;
        for (const auto& [sec, t] : root) {
            auto [what, nm] = detail::section_kind(sec);
            detail::Reader r(t, sec, file);
            if (what == "chiller") {
                comp::ChillerSpec c;
                c.name = nm;
                c.a1 = r.get<double>("a1");
                c.a2 = r.get<double>("a2");
                c.a3 = r.get<double>("a3");
                c.a4 = r.get<double>("a4");
                c.power_unit = r.get<double>("power_unit", 1.0);
                c.T_cw = r.celsius("T_cw");
                c.E_max = r.get<double>("E_max") * sc.energy_unit;
                c.pwa_knots = r.get<int>("knots", 10);
                c.startup_cost = r.get<double>("startup_cost", 0.0);
                c.model = comp::ChillerModel::pwa_onoff;
                m.chillers.push_back(c);
            } else if (what == "chp") {
                auto& c = m.chp;
                c.name = nm;
                c.m_l = r.get<double>("m_l");
                c.q_l = r.get<double>("q_l");
                c.m_h = r.get<double>("m_h");
                c.q_h = r.get<double>("q_h");
                c.u_min = r.get<double>("u_min");
                c.u_max = r.get<double>("u_max");
                c.E_max_l = r.get<double>("E_max_l", inf);
                c.E_max_h = r.get<double>("E_max_h", inf);
                c.startup_cost = r.get<double>("startup_cost", 0.0);
                have_chp = true;
            } else if (what == "storage") {
                const std::string carrier = r.get<std::string>("carrier");
                comp::StorageSpec* s = carrier == "heating"      ? &m.heat
                                       : carrier == "cooling"    ? &m.cool
                                       : carrier == "electrical" ? &m.elec
                                                                 : nullptr;
                if (!s) throw ParseError(file.string() + ": [" + sec + "] unknown carrier '" + carrier + "'");
                s->name = nm;
                s->a = r.get<double>("a", 1.0);
                s->S_max = r.get<double>("S_max");
                s->s_min = r.get<double>("s_min");
                s->s_max = r.get<double>("s_max");
                s->periodic = r.get<bool>("periodic", true);
                if (r.has("S0")) s->S0 = r.get<double>("S0");
                ++storages;
            }
        }
        if (m.chillers.empty() || !have_chp || storages != 3)
            throw ParseError(file.string() + ": microgrid needs chillers, one chp and three storages");
        const Csv d = read_csv(series_file("demand"));
        detail::need_rows(d, M);
        m.E_c = d.column("E_c");
        m.E_h = d.column("E_h");
        m.E_l = d.column("E_l");
        m.price = d.column("price");
        m.fuel_price = d.column("fuel_price");
    }

    std::ostringstream hs;
    hs << std::hex << std::setw(16) << std::setfill('0') << h;
    sc.hash = hs.str();
    return sc;
}

}  // namespace district::scn
