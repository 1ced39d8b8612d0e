#pragma once

#include "district/common.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace district::thermal {

/// Disturbance slots of d = [T_out, T_gnd, Q_S, Q_L, 1].
enum Disturbance : int { d_out = 0, d_gnd = 1, d_qs = 2, d_ql = 3, d_one = 4 };
inline constexpr int n_disturbances = 5;

struct SliceSpec {
    double thickness = 0.0;      // m
    double density = 0.0;        // kg/m^3
    double conductivity = 0.0;   // W/(m K)
    double specific_heat = 0.0;  // J/(kg K)
    double generation = 0.0;     // W/m^2, constant internal source

    double capacity() const { return density * specific_heat * thickness; }
};

enum class SideKind { zone, outside, ground };

struct Side {
    SideKind kind = SideKind::outside;
    int zone = -1;
    double h = 0.0;           // W/(m^2 K)
    double emissivity = 0.0;

    static Side facing_zone(int z, double h, double eps = 0.0) { return {SideKind::zone, z, h, eps}; }
    static Side facing_outside(double h, double eps = 0.0) { return {SideKind::outside, -1, h, eps}; }
    static Side facing_ground() { return {SideKind::ground, -1, 0.0, 0.0}; }
};

/// Slices are ordered from the inner side to the outer side.
struct WallSpec {
    std::string name;
    std::vector<SliceSpec> slices;
    double area = 0.0;
    Side inner = Side::facing_zone(0, 0.0);
    Side outer = Side::facing_outside(0.0);
    double alpha_s = 0.0;
    double alpha_l = 0.0;
};

/// Long-wave exchange between two zone-facing wall surfaces.
struct ViewFactor {
    int from_wall = 0;
    bool from_inner = true;
    int to_wall = 0;
    bool to_inner = true;
    double factor = 0.0;
};

struct ZoneSpec {
    std::string name;
    double capacity = 0.0;        // J/K
    double solar_aperture = 0.0;  // m^2
    double base_load = 0.0;       // W
    double occupancy_load = 0.0;  // W
    double comfort_temp = 295.15; // K
};

struct WallMatrices {
    Mat A, B, W;
};

struct BuildingModel {
    Mat A, B, W, C, D;
    std::vector<std::pair<int, int>> slice_map;  // state -> (wall, slice)
    std::vector<int> wall_offset;
    Vec mean_temps;
    std::vector<WallSpec> walls;
    std::vector<ZoneSpec> zones;
    std::vector<std::string> warnings;

    Index n_states() const { return A.rows(); }
    Index n_zones() const { return static_cast<Index>(zones.size()); }
    Index state_of(int wall, int slice) const { return wall_offset.at(wall) + slice; }
    Vec zone_capacities() const {
        Vec c(n_zones());
        for (Index j = 0; j < n_zones(); ++j) c(j) = zones[j].capacity;
        return c;
    }
};

namespace detail {

inline bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

inline void validate_side(const Side& s, const std::string& wall, int n_zones) {
    require(in_unit(s.emissivity), "wall '" + wall + "': emissivity outside [0,1]");
    require(s.h >= 0.0, "wall '" + wall + "': negative convective coefficient");
    if (s.kind == SideKind::ground)
        require(s.h == 0.0 && s.emissivity == 0.0,
                "wall '" + wall + "': ground-facing side exchanges by conduction only");
    if (s.kind == SideKind::zone && n_zones >= 0)
        require(s.zone >= 0 && s.zone < n_zones, "wall '" + wall + "': dangling zone reference");
}

// Linearized emission 4 sigma T^3 T - 3 sigma T^4, split into slope and offset.
inline std::pair<double, double> radiation_lin(double tbar) {
    const double t3 = tbar * tbar * tbar;
    return {4.0 * stefan_boltzmann * t3, -3.0 * stefan_boltzmann * t3 * tbar};
}

}  // namespace detail

/// Linearized sigma T^4 about tbar.
inline double radiation_linearized(double t, double tbar) {
    auto [slope, offset] = detail::radiation_lin(tbar);
    return slope * t + offset;
}

/**
 * Slice balance of one wall. Rows are divided by the slice capacity, so the
 * result is the wall block of the state equation in K/s.
 */
inline WallMatrices assemble_wall(const WallSpec& spec, const std::vector<double>& mean_temps, int n_zones) {
    const int m = static_cast<int>(spec.slices.size());
    require(m >= 1, "wall '" + spec.name + "': at least one slice required");
    require(static_cast<int>(mean_temps.size()) == m,
            "wall '" + spec.name + "': mean temperature count does not match slice count");
    require(spec.area > 0.0, "wall '" + spec.name + "': area must be positive");
    require(detail::in_unit(spec.alpha_s) && detail::in_unit(spec.alpha_l),
            "wall '" + spec.name + "': absorbance outside [0,1]");
    detail::validate_side(spec.inner, spec.name, n_zones);
    detail::validate_side(spec.outer, spec.name, n_zones);
    for (const auto& s : spec.slices) {
        require(s.thickness > 0.0 && s.conductivity > 0.0,
                "wall '" + spec.name + "': slice thickness and conductivity must be positive");
        require(s.capacity() > 0.0, "wall '" + spec.name + "': non-positive thermal capacity");
    }

    WallMatrices w{Mat::Zero(m, m), Mat::Zero(m, std::max(n_zones, 0)), Mat::Zero(m, n_disturbances)};

    for (int i = 0; i + 1 < m; ++i) {
        const auto& a = spec.slices[i];
        const auto& b = spec.slices[i + 1];
        const double k = 1.0 / (a.thickness / (2.0 * a.conductivity) + b.thickness / (2.0 * b.conductivity));
        w.A(i, i) -= k;
        w.A(i, i + 1) += k;
        w.A(i + 1, i + 1) -= k;
        w.A(i + 1, i) += k;
    }

    auto boundary = [&](const Side& side, int i) {
        const auto& sl = spec.slices[i];
        switch (side.kind) {
        case SideKind::zone:
            w.A(i, i) -= side.h;
            w.B(i, side.zone) += side.h;
            break;
        case SideKind::outside: {
            w.A(i, i) -= side.h;
            w.W(i, d_out) += side.h;
            w.W(i, d_qs) += spec.alpha_s;
            w.W(i, d_ql) += spec.alpha_l;
            auto [slope, offset] = detail::radiation_lin(mean_temps[i]);
            w.A(i, i) -= side.emissivity * slope;
            w.W(i, d_one) -= side.emissivity * offset;
            break;
        }
        case SideKind::ground: {
            const double k = 2.0 * sl.conductivity / sl.thickness;
            w.A(i, i) -= k;
            w.W(i, d_gnd) += k;
            break;
        }
        }
    };
    boundary(spec.inner, 0);
    boundary(spec.outer, m - 1);

    for (int i = 0; i < m; ++i) {
        w.W(i, d_one) += spec.slices[i].generation;
        const double c = spec.slices[i].capacity();
        w.A.row(i) /= c;
        w.B.row(i) /= c;
        w.W.row(i) /= c;
    }
    return w;
}

inline BuildingModel assemble_building(const std::vector<WallSpec>& walls, const std::vector<ZoneSpec>& zones,
                                       const std::vector<ViewFactor>& view_factors = {},
                                       std::optional<Vec> mean_temps = std::nullopt,
                                       double default_mean_temp = 295.15) {
    require(!walls.empty(), "building: no walls");
    require(!zones.empty(), "building: no zones");
    const int nz = static_cast<int>(zones.size());
    for (const auto& z : zones) {
        require(z.capacity > 0.0, "zone '" + z.name + "': heat capacity must be positive");
        require(z.solar_aperture >= 0.0 && z.occupancy_load >= 0.0,
                "zone '" + z.name + "': aperture and occupancy load must be nonnegative");
    }

    BuildingModel bm;
    bm.walls = walls;
    bm.zones = zones;
    Index n = 0;
    for (const auto& w : walls) {
        bm.wall_offset.push_back(static_cast<int>(n));
        n += static_cast<Index>(w.slices.size());
    }
    if (mean_temps) {
        require(mean_temps->size() == n, "building: mean temperature vector does not match state count");
        bm.mean_temps = *mean_temps;
    } else {
        bm.mean_temps = Vec::Constant(n, default_mean_temp);
    }

    bm.A = Mat::Zero(n, n);
    bm.B = Mat::Zero(n, nz);
    bm.W = Mat::Zero(n, n_disturbances);
    bm.C = Mat::Zero(nz, n);
    bm.D = Mat::Zero(nz, nz);

    std::vector<int> adjacent(nz, 0);
    for (int wi = 0; wi < static_cast<int>(walls.size()); ++wi) {
        const auto& w = walls[wi];
        const int off = bm.wall_offset[wi];
        const int m = static_cast<int>(w.slices.size());
        std::vector<double> tbar(bm.mean_temps.data() + off, bm.mean_temps.data() + off + m);
        WallMatrices wm = assemble_wall(w, tbar, nz);
        bm.A.block(off, off, m, m) = wm.A;
        bm.B.middleRows(off, m) = wm.B;
        bm.W.middleRows(off, m) = wm.W;
        for (int i = 0; i < m; ++i) bm.slice_map.emplace_back(wi, i);

        auto output = [&](const Side& s, int slice) {
            if (s.kind != SideKind::zone) return;
            bm.C(s.zone, off + slice) += w.area * s.h;
            bm.D(s.zone, s.zone) -= w.area * s.h;
            ++adjacent[s.zone];
        };
        output(w.inner, 0);
        output(w.outer, m - 1);
    }

    for (const auto& vf : view_factors) {
        const int nw = static_cast<int>(walls.size());
        require(vf.from_wall >= 0 && vf.from_wall < nw && vf.to_wall >= 0 && vf.to_wall < nw,
                "view factor: wall index out of range");
        require(vf.factor >= 0.0, "view factor: negative factor");
        const auto& wf = walls[vf.from_wall];
        const auto& wt = walls[vf.to_wall];
        const Side& sf = vf.from_inner ? wf.inner : wf.outer;
        const Side& st = vf.to_inner ? wt.inner : wt.outer;
        require(sf.kind == SideKind::zone && st.kind == SideKind::zone,
                "view factor: both surfaces must face a zone");
        const Index i = bm.state_of(vf.from_wall, vf.from_inner ? 0 : static_cast<int>(wf.slices.size()) - 1);
        const Index j = bm.state_of(vf.to_wall, vf.to_inner ? 0 : static_cast<int>(wt.slices.size()) - 1);
        const double ci = wf.slices[bm.slice_map[i].second].capacity();
        auto [si, oi] = detail::radiation_lin(bm.mean_temps(i));
        auto [sj, oj] = detail::radiation_lin(bm.mean_temps(j));
        bm.A(i, j) += vf.factor * st.emissivity * sj / ci;
        bm.A(i, i) -= vf.factor * sf.emissivity * si / ci;
        bm.W(i, d_one) += vf.factor * (st.emissivity * oj - sf.emissivity * oi) / ci;
    }
    {
        std::vector<double> total(bm.A.rows(), 0.0);
        for (const auto& vf : view_factors) {
            const auto& wf = walls[vf.from_wall];
            total[bm.state_of(vf.from_wall, vf.from_inner ? 0 : static_cast<int>(wf.slices.size()) - 1)] += vf.factor;
        }
        for (double t : total) require(t <= 1.0 + 1e-12, "view factor: factors of one surface sum above 1");
    }

    for (int j = 0; j < nz; ++j)
        if (adjacent[j] == 0) bm.warnings.push_back("zone '" + zones[j].name + "' has no adjacent wall");
    return bm;
}

struct PeopleCoeffs {
    double p1 = 0.0;  // W/K per occupant
    double p0 = 0.0;  // W per occupant
};

inline constexpr double people_p2 = -0.22;
inline constexpr double people_p1 = 125.12;
inline constexpr double people_p0 = -1.7685e4;

/// Sensible heat of one occupant, W.
inline double people_heat_exact(double tz) { return people_p2 * tz * tz + people_p1 * tz + people_p0; }

/// Tangent of the occupant heat quadratic at tbar: Q = p1 T + p0.
inline PeopleCoeffs people_heat_coeffs(double tbar) {
    PeopleCoeffs c;
    c.p1 = 2.0 * people_p2 * tbar + people_p1;
    c.p0 = people_heat_exact(tbar) - c.p1 * tbar;
    return c;
}

}  // namespace district::thermal
