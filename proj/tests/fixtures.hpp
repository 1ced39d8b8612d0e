#pragma once

#include "district/thermal.hpp"

#include <random>

namespace fixtures {

using namespace district;
using namespace district::thermal;

/// Three-slice exterior wall around one zone, radiation on the outer face.
inline BuildingModel three_slice_wall(double eps_out = 0.9) {
    WallSpec w;
    w.name = "ext";
    w.slices = {{0.10, 1400.0, 0.51, 1000.0}, {0.06, 30.0, 0.04, 1400.0}, {0.02, 530.0, 0.14, 900.0}};
    w.area = 40.0;
    w.inner = Side::facing_zone(0, 3.0);
    w.outer = Side::facing_outside(20.0, eps_out);
    w.alpha_s = 0.6;
    w.alpha_l = 0.6;
    ZoneSpec z{"room", 2.0e6, 3.0, 300.0, 80.0, 295.15};
    return assemble_building({w}, {z});
}

/// Piecewise-linear series on knots, one row per knot.
inline Mat random_series(std::mt19937& rng, int knots, const std::vector<std::pair<double, double>>& ranges) {
    Mat s(knots, static_cast<Index>(ranges.size()));
    for (int k = 0; k < knots; ++k)
        for (Index c = 0; c < s.cols(); ++c) {
            std::uniform_real_distribution<double> u(ranges[c].first, ranges[c].second);
            s(k, c) = u(rng);
        }
    return s;
}

inline Mat random_weather(std::mt19937& rng, int knots) {
    Mat w = random_series(rng, knots, {{285.0, 305.0}, {288.0, 288.0}, {0.0, 600.0}, {250.0, 350.0}, {1.0, 1.0}});
    return w;
}

}  // namespace fixtures
