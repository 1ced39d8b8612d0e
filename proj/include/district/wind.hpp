#pragma once

#include "district/common.hpp"

#include <algorithm>
#include <utility>

namespace district::comp {

/// Wind turbine curve. Below rated: tabulated (v, P) if given, else P_n (v / v_n)^3.
struct WindSpec {
    std::string name = "wind";
    double v_in = 3.0, v_n = 12.0, v_out = 25.0;
    double P_n = 0.0;
    std::vector<std::pair<double, double>> curve;

    void validate() const {
        require(0.0 < v_in && v_in < v_n && v_n < v_out, "wind '" + name + "': need 0 < v_in < v_n < v_out");
        require(P_n > 0.0, "wind '" + name + "': rated power must be positive");
        if (!curve.empty()) {
            require(std::is_sorted(curve.begin(), curve.end()), "wind '" + name + "': curve speeds must be sorted");
            require(curve.front().first <= v_in && curve.back().first >= v_n,
                    "wind '" + name + "': curve must cover [v_in, v_n]");
            require(below_rated(v_in) >= 0.0, "wind '" + name + "': negative power at cut-in");
            require(std::abs(below_rated(v_n) - P_n) <= 1e-9 * P_n, "wind '" + name + "': curve must reach P_n at v_n");
        }
    }

    double below_rated(double v) const {
        if (curve.empty()) return P_n * std::pow(v / v_n, 3);
        auto it = std::lower_bound(curve.begin(), curve.end(), std::make_pair(v, -inf));
        if (it == curve.begin()) return it->second;
        if (it == curve.end()) return curve.back().second;
        const auto& [v1, p1] = *it;
        const auto& [v0, p0] = *(it - 1);
        return p0 + (p1 - p0) * (v - v0) / (v1 - v0);
    }

    double power(double v) const {
        require(v >= 0.0, "wind '" + name + "': negative speed");
        if (v <= v_in || v >= v_out) return 0.0;
        if (v >= v_n) return P_n;
        return below_rated(v);
    }
};

/// Energy per slot: mean power over the slot's sub-samples times delta.
inline Vec wind_energy(const WindSpec& s, const std::vector<std::vector<double>>& speeds, double delta) {
    s.validate();
    Vec e(speeds.size());
    for (std::size_t k = 0; k < speeds.size(); ++k) {
        require(!speeds[k].empty(), "wind '" + s.name + "': slot without samples");
        double sum = 0.0;
        for (double v : speeds[k]) sum += s.power(v);
        e(k) = sum / speeds[k].size() * delta;
    }
    return e;
}

}  // namespace district::comp
