#pragma once

#include "district/common.hpp"
#include "district/expm.hpp"
#include "district/thermal.hpp"

namespace district::discrete {

struct Discretization {
    double delta = 0.0;
    Mat Gx, Gu0, Gu1, Gw0, Gw1;
    Mat At, Bt, Wt, Ct, Dt, Vt;  // dynamics of xi_k = T_k - Gu1 u_k - Gw1 d_k
};

/// Integrals of e^{As} against the constant and the ramp part of a linear input.
struct GammaPair {
    Mat Gx, G0, G1;
};

inline GammaPair gamma_integrals(const Mat& A, const Mat& Bbar, double delta) {
    require(delta > 0.0, "discretize: slot length must be positive");
    const Index n = A.rows();
    const Index m = Bbar.cols();
    // Time normalized to the slot; input columns rescaled to keep the norm of the embedding small.
    Mat bd = Bbar * delta;
    const double beta = std::max(1.0, bd.cwiseAbs().colwise().sum().maxCoeff());
    Mat big = Mat::Zero(n + 2 * m, n + 2 * m);
    big.topLeftCorner(n, n) = A * delta;
    big.block(0, n, n, m) = bd / beta;
    big.block(n, n + m, m, m) = Mat::Identity(m, m);
    const Mat e = expm(big);
    return {expm(A * delta), e.block(0, n, n, m) * beta, e.block(0, n + m, n, m) * beta};
}

inline Discretization discretize(const Mat& A, const Mat& B, const Mat& W, const Mat& C, const Mat& D,
                                 double delta) {
    require(delta > 0.0, "discretize: slot length must be positive");
    const Index n = A.rows();
    const Index nu = B.cols();
    Mat bbar(n, nu + W.cols());
    bbar << B, W;
    GammaPair g = gamma_integrals(A, bbar, delta);

    Discretization d;
    d.delta = delta;
    d.Gx = g.Gx;
    d.Gu0 = g.G0.leftCols(nu);
    d.Gw0 = g.G0.rightCols(W.cols());
    d.Gu1 = g.G1.leftCols(nu);
    d.Gw1 = g.G1.rightCols(W.cols());
    const Mat id = Mat::Identity(n, n);
    d.At = d.Gx;
    d.Bt = (d.Gx - id) * d.Gu1 + d.Gu0;
    d.Wt = (d.Gx - id) * d.Gw1 + d.Gw0;
    d.Ct = C;
    d.Dt = C * d.Gu1 + D;
    d.Vt = C * d.Gw1;
    return d;
}

inline Discretization discretize(const thermal::BuildingModel& bm, double delta) {
    return discretize(bm.A, bm.B, bm.W, bm.C, bm.D, delta);
}

/// Row-major flattening of a (knots x channels) series into a knot-major vector.
inline Vec flatten(const Mat& series) {
    Vec v(series.size());
    for (Index k = 0; k < series.rows(); ++k) v.segment(k * series.cols(), series.cols()) = series.row(k).transpose();
    return v;
}

inline Mat unflatten(const Vec& v, Index channels) {
    require(channels > 0 && v.size() % channels == 0, "unflatten: size mismatch");
    Mat s(v.size() / channels, channels);
    for (Index k = 0; k < s.rows(); ++k) s.row(k) = v.segment(k * channels, channels).transpose();
    return s;
}

/// y = F T(0) + G u + H w over knots 0..M, and T(M) = Phi T(0) + Psi u + Omega w.
struct Lifted {
    int M = 0;
    Index n = 0, nz = 0, nd = 0;
    Mat F, G, H;
    Mat Phi, Psi, Omega;
};

inline Lifted lift(const Discretization& d, int M) {
    require(M >= 1, "lift: horizon must be at least one slot");
    Lifted L;
    L.M = M;
    L.n = d.At.rows();
    L.nz = d.Dt.cols();
    L.nd = d.Vt.cols();
    const Index n = L.n, nz = L.nz, nd = L.nd, ny = d.Ct.rows();
    const Index K = M + 1;
    L.F = Mat::Zero(K * ny, n);
    L.G = Mat::Zero(K * ny, K * nz);
    L.H = Mat::Zero(K * ny, K * nd);

    Mat xt = Mat::Identity(n, n);
    Mat xu = Mat::Zero(n, K * nz);
    Mat xw = Mat::Zero(n, K * nd);
    xu.leftCols(nz) = -d.Gu1;
    xw.leftCols(nd) = -d.Gw1;

    for (Index k = 0; k <= M; ++k) {
        const Index cu = (k + 1) * nz, cw = (k + 1) * nd;
        L.F.middleRows(k * ny, ny) = d.Ct * xt;
        L.G.block(k * ny, 0, ny, cu) = d.Ct * xu.leftCols(cu);
        L.H.block(k * ny, 0, ny, cw) = d.Ct * xw.leftCols(cw);
        L.G.block(k * ny, k * nz, ny, nz) += d.Dt;
        L.H.block(k * ny, k * nd, ny, nd) += d.Vt;
        if (k == M) break;
        xt = d.At * xt;
        xu.leftCols(cu) = d.At * xu.leftCols(cu);
        xw.leftCols(cw) = d.At * xw.leftCols(cw);
        xu.block(0, k * nz, n, nz) += d.Bt;
        xw.block(0, k * nd, n, nd) += d.Wt;
    }
    xu.rightCols(nz) += d.Gu1;
    xw.rightCols(nd) += d.Gw1;
    L.Phi = xt;
    L.Psi = xu;
    L.Omega = xw;
    return L;
}

struct EnergyMaps {
    Mat Ft, Gt, Ht;
};

/// Trapezoid over each slot: E(k) = (delta/2)(y(k-1) + y(k)), k = 1..M.
inline Mat trapezoid_rows(const Mat& Y, Index ny, int M, double delta) {
    Mat E(M * ny, Y.cols());
    for (int k = 1; k <= M; ++k)
        E.middleRows((k - 1) * ny, ny) = 0.5 * delta * (Y.middleRows((k - 1) * ny, ny) + Y.middleRows(k * ny, ny));
    return E;
}

inline EnergyMaps energy_matrices(const Lifted& L, double delta) {
    const Index ny = L.F.rows() / (L.M + 1);
    return {trapezoid_rows(L.F, ny, L.M, delta), trapezoid_rows(L.G, ny, L.M, delta),
            trapezoid_rows(L.H, ny, L.M, delta)};
}

/// E_z(k) = -C_z (u(k) - u(k-1)).
inline Mat zone_inertia(const Vec& capacities, int M) {
    const Index nz = capacities.size();
    Mat Z = Mat::Zero(M * nz, (M + 1) * nz);
    for (int k = 1; k <= M; ++k)
        for (Index j = 0; j < nz; ++j) {
            Z((k - 1) * nz + j, k * nz + j) = -capacities(j);
            Z((k - 1) * nz + j, (k - 1) * nz + j) = capacities(j);
        }
    return Z;
}

struct PeopleEnergy {
    Mat N;
    Vec e;
};

/// occupancy is (M+1) x nz, one row per knot.
inline PeopleEnergy people_energy(const Mat& occupancy, const std::vector<double>& tbar, double delta) {
    const Index nz = occupancy.cols();
    const int M = static_cast<int>(occupancy.rows()) - 1;
    require(M >= 1, "people_energy: occupancy needs at least two knots");
    require(static_cast<Index>(tbar.size()) == nz, "people_energy: one linearization point per zone");
    require((occupancy.array() >= 0.0).all(), "people_energy: negative occupancy");
    PeopleEnergy pe{Mat::Zero(M * nz, (M + 1) * nz), Vec::Zero(M * nz)};
    for (Index j = 0; j < nz; ++j) {
        const auto c = thermal::people_heat_coeffs(tbar[j]);
        for (int k = 1; k <= M; ++k) {
            const double nk = occupancy(k, j), np = occupancy(k - 1, j);
            const Index r = (k - 1) * nz + j;
            pe.N(r, k * nz + j) = c.p1 * delta / 6.0 * (2.0 * nk + np);
            pe.N(r, (k - 1) * nz + j) = c.p1 * delta / 6.0 * (nk + 2.0 * np);
            pe.e(r) = c.p0 * delta / 2.0 * (nk + np);
        }
    }
    return pe;
}

struct InternalEnergy {
    Mat Mint;  // acts on the stacked disturbance vector
    Vec L;
};

inline InternalEnergy internal_energy(const Mat& occupancy, const std::vector<thermal::ZoneSpec>& zones,
                                      double delta) {
    const Index nz = static_cast<Index>(zones.size());
    require(occupancy.cols() == nz, "internal_energy: occupancy columns must match zone count");
    const int M = static_cast<int>(occupancy.rows()) - 1;
    const Index nd = thermal::n_disturbances;
    InternalEnergy ie{Mat::Zero(M * nz, (M + 1) * nd), Vec::Zero(M * nz)};
    for (Index j = 0; j < nz; ++j) {
        const auto& z = zones[j];
        for (int k = 1; k <= M; ++k) {
            const Index r = (k - 1) * nz + j;
            ie.Mint(r, k * nd + thermal::d_qs) += 0.5 * delta * z.solar_aperture;
            ie.Mint(r, (k - 1) * nd + thermal::d_qs) += 0.5 * delta * z.solar_aperture;
            const double on = (occupancy(k, j) > 0.0 ? 1.0 : 0.0) + (occupancy(k - 1, j) > 0.0 ? 1.0 : 0.0);
            ie.L(r) = delta * z.base_load + 0.5 * delta * z.occupancy_load * on;
        }
    }
    return ie;
}

/// Cooling demand E_c = Ac T(0) + Bc u + Wc w + b over slots 1..M.
struct LiftedBuilding {
    int M = 0;
    double delta = 0.0;
    Index n = 0, nz = 0;
    Discretization disc;
    Lifted lifted;
    EnergyMaps energy;
    Mat Z;
    PeopleEnergy people;
    InternalEnergy internal;
    Mat Ac, Bc, Wc;
    Vec b;
};

inline void cooling_energy_map(LiftedBuilding& lb) {
    const Index rows = static_cast<Index>(lb.M) * lb.nz;
    require(lb.energy.Gt.rows() == rows && lb.Z.rows() == rows && lb.people.N.rows() == rows &&
                lb.internal.Mint.rows() == rows && lb.energy.Gt.cols() == lb.Z.cols() &&
                lb.energy.Ht.cols() == lb.internal.Mint.cols(),
            "cooling_energy_map: dimension mismatch");
    lb.Ac = lb.energy.Ft;
    lb.Bc = lb.energy.Gt + lb.Z + lb.people.N;
    lb.Wc = lb.energy.Ht + lb.internal.Mint;
    lb.b = lb.people.e + lb.internal.L;
}

inline LiftedBuilding build_lifted(const thermal::BuildingModel& bm, double delta, int M, const Mat& occupancy) {
    require(occupancy.rows() == M + 1 && occupancy.cols() == bm.n_zones(),
            "build_lifted: occupancy must have M+1 rows and one column per zone");
    LiftedBuilding lb;
    lb.M = M;
    lb.delta = delta;
    lb.n = bm.n_states();
    lb.nz = bm.n_zones();
    lb.disc = discretize(bm, delta);
    lb.lifted = lift(lb.disc, M);
    lb.energy = energy_matrices(lb.lifted, delta);
    lb.Z = zone_inertia(bm.zone_capacities(), M);
    std::vector<double> tbar;
    for (const auto& z : bm.zones) tbar.push_back(z.comfort_temp);
    lb.people = people_energy(occupancy, tbar, delta);
    lb.internal = internal_energy(occupancy, bm.zones, delta);
    cooling_energy_map(lb);
    return lb;
}

}  // namespace district::discrete
