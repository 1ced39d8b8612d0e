#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace district {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;
using Index = Eigen::Index;

inline constexpr double stefan_boltzmann = 5.670374419e-8;
inline constexpr double kelvin_offset = 273.15;
inline constexpr double inf = std::numeric_limits<double>::infinity();

inline double to_kelvin(double celsius) { return celsius + kelvin_offset; }
inline double to_celsius(double kelvin) { return kelvin - kelvin_offset; }

/// Invalid model or specification input.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operating point outside the validity domain of a component model.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ModelError(msg);
}

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Largest |a-b| / max(scale_floor, |b|) over all entries.
inline double max_rel_err(const Mat& a, const Mat& b, double scale_floor = 1.0) {
    double worst = 0.0;
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::max(scale_floor, std::abs(b(i, j))));
    return worst;
}

}  // namespace district
