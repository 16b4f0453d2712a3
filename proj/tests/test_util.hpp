#pragma once

#include <complex>
#include <random>

#include "rydsim/system.hpp"

namespace ryd::test {

inline double herm_defect(const Mat16& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// deterministic pseudo-random complex matrix
inline Mat16 random_matrix(unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat16 m;
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b) m(a, b) = complexd(u(rng), u(rng));
    return m;
}

inline Mat16 random_hermitian(unsigned seed) {
    Mat16 m = random_matrix(seed);
    return 0.5 * (m + Mat16(m.adjoint()));
}

inline Mat16 random_density(unsigned seed) {
    Mat16 m = random_matrix(seed);
    Mat16 rho = m * m.adjoint();
    return rho / rho.trace();
}

inline Eigen::Matrix4cd random_unitary4(unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Matrix4cd m;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) m(a, b) = complexd(g(rng), g(rng));
    Eigen::HouseholderQR<Eigen::Matrix4cd> qr(m);
    Eigen::Matrix4cd q = qr.householderQ();
    Eigen::Matrix4cd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int a = 0; a < 4; ++a) q.col(a) *= r(a, a) / std::abs(r(a, a));
    return q;
}

}  // namespace ryd::test
