#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "gbs/config.hpp"

namespace gbs {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// K x K interferometer matrix T. Column m is the output amplitude profile of
/// input port m; only the first M columns feed squeezed light.
struct Interferometer {
    Matrix T;

    int ports() const { return static_cast<int>(T.rows()); }
};

inline double unitarity_defect(const Matrix& T) {
    return (T.adjoint() * T - Matrix::Identity(T.cols(), T.cols())).cwiseAbs().maxCoeff();
}

inline void require_unitary(const Matrix& T, double tol) {
    if (T.rows() == 0) throw ConfigError("interferometer must have at least one port");
    if (T.rows() != T.cols()) throw ConfigError("interferometer matrix must be square");
    if (unitarity_defect(T) > tol)
        throw ConfigError("interferometer matrix is not unitary within tolerance");
}

/// Haar-distributed K x K unitary: complex Ginibre sample, QR decomposition,
/// then the R-diagonal phases folded into Q to make the measure exact.
inline Matrix haar_random_unitary(int K, std::uint64_t seed) {
    if (K <= 0) throw ConfigError("Haar unitary requires K >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix G(K, K);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) {
            double re = gauss(rng);
            double im = gauss(rng);
            G(i, j) = Complex(re, im);
        }
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ();
    Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < K; ++j) {
        Complex d = R(j, j);
        Complex phase = (std::abs(d) == 0.0) ? Complex(1.0, 0.0) : d / std::abs(d);
        Q.col(j) *= phase;
    }
    return Q;
}

}  // namespace gbs
