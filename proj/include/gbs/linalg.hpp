#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "gbs/errors.hpp"
#include "gbs/unitary.hpp"

namespace gbs {

inline void require_hermitian(const Matrix& A, double tol) {
    if (A.rows() != A.cols()) throw MatrixError("matrix must be square");
    if (A.size() > 0 && (A - A.adjoint()).cwiseAbs().maxCoeff() > tol)
        throw MatrixError("matrix is not Hermitian within tolerance");
}

inline void require_symmetric(const Matrix& A, double tol) {
    if (A.rows() != A.cols()) throw MatrixError("matrix must be square");
    if (A.size() > 0 && (A - A.transpose()).cwiseAbs().maxCoeff() > tol)
        throw MatrixError("matrix is not symmetric within tolerance");
}

/// log det of a Hermitian positive-definite matrix via Cholesky.
inline double log_det_pd(const Matrix& A, double tol = 1e-10) {
    require_hermitian(A, tol);
    if (A.rows() == 0) return 0.0;
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success)
        throw MatrixError("matrix is not positive definite");
    double logdet = 0.0;
    for (int i = 0; i < A.rows(); ++i) logdet += std::log(llt.matrixL()(i, i).real());
    return 2.0 * logdet;
}

/// Determinant of a Hermitian positive-definite matrix; always real positive.
inline double det_pd(const Matrix& A, double tol = 1e-10) {
    return std::exp(log_det_pd(A, tol));
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
inline Matrix inverse_pd(const Matrix& A, double tol = 1e-10) {
    require_hermitian(A, tol);
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success)
        throw MatrixError("matrix is not positive definite");
    return llt.solve(Matrix::Identity(A.rows(), A.cols()));
}

}  // namespace gbs
