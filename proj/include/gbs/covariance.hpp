#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gbs/config.hpp"
#include "gbs/pattern.hpp"
#include "gbs/unitary.hpp"

namespace gbs {

/// Scalar coefficients of the indistinguishable (i) and distinguishable (d)
/// sectors, plus their primed counterparts entering the kernel matrices.
struct ModeCoefficients {
    double alpha_i = 0.0, beta_i = 0.0;
    double alpha_d = 0.0, beta_d = 0.0;
    double alpha_i_p = 0.0, beta_i_p = 0.0;
    double alpha_d_p = 0.0, beta_d_p = 0.0;
};

/// Map (alpha, beta) -> (alpha', beta') used by both sectors:
/// alpha' = 1 - (1+alpha)/d, beta' = beta/d with d = (1+alpha)^2 - beta^2.
inline std::pair<double, double> primed_pair(double alpha, double beta) {
    double d = (1.0 + alpha) * (1.0 + alpha) - beta * beta;
    double ap = 1.0 - (1.0 + alpha) / d;
    // ap is 0 at the lossless boundary but rounds to -O(eps) there
    if (ap < 0.0 && ap > -1e-12) ap = 0.0;
    return {ap, beta / d};
}

inline ModeCoefficients coefficients(const ExperimentConfig& cfg) {
    cfg.validate();
    double sh = std::sinh(cfg.r);
    double ch = std::cosh(cfg.r);
    double ei = cfg.eta_t * cfg.eta_ind;
    double ed = cfg.eta_t * (1.0 - cfg.eta_ind);
    ModeCoefficients c;
    c.alpha_i = ei * sh * sh;
    c.beta_i = ei * sh * ch;
    c.alpha_d = ed * sh * sh;
    c.beta_d = ed * sh * ch;
    std::tie(c.alpha_i_p, c.beta_i_p) = primed_pair(c.alpha_i, c.beta_i);
    std::tie(c.alpha_d_p, c.beta_d_p) = primed_pair(c.alpha_d, c.beta_d);
    return c;
}

/// Input-side xp covariance matrices of the M+1 sectors, interleaved per port
/// as blocks diag(X, Y). Entry 0 is the indistinguishable sector (squeezed
/// blocks on the first M ports); entry m has its squeezed block on port m
/// only. Kept for documentation and mean-photon cross-checks; the probability
/// pipeline works from the complex Q matrices directly.
inline std::vector<Eigen::MatrixXd> build_real_covariances(const ExperimentConfig& cfg) {
    cfg.validate();
    double e2r = std::exp(2.0 * cfg.r);
    double em2r = std::exp(-2.0 * cfg.r);
    double ei = cfg.eta_t * cfg.eta_ind;
    double ed = cfg.eta_t * (1.0 - cfg.eta_ind);
    double Xi = ei * e2r + 1.0 - ei;
    double Yi = ei * em2r + 1.0 - ei;
    double Xd = ed * e2r + 1.0 - ed;
    double Yd = ed * em2r + 1.0 - ed;

    std::vector<Eigen::MatrixXd> out;
    out.reserve(cfg.M + 1);
    Eigen::MatrixXd V0 = Eigen::MatrixXd::Identity(2 * cfg.K, 2 * cfg.K);
    for (int k = 0; k < cfg.M; ++k) {
        V0(2 * k, 2 * k) = Xi;
        V0(2 * k + 1, 2 * k + 1) = Yi;
    }
    out.push_back(std::move(V0));
    for (int m = 0; m < cfg.M; ++m) {
        Eigen::MatrixXd Vm = Eigen::MatrixXd::Identity(2 * cfg.K, 2 * cfg.K);
        Vm(2 * m, 2 * m) = Xd;
        Vm(2 * m + 1, 2 * m + 1) = Yd;
        out.push_back(std::move(Vm));
    }
    return out;
}

namespace detail {

// I + [T (+) T*] [[Da, Db], [Db, Da]] [T (+) T*]† with Da, Db diagonal,
// in the (a_1..a_K, a_1†..a_K†) ordering shared by all 2K x 2K matrices here.
inline Matrix husimi_from_diagonals(const Matrix& T, const Eigen::VectorXd& da,
                                    const Eigen::VectorXd& db) {
    const int K = static_cast<int>(T.rows());
    Matrix Q = Matrix::Identity(2 * K, 2 * K);
    Matrix TDa = T * da.asDiagonal();
    Matrix TDb = T * db.asDiagonal();
    Q.topLeftCorner(K, K) += TDa * T.adjoint();
    Q.topRightCorner(K, K) += TDb * T.transpose();
    Q.bottomLeftCorner(K, K) += TDb.conjugate() * T.adjoint();
    Q.bottomRightCorner(K, K) += TDa.conjugate() * T.transpose();
    return Q;
}

// [T* (+) T] [[Db, Da], [Da, Db]] [T† (+) Tᵀ]; complex symmetric by construction.
inline Matrix kernel_from_diagonals(const Matrix& T, const Eigen::VectorXd& da,
                                    const Eigen::VectorXd& db) {
    const int K = static_cast<int>(T.rows());
    Matrix A(2 * K, 2 * K);
    Matrix TcDb = T.conjugate() * db.asDiagonal();
    Matrix TcDa = T.conjugate() * da.asDiagonal();
    A.topLeftCorner(K, K) = TcDb * T.adjoint();
    A.topRightCorner(K, K) = TcDa * T.transpose();
    A.bottomLeftCorner(K, K) = (T * da.asDiagonal()) * T.adjoint();
    A.bottomRightCorner(K, K) = (T * db.asDiagonal()) * T.transpose();
    return A;
}

inline void check_mode_index(const ExperimentConfig& cfg, int mode) {
    if (mode < 0 || mode > cfg.M) throw ConfigError("mode index must lie in [0, M]");
}

}  // namespace detail

/// Husimi Q matrix of sector m (0 = indistinguishable, 1..M = virtual),
/// 2K x 2K in (a, a†) ordering. Hermitian positive definite with det >= 1.
inline Matrix q_matrix(const ExperimentConfig& cfg, const Matrix& T, int mode) {
    cfg.validate();
    detail::check_mode_index(cfg, mode);
    const int K = cfg.K;
    const ModeCoefficients c = coefficients(cfg);
    Eigen::VectorXd da = Eigen::VectorXd::Zero(K);
    Eigen::VectorXd db = Eigen::VectorXd::Zero(K);
    if (mode == 0) {
        da.head(cfg.M).setConstant(c.alpha_i);
        db.head(cfg.M).setConstant(c.beta_i);
    } else {
        da(mode - 1) = c.alpha_d;
        db(mode - 1) = c.beta_d;
    }
    return detail::husimi_from_diagonals(T, da, db);
}

/// Kernel matrix A of sector m, chosen so A = X(I - Q^{-1}) with X the block
/// swap; built from the primed coefficients, bypassing the inversion.
inline Matrix kernel_matrix(const ExperimentConfig& cfg, const Matrix& T, int mode) {
    cfg.validate();
    detail::check_mode_index(cfg, mode);
    const int K = cfg.K;
    const ModeCoefficients c = coefficients(cfg);
    Eigen::VectorXd da = Eigen::VectorXd::Zero(K);
    Eigen::VectorXd db = Eigen::VectorXd::Zero(K);
    if (mode == 0) {
        da.head(cfg.M).setConstant(c.alpha_i_p);
        db.head(cfg.M).setConstant(c.beta_i_p);
    } else {
        da(mode - 1) = c.alpha_d_p;
        db(mode - 1) = c.beta_d_p;
    }
    return detail::kernel_from_diagonals(T, da, db);
}

/// Rows/columns (L, L+K) of a 2K x 2K matrix, L listing port k s_k times.
/// N = 0 gives the 0 x 0 matrix.
inline Matrix select_by_pattern(const Matrix& A, const OutputPattern& s) {
    const int K = static_cast<int>(A.rows()) / 2;
    validate_pattern(s, K);
    std::vector<int> idx;
    for (int k = 0; k < K; ++k)
        for (int c = 0; c < s[k]; ++c) idx.push_back(k);
    const int N = static_cast<int>(idx.size());
    Matrix sub(2 * N, 2 * N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            sub(i, j) = A(idx[i], idx[j]);
            sub(i, N + j) = A(idx[i], idx[j] + K);
            sub(N + i, j) = A(idx[i] + K, idx[j]);
            sub(N + i, N + j) = A(idx[i] + K, idx[j] + K);
        }
    return sub;
}

/// Rows/columns (R, R+K) for a sorted port subset R (no repetition).
inline Matrix select_by_ports(const Matrix& A, const ClickPattern& ports) {
    const int K = static_cast<int>(A.rows()) / 2;
    validate_clicks(ports, K);
    OutputPattern s(K, 0);
    for (int p : ports) s[p] = 1;
    return select_by_pattern(A, s);
}

}  // namespace gbs
