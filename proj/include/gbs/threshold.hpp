#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gbs/config.hpp"
#include "gbs/covariance.hpp"
#include "gbs/linalg.hpp"
#include "gbs/pattern.hpp"
#include "gbs/torontonian.hpp"
#include "gbs/unitary.hpp"

namespace gbs {

/// No-click probability of the indistinguishable sector on port set R:
/// 1/sqrt(det(Q0_R)) over the paired submatrix.
inline double marginal_noclick_indist(const ExperimentConfig& cfg, const Matrix& T,
                                      const ClickPattern& R) {
    cfg.validate();
    validate_clicks(R, cfg.K);
    const Matrix Q0 = q_matrix(cfg, T, 0);
    return std::exp(-0.5 * log_det_pd(select_by_ports(Q0, R), cfg.tol));
}

namespace detail {

inline double log_marginal_virtual(double transmission, double alpha_d, double beta_d) {
    const double a = 1.0 + transmission * alpha_d;
    const double b = transmission * beta_d;
    return -0.5 * std::log(a * a - b * b);
}

}  // namespace detail

/// No-click probability of virtual mode m on port set R, in closed form
/// through the captured transmission 𝒯 = sum_{j in R} |T_{j,m}|^2.
inline double marginal_noclick_virtual(const ExperimentConfig& cfg, const Matrix& T, int m,
                                       const ClickPattern& R) {
    cfg.validate();
    validate_clicks(R, cfg.K);
    if (m < 1 || m > cfg.M) throw ConfigError("virtual mode index out of range");
    double transmission = 0.0;
    for (int j : R) transmission += std::norm(T(j, m - 1));
    const ModeCoefficients c = coefficients(cfg);
    return std::exp(detail::log_marginal_virtual(transmission, c.alpha_d, c.beta_d));
}

/// Probability that exactly the ports in U click under threshold detection:
/// inclusion-exclusion over V subseteq U of the product of all M+1 sector
/// no-click marginals on R = [1,K] minus V. Subsets run in Gray-code order
/// with the per-mode captured transmissions updated incrementally; marginal
/// products accumulate in log space.
inline double prob_threshold(const ExperimentConfig& cfg, const Matrix& T, const ClickPattern& U) {
    cfg.validate();
    require_unitary(T, std::max(cfg.tol, 1e-10));
    if (static_cast<int>(T.rows()) != cfg.K) throw ConfigError("interferometer size does not match K");
    validate_clicks(U, cfg.K);
    const int K = cfg.K, M = cfg.M;
    const int u = static_cast<int>(U.size());
    if (u > 62) throw MatrixError("threshold click set too large for subset enumeration");
    const ModeCoefficients c = coefficients(cfg);
    const Matrix Q0 = q_matrix(cfg, T, 0);

    // tv[m] = sum_{j in V} |T_{j,m}|^2, so the captured transmission on
    // R = [1,K] \ V is 1 - tv[m] by column unitarity
    std::vector<double> tv(M, 0.0);
    std::vector<char> in_v(K, 0);
    ClickPattern R;
    R.reserve(K);

    double total = 0.0;
    std::uint64_t prev_code = 0;
    const std::uint64_t limit = std::uint64_t(1) << u;
    for (std::uint64_t i = 0; i < limit; ++i) {
        const std::uint64_t code = i ^ (i >> 1);
        const std::uint64_t diff = code ^ prev_code;
        if (diff) {
            int b = 0;
            while (!(diff >> b & 1)) ++b;
            const int port = U[b];
            const double onoff = (code >> b & 1) ? 1.0 : -1.0;
            in_v[port] = static_cast<char>(code >> b & 1);
            for (int m = 0; m < M; ++m) tv[m] += onoff * std::norm(T(port, m));
        }
        prev_code = code;

        R.clear();
        int v_count = 0;
        for (int k = 0; k < K; ++k) {
            if (in_v[k]) ++v_count;
            else R.push_back(k);
        }
        double logprod = -0.5 * log_det_pd(select_by_ports(Q0, R), cfg.tol);
        for (int m = 0; m < M; ++m)
            logprod += detail::log_marginal_virtual(std::max(0.0, 1.0 - tv[m]), c.alpha_d, c.beta_d);
        const double sign = ((u - v_count) % 2 == 0) ? 1.0 : -1.0;
        total += sign * std::exp(logprod);
    }

    if (total < -1e-10 || total > 1.0 + 1e-10)
        throw MatrixError("threshold probability left [0, 1] beyond tolerance");
    return std::min(std::max(total, 0.0), 1.0);
}

/// Torontonian route: Tor(Q0, U)/sqrt(det Q0). Exact for eta_ind = 1, where
/// the whole model collapses to the indistinguishable sector.
inline double prob_threshold_ideal(const ExperimentConfig& cfg, const Matrix& T,
                                   const ClickPattern& U) {
    cfg.validate();
    validate_clicks(U, cfg.K);
    const Matrix Q0 = q_matrix(cfg, T, 0);
    return torontonian(Q0, U, cfg.tol) * std::exp(-0.5 * log_det_pd(Q0, cfg.tol));
}

}  // namespace gbs
