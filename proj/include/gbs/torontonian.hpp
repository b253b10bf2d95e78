#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "gbs/covariance.hpp"
#include "gbs/linalg.hpp"
#include "gbs/pattern.hpp"
#include "gbs/unitary.hpp"

namespace gbs {

/// Torontonian over the clicked-port set U of a positive-definite Husimi Q:
/// sum over V subseteq U of (-1)^{|U|-|V|} / sqrt(det((Q^{-1})_V)) with the
/// paired rows/cols (V, V+K). Subsets run in Gray-code order with a serial
/// reduction so the result is bit-stable run to run.
inline double torontonian(const Matrix& Q, const ClickPattern& U, double tol = 1e-10) {
    const int K = static_cast<int>(Q.rows()) / 2;
    if (Q.rows() != Q.cols() || Q.rows() % 2 != 0)
        throw MatrixError("torontonian requires a 2K x 2K matrix");
    validate_clicks(U, K);
    const int u = static_cast<int>(U.size());
    if (u > 62) throw MatrixError("torontonian click set too large for subset enumeration");

    const Matrix Qinv = inverse_pd(Q, tol);
    double total = 0.0;
    ClickPattern V;
    V.reserve(u);
    const std::uint64_t limit = std::uint64_t(1) << u;
    for (std::uint64_t i = 0; i < limit; ++i) {
        const std::uint64_t code = i ^ (i >> 1);
        V.clear();
        for (int b = 0; b < u; ++b)
            if (code >> b & 1) V.push_back(U[b]);
        const double logdet = log_det_pd(select_by_ports(Qinv, V), tol);
        const double sign = ((u - static_cast<int>(V.size())) % 2 == 0) ? 1.0 : -1.0;
        total += sign * std::exp(-0.5 * logdet);
    }
    return total;
}

}  // namespace gbs
