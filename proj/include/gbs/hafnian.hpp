#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gbs/linalg.hpp"
#include "gbs/unitary.hpp"

namespace gbs {

/// Exact n! for n <= 20 (the largest factorial fitting in 64 bits).
inline std::int64_t factorial_exact(int n) {
    if (n < 0 || n > 20) throw std::invalid_argument("factorial_exact requires 0 <= n <= 20");
    std::int64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

inline double log_factorial(int n) {
    if (n < 0) throw std::invalid_argument("log_factorial requires n >= 0");
    return std::lgamma(static_cast<double>(n) + 1.0);
}

/// n! as a double: exact below 21!, log-gamma based above.
inline double factorial_d(int n) {
    return n <= 20 ? static_cast<double>(factorial_exact(n)) : std::exp(log_factorial(n));
}

/// Number of perfect matchings with q same-set edges in the two-weight
/// matching problem on 2n vertices: f = (n!)^2 / ((q!!)^2 (n-q)!).
inline std::int64_t f_coefficient(int n, int q) {
    if (n < 0) throw std::invalid_argument("f_coefficient requires n >= 0");
    if (q < 0 || q > n) throw std::invalid_argument("f_coefficient requires 0 <= q <= n");
    if (q % 2 != 0) throw std::invalid_argument("f_coefficient requires even q");
    if (n > 30) throw std::overflow_error("f_coefficient exceeds 64-bit range");
    unsigned __int128 f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<unsigned>(i);
    // f_q / f_{q-2} = (n-q+2)(n-q+1) / q^2, exact at every step
    for (int p = 2; p <= q; p += 2) {
        f *= static_cast<unsigned>(n - p + 2);
        f *= static_cast<unsigned>(n - p + 1);
        f /= static_cast<unsigned>(p) * static_cast<unsigned>(p);
    }
    if (f > static_cast<unsigned __int128>(INT64_MAX))
        throw std::overflow_error("f_coefficient exceeds 64-bit range");
    return static_cast<std::int64_t>(f);
}

/// G(N) = sum over even q of f_q beta'^q alpha'^{N-q}; the Hafnian of the
/// rank-structured two-weight matrix in closed form.
inline double g_function(int N, double alpha_p, double beta_p) {
    if (N < 0) throw std::invalid_argument("g_function requires N >= 0");
    long double f = 1.0L;
    for (int i = 2; i <= N; ++i) f *= i;
    long double sum = 0.0L;
    for (int q = 0; q <= N; q += 2) {
        if (q > 0) {
            f *= static_cast<long double>(N - q + 2) * static_cast<long double>(N - q + 1);
            f /= static_cast<long double>(q) * static_cast<long double>(q);
        }
        sum += f * std::pow(static_cast<long double>(beta_p), q) *
               std::pow(static_cast<long double>(alpha_p), N - q);
    }
    double out = static_cast<double>(sum);
    if (!std::isfinite(out)) throw MatrixError("g_function overflowed the double range");
    return out;
}

namespace detail {

inline void require_even_symmetric(const Matrix& A, double tol) {
    if (A.rows() != A.cols()) throw MatrixError("hafnian requires a square matrix");
    if (A.rows() % 2 != 0) throw MatrixError("hafnian requires even dimension");
    if (A.rows() == 0) return;
    double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > tol * scale)
        throw MatrixError("hafnian requires a symmetric matrix");
}

inline Complex hafnian_rec(const Matrix& A, std::vector<int>& v) {
    if (v.empty()) return Complex(1.0, 0.0);
    const int first = v[0];
    Complex sum(0.0, 0.0);
    std::vector<int> rest(v.size() - 2);
    for (std::size_t p = 1; p < v.size(); ++p) {
        std::size_t w = 0;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (i != p) rest[w++] = v[i];
        sum += A(first, v[p]) * hafnian_rec(A, rest);
    }
    return sum;
}

}  // namespace detail

/// Sum over all (2n-1)!! perfect matchings; exponential cost, dimension <= 14.
inline Complex hafnian_bruteforce(const Matrix& A, double tol = 1e-10) {
    detail::require_even_symmetric(A, tol);
    if (A.rows() > 14) throw MatrixError("brute-force hafnian is limited to dimension 14");
    if (A.rows() == 0) return Complex(1.0, 0.0);
    std::vector<int> v(A.rows());
    for (int i = 0; i < static_cast<int>(v.size()); ++i) v[i] = i;
    return detail::hafnian_rec(A, v);
}

/// Hafnian of a complex symmetric 2n x 2n matrix by inclusion-exclusion over
/// vertex pairs: for each pair subset S, the degree-n coefficient of
/// exp(sum_j Tr((X A_S)^j) eta^j / (2j)) is accumulated with sign
/// (-1)^{n-|S|}. Power traces come from the characteristic polynomial of the
/// Hessenberg-reduced block (recurrence on leading minors), then Newton's
/// identities; this keeps the per-subset cost at O(n^3) without an iterative
/// eigensolver. Total cost O(n^3 2^n).
inline Complex hafnian(const Matrix& A, double tol = 1e-10) {
    detail::require_even_symmetric(A, tol);
    const int n2 = static_cast<int>(A.rows());
    if (n2 == 0) return Complex(1.0, 0.0);
    const int n = n2 / 2;
    if (n > 62) throw MatrixError("hafnian dimension too large for subset enumeration");

    Matrix W(n2, n2);
    Vector hhWork(n2);
    const int S = n2 + 1;
    std::vector<Complex> poly(static_cast<std::size_t>(S) * S);
    std::vector<Complex> power(n + 1), gcoef(n + 1), acoef(n2 + 1);
    std::vector<int> idx(n);

    Complex total(0.0, 0.0);
    const std::uint64_t limit = std::uint64_t(1) << n;
    for (std::uint64_t mask = 1; mask < limit; ++mask) {
        int k = 0;
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1) idx[k++] = i;
        const int m = 2 * k;

        // B = X A_S: rows of each selected pair swapped
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c) {
                W(2 * r, 2 * c) = A(2 * idx[r] + 1, 2 * idx[c]);
                W(2 * r, 2 * c + 1) = A(2 * idx[r] + 1, 2 * idx[c] + 1);
                W(2 * r + 1, 2 * c) = A(2 * idx[r], 2 * idx[c]);
                W(2 * r + 1, 2 * c + 1) = A(2 * idx[r], 2 * idx[c] + 1);
            }
        auto B = W.topLeftCorner(m, m);

        // in-place Householder reduction to Hessenberg form
        for (int j = 0; j < m - 2; ++j) {
            const int rem = m - j - 1;
            Complex tau;
            double beta;
            B.col(j).tail(rem).makeHouseholderInPlace(tau, beta);
            B(j + 1, j) = beta;
            B.bottomRightCorner(rem, rem)
                .applyHouseholderOnTheLeft(B.col(j).tail(rem - 1), tau, hhWork.data());
            B.rightCols(rem)
                .applyHouseholderOnTheRight(B.col(j).tail(rem - 1), std::conj(tau), hhWork.data());
        }

        // characteristic polynomials of the leading blocks of H
        Complex* p0 = poly.data();
        p0[0] = Complex(1.0, 0.0);
        for (int i = 1; i <= m; ++i) {
            Complex* pi = p0 + static_cast<std::size_t>(i) * S;
            const Complex* pim1 = p0 + static_cast<std::size_t>(i - 1) * S;
            const Complex hii = B(i - 1, i - 1);
            pi[0] = -hii * pim1[0];
            for (int t = 1; t < i; ++t) pi[t] = pim1[t - 1] - hii * pim1[t];
            pi[i] = pim1[i - 1];
            Complex sprod(1.0, 0.0);
            for (int j = 2; j <= i; ++j) {
                sprod *= B(i - j + 1, i - j);
                if (sprod == Complex(0.0, 0.0)) break;
                const Complex w = B(i - j, i - 1) * sprod;
                const Complex* pimj = p0 + static_cast<std::size_t>(i - j) * S;
                for (int t = 0; t <= i - j; ++t) pi[t] -= w * pimj[t];
            }
        }

        // Newton's identities: power sums of eigenvalues up to order n
        const Complex* pm = p0 + static_cast<std::size_t>(m) * S;
        for (int i = 1; i <= m; ++i) acoef[i] = pm[m - i];
        for (int j = 1; j <= n; ++j) {
            Complex s(0.0, 0.0);
            const int lim = std::min(j - 1, m);
            for (int i = 1; i <= lim; ++i) s += acoef[i] * power[j - i];
            power[j] = (j <= m) ? -static_cast<double>(j) * acoef[j] - s : -s;
        }

        // degree-n coefficient of exp(sum_j power_j eta^j / (2j))
        gcoef[0] = Complex(1.0, 0.0);
        for (int t = 1; t <= n; ++t) {
            Complex acc(0.0, 0.0);
            for (int j = 1; j <= t; ++j) acc += power[j] * gcoef[t - j];
            gcoef[t] = acc / (2.0 * t);
        }
        total += ((n - k) % 2 == 0 ? 1.0 : -1.0) * gcoef[n];
    }
    return total;
}

}  // namespace gbs
