#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gbs/config.hpp"
#include "gbs/covariance.hpp"
#include "gbs/hafnian.hpp"
#include "gbs/linalg.hpp"
#include "gbs/pattern.hpp"
#include "gbs/unitary.hpp"

namespace gbs {

/// All componentwise subpatterns of s with total n, ascending lexicographic.
inline std::vector<OutputPattern> enumerate_subpatterns(const OutputPattern& s, int n) {
    const int K = static_cast<int>(s.size());
    const int N = total_photons(s);
    if (n < 0 || n > N) throw std::invalid_argument("subpattern total out of range");
    std::vector<int> suffix(K + 1, 0);
    for (int k = K - 1; k >= 0; --k) suffix[k] = suffix[k + 1] + s[k];
    std::vector<OutputPattern> out;
    OutputPattern cur(K, 0);
    std::function<void(int, int)> rec = [&](int k, int remaining) {
        if (k == K) {
            out.push_back(cur);
            return;
        }
        const int lo = std::max(0, remaining - suffix[k + 1]);
        const int hi = std::min(s[k], remaining);
        for (int c = lo; c <= hi; ++c) {
            cur[k] = c;
            rec(k + 1, remaining - c);
        }
        cur[k] = 0;
    };
    rec(0, n);
    return out;
}

namespace detail {

inline double binomial_d(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b *= static_cast<double>(n - k + i) / i;
    return b;
}

}  // namespace detail

/// Caches the kernel matrix, determinants, and port weights of one (config,
/// interferometer) instance so repeated pattern probabilities stay cheap.
class GaussianEngine {
public:
    /// Hafnians of selected kernels are real up to accumulated rounding; this
    /// bounds the tolerated imaginary residue relative to max(1, |Haf|).
    static constexpr double kRealnessTol = 1e-8;

    GaussianEngine(ExperimentConfig cfg, Matrix T) : cfg_(std::move(cfg)), T_(std::move(T)) {
        cfg_.validate();
        require_unitary(T_, std::max(cfg_.tol, 1e-10));
        if (static_cast<int>(T_.rows()) != cfg_.K)
            throw ConfigError("interferometer size does not match K");
        coef_ = coefficients(cfg_);
        A0_ = kernel_matrix(cfg_, T_, 0);
        logdet_q0_ = log_det_pd(q_matrix(cfg_, T_, 0), cfg_.tol);
        // det Q of a virtual mode is (1+alpha_d)^2 - beta_d^2 for any unitary T
        logdet_qm_ = std::log((1.0 + coef_.alpha_d) * (1.0 + coef_.alpha_d) -
                              coef_.beta_d * coef_.beta_d);
        weights_ = T_.leftCols(cfg_.M).cwiseAbs2();
    }

    const ExperimentConfig& config() const { return cfg_; }
    const Matrix& interferometer() const { return T_; }
    const ModeCoefficients& coeffs() const { return coef_; }
    double log_det_q0() const { return logdet_q0_; }
    double log_det_qm() const { return logdet_qm_; }
    /// weights(k, m-1) = |T_{k,m}|^2, the port pmf of virtual mode m.
    const Eigen::MatrixXd& weights() const { return weights_; }

    /// Haf(A_s) / (prod s_k! sqrt(det Q0)) for the indistinguishable sector.
    double prob_indistinguishable(const OutputPattern& s0) const {
        validate_pattern(s0, cfg_.K);
        const Complex h = hafnian(select_by_pattern(A0_, s0), cfg_.tol);
        // Rounding in the 2^(n-1)-term subset sum grows with the pattern size,
        // so the realness tripwire is looser than cfg_.tol on purpose.
        if (std::abs(h.imag()) > kRealnessTol * std::max(1.0, std::abs(h)))
            throw MatrixError("hafnian of the selected kernel is not real within tolerance");
        double logden = 0.5 * logdet_q0_;
        for (int v : s0) logden += log_factorial(v);
        const double p = h.real() * std::exp(-logden);
        if (p < -cfg_.tol) throw MatrixError("indistinguishable probability is negative");
        return std::max(p, 0.0);
    }

    /// G(N) / sqrt(det Qm) * prod_k |T_{k,m}|^{2 s_k} / s_k! for virtual mode m.
    double prob_virtual(int m, const OutputPattern& sm) const {
        validate_pattern(sm, cfg_.K);
        if (m < 1 || m > cfg_.M) throw ConfigError("virtual mode index out of range");
        double logw = -0.5 * logdet_qm_;
        for (int k = 0; k < cfg_.K; ++k) {
            if (sm[k] == 0) continue;
            const double w = weights_(k, m - 1);
            if (w == 0.0) return 0.0;
            logw += sm[k] * std::log(w) - log_factorial(sm[k]);
        }
        return g_function(total_photons(sm), coef_.alpha_d_p, coef_.beta_d_p) * std::exp(logw);
    }

    /// Exact sum over every decomposition of s_dis into M virtual-mode
    /// patterns; enumeration size prod_k C(M-1+s_k, s_k) is guarded.
    double prob_dist_exact(const OutputPattern& s_dis, double guard = 1e6) const {
        validate_pattern(s_dis, cfg_.K);
        const int K = cfg_.K, M = cfg_.M;
        double count = 1.0;
        for (int k = 0; k < K; ++k) {
            count *= detail::binomial_d(M - 1 + s_dis[k], s_dis[k]);
            if (count > guard)
                throw GuardError("distinguishable decomposition count exceeds guard");
        }
        const int N = total_photons(s_dis);
        std::vector<double> g(N + 1);
        for (int n = 0; n <= N; ++n) g[n] = g_function(n, coef_.alpha_d_p, coef_.beta_d_p);

        std::vector<int> nm(M, 0);
        double total = 0.0;
        // DFS over ports; within a port, compositions of s_k across the M modes
        std::function<void(int, double)> next_port = [&](int k, double logw) {
            if (k == K) {
                double prod = 1.0;
                for (int m = 0; m < M; ++m) prod *= g[nm[m]];
                total += prod * std::exp(logw);
                return;
            }
            std::function<void(int, int, double)> assign = [&](int m, int remaining, double lw) {
                const double w = weights_(k, m);
                if (m == M - 1) {
                    if (remaining > 0 && w == 0.0) return;
                    const double add =
                        remaining > 0 ? remaining * std::log(w) - log_factorial(remaining) : 0.0;
                    nm[m] += remaining;
                    next_port(k + 1, lw + add);
                    nm[m] -= remaining;
                    return;
                }
                for (int c = 0; c <= remaining; ++c) {
                    if (c > 0 && w == 0.0) break;
                    const double add = c > 0 ? c * std::log(w) - log_factorial(c) : 0.0;
                    nm[m] += c;
                    assign(m + 1, remaining - c, lw + add);
                    nm[m] -= c;
                }
            };
            assign(0, s_dis[k], logw);
        };
        next_port(0, 0.0);
        return total * std::exp(-0.5 * M * logdet_qm_);
    }

    /// One term of the photon-count split: sum over subpatterns s0 of total n
    /// of P0(s0) * dist(s - s0), with dist any distinguishable-part evaluator.
    template <class DistFn>
    double prob_component(const OutputPattern& s, int n, DistFn&& dist) const {
        validate_pattern(s, cfg_.K);
        double acc = 0.0;
        OutputPattern rest(cfg_.K);
        for (const auto& s0 : enumerate_subpatterns(s, n)) {
            for (int k = 0; k < cfg_.K; ++k) rest[k] = s[k] - s0[k];
            const double pd = dist(rest);
            if (pd != 0.0) acc += prob_indistinguishable(s0) * pd;
        }
        return acc;
    }

    double prob_total_exact(const OutputPattern& s, double guard = 1e6) const {
        const int N = total_photons(s);
        double total = 0.0;
        for (int n = 0; n <= N; ++n)
            total += prob_component(
                s, n, [&](const OutputPattern& rest) { return prob_dist_exact(rest, guard); });
        return total;
    }

private:
    ExperimentConfig cfg_;
    Matrix T_;
    ModeCoefficients coef_;
    Matrix A0_;
    double logdet_q0_ = 0.0;
    double logdet_qm_ = 0.0;
    Eigen::MatrixXd weights_;
};

inline double prob_indistinguishable(const ExperimentConfig& cfg, const Matrix& T,
                                     const OutputPattern& s0) {
    return GaussianEngine(cfg, T).prob_indistinguishable(s0);
}

inline double prob_virtual(const ExperimentConfig& cfg, const Matrix& T, int m,
                           const OutputPattern& sm) {
    return GaussianEngine(cfg, T).prob_virtual(m, sm);
}

inline double prob_dist_exact(const ExperimentConfig& cfg, const Matrix& T,
                              const OutputPattern& s_dis, double guard = 1e6) {
    return GaussianEngine(cfg, T).prob_dist_exact(s_dis, guard);
}

inline double prob_total_exact(const ExperimentConfig& cfg, const Matrix& T,
                               const OutputPattern& s, double guard = 1e6) {
    return GaussianEngine(cfg, T).prob_total_exact(s, guard);
}

}  // namespace gbs
