#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "gbs/config.hpp"
#include "gbs/pattern.hpp"
#include "gbs/pnr.hpp"
#include "gbs/unitary.hpp"

namespace gbs {

using PatternDistribution = std::unordered_map<OutputPattern, double, PatternHash>;
using ClickDistribution = std::unordered_map<ClickPattern, double, PatternHash>;

namespace fock {

/// Dense truncated Fock-basis state vector; occupations 0..cutoff-1 per mode.
/// Deliberately shares nothing with the Gaussian engine: gates act through
/// explicit per-photon-number unitary blocks.
class FockState {
public:
    FockState(int n_modes, int cutoff) : n_modes_(n_modes), cutoff_(cutoff) {
        if (n_modes < 1 || cutoff < 2) throw ConfigError("Fock state needs modes >= 1, cutoff >= 2");
        std::size_t dim = 1;
        stride_.resize(n_modes_);
        for (int m = n_modes_ - 1; m >= 0; --m) {
            stride_[m] = dim;
            dim *= static_cast<std::size_t>(cutoff_);
            if (dim > (std::size_t(1) << 28)) throw GuardError("Fock state dimension guard exceeded");
        }
        amp_.assign(dim, Complex(0.0, 0.0));
        amp_[0] = Complex(1.0, 0.0);
    }

    int cutoff() const { return cutoff_; }
    int modes() const { return n_modes_; }

    /// Replaces the vacuum in `mode` with single-mode squeezed vacuum of
    /// parameter r: amplitudes (tanh r)^n sqrt((2n)!)/(2^n n!)/sqrt(cosh r)
    /// on the even levels. The mode must currently be unexcited.
    void inject_squeezed(int mode, double r) {
        std::vector<double> psi(cutoff_, 0.0);
        psi[0] = 1.0 / std::sqrt(std::cosh(r));
        const double th = std::tanh(r);
        for (int n = 1; 2 * n < cutoff_; ++n)
            psi[2 * n] = psi[2 * n - 2] * th * std::sqrt((2.0 * n - 1.0) / (2.0 * n));
        for_each_base(mode, [&](std::size_t base) {
            const Complex a0 = amp_[base];
            if (a0 == Complex(0.0, 0.0)) return;
            for (int occ = 2; occ < cutoff_; occ += 2) amp_[base + occ * stride_[mode]] = a0 * psi[occ];
            amp_[base] = a0 * psi[0];
        });
    }

    /// Two-mode gate a_dag_p -> u(0,0) a_dag_p + u(1,0) a_dag_q,
    /// a_dag_q -> u(0,1) a_dag_p + u(1,1) a_dag_q. Components pushed past the
    /// cutoff are dropped; the lost norm is the truncation leak.
    void apply_two_mode(int p, int q, const Eigen::Matrix2cd& u) {
        const int c = cutoff_;
        const int nmax = 2 * (c - 1);
        // per-total-n Fock blocks of the gate
        std::vector<Eigen::MatrixXcd> block(nmax + 1);
        for (int n = 0; n <= nmax; ++n) block[n] = fock_block(u, n);

        std::vector<Complex> in(c), out(c);
        for_each_base2(p, q, [&](std::size_t base) {
            for (int n = 0; n <= nmax; ++n) {
                const int jlo = std::max(0, n - (c - 1));
                const int jhi = std::min(c - 1, n);
                if (jlo > jhi) continue;
                bool any = false;
                for (int j = jlo; j <= jhi; ++j) {
                    in[j - jlo] = amp_[base + j * stride_[p] + (n - j) * stride_[q]];
                    any = any || in[j - jlo] != Complex(0.0, 0.0);
                }
                if (!any) continue;
                const Eigen::MatrixXcd& B = block[n];
                for (int k = jlo; k <= jhi; ++k) {
                    Complex acc(0.0, 0.0);
                    for (int j = jlo; j <= jhi; ++j) acc += B(k, j) * in[j - jlo];
                    out[k - jlo] = acc;
                }
                for (int k = jlo; k <= jhi; ++k)
                    amp_[base + k * stride_[p] + (n - k) * stride_[q]] = out[k - jlo];
            }
        });
    }

    /// Single-mode phase a_dag -> u a_dag with |u| = 1.
    void apply_phase(int mode, Complex u) {
        std::vector<Complex> pow(cutoff_);
        pow[0] = Complex(1.0, 0.0);
        for (int occ = 1; occ < cutoff_; ++occ) pow[occ] = pow[occ - 1] * u;
        for_each_base(mode, [&](std::size_t base) {
            for (int occ = 1; occ < cutoff_; ++occ) amp_[base + occ * stride_[mode]] *= pow[occ];
        });
    }

    double total_mass() const {
        double s = 0.0;
        for (const Complex& a : amp_) s += std::norm(a);
        return s;
    }

    /// Joint occupation distribution of the first n_keep modes, all later
    /// modes (the ancillas) traced out.
    PatternDistribution marginal_distribution(int n_keep) const {
        PatternDistribution dist;
        OutputPattern occ(n_modes_, 0);
        for (std::size_t idx = 0; idx < amp_.size(); ++idx) {
            const double w = std::norm(amp_[idx]);
            if (w == 0.0) continue;
            std::size_t rest = idx;
            for (int m = 0; m < n_modes_; ++m) {
                occ[m] = static_cast<int>(rest / stride_[m]);
                rest %= stride_[m];
            }
            dist[OutputPattern(occ.begin(), occ.begin() + n_keep)] += w;
        }
        return dist;
    }

private:
    // n-photon block of the two-mode gate: <k, n-k| U |j, n-j>
    Eigen::MatrixXcd fock_block(const Eigen::Matrix2cd& u, int n) const {
        Eigen::MatrixXcd B(n + 1, n + 1);
        for (int j = 0; j <= n; ++j)
            for (int k = 0; k <= n; ++k) {
                Complex acc(0.0, 0.0);
                const int xlo = std::max(0, k - (n - j));
                const int xhi = std::min(j, k);
                for (int x = xlo; x <= xhi; ++x)
                    acc += binom_(j, x) * cpow(u(0, 0), x) * cpow(u(1, 0), j - x) *
                           binom_(n - j, k - x) * cpow(u(0, 1), k - x) *
                           cpow(u(1, 1), (n - j) - (k - x));
                const double lognorm = 0.5 * (std::lgamma(k + 1.0) + std::lgamma(n - k + 1.0) -
                                              std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0));
                B(k, j) = acc * std::exp(lognorm);
            }
        return B;
    }

    static double binom_(int n, int k) {
        double b = 1.0;
        for (int i = 1; i <= k; ++i) b *= static_cast<double>(n - k + i) / i;
        return b;
    }

    static Complex cpow(Complex base, int e) {
        Complex out(1.0, 0.0);
        for (int i = 0; i < e; ++i) out *= base;
        return out;
    }

    template <class Fn>
    void for_each_base(int mode, Fn&& fn) const {
        const std::size_t sm = stride_[mode];
        const std::size_t dim = amp_.size();
        // indices with occ[mode] == 0: blocks of length stride separated by cutoff*stride
        for (std::size_t hi = 0; hi < dim; hi += sm * cutoff_)
            for (std::size_t lo = 0; lo < sm; ++lo) fn(hi + lo);
    }

    template <class Fn>
    void for_each_base2(int p, int q, Fn&& fn) const {
        const std::size_t sp = stride_[p], sq = stride_[q];
        for_each_base(p, [&](std::size_t b) {
            // keep only bases that are also zero in q
            if ((b / sq) % cutoff_ == 0) fn(b);
        });
    }

    int n_modes_;
    int cutoff_;
    std::vector<std::size_t> stride_;
    std::vector<Complex> amp_;
};

inline Eigen::Matrix2cd splitter(double transmission) {
    const double t = std::sqrt(transmission);
    const double rr = std::sqrt(std::max(0.0, 1.0 - transmission));
    Eigen::Matrix2cd u;
    u << t, -rr, rr, t;
    return u;
}

}  // namespace fock

/// Smallest even cutoff (floor 2 ceil(sinh^2 r) + 4) whose single-mode
/// squeezed-vacuum tail mass is below tail_bound, capped at max_cutoff.
inline int fock_default_cutoff(const ExperimentConfig& cfg, double tail_bound = 5e-7,
                               int max_cutoff = 40) {
    const double sh2 = std::sinh(cfg.r) * std::sinh(cfg.r);
    int c = 2 * static_cast<int>(std::ceil(sh2)) + 4;
    const double th2 = std::tanh(cfg.r) * std::tanh(cfg.r);
    while (c < max_cutoff) {
        // tail mass at occupations >= c
        double p = 1.0 / std::cosh(cfg.r);
        double tail = 1.0 - p;
        for (int n = 1; 2 * n < c; ++n) {
            p *= th2 * (2.0 * n - 1.0) / (2.0 * n);
            tail -= p;
        }
        if (tail <= tail_bound) break;
        c += 2;
    }
    return std::min(c, max_cutoff);
}

/// Brute-force PNR distribution of the full model in a truncated Fock basis.
///
/// The model treats the indistinguishable sector and each virtual sector as
/// independent sources whose patterns add, so each sector is simulated as its
/// own purified run (squeezing, loss splitter, distinguishability splitter,
/// its own copy of T, ancilla tracing) and the K-port distributions are then
/// convolved. A single joint state over all sectors would instead retain
/// cross-sector correlations that the model deliberately discards.
inline PatternDistribution fock_pnr_distribution(const ExperimentConfig& cfg, const Matrix& T,
                                                 int cutoff) {
    cfg.validate();
    require_unitary(T, std::max(cfg.tol, 1e-10));
    if (static_cast<int>(T.rows()) != cfg.K) throw ConfigError("interferometer size does not match K");
    if (cfg.K > 2 || cfg.M > 1) throw GuardError("Fock oracle guard: K <= 2 and M <= 1");
    const double sh2 = std::sinh(cfg.r) * std::sinh(cfg.r);
    if (cutoff < 2 * static_cast<int>(std::ceil(sh2)) + 4)
        throw ConfigError("Fock cutoff below required floor");

    const int K = cfg.K;
    const int m0 = 0;  // the single squeezed port
    double kept_mass = 1.0;

    auto apply_interferometer = [&](fock::FockState& st) {
        if (K == 1) {
            st.apply_phase(0, T(0, 0));
        } else {
            Eigen::Matrix2cd u;
            u << T(0, 0), T(0, 1), T(1, 0), T(1, 1);
            st.apply_two_mode(0, 1, u);
        }
    };

    // indistinguishable sector: ports, virtual-arm ancilla, loss ancilla
    PatternDistribution p_ind;
    {
        fock::FockState st(K + 2, cutoff);
        const int anc_virt = K, anc_loss = K + 1;
        st.inject_squeezed(m0, cfg.r);
        st.apply_two_mode(m0, anc_loss, fock::splitter(cfg.eta_t));
        st.apply_two_mode(m0, anc_virt, fock::splitter(cfg.eta_ind));
        apply_interferometer(st);
        kept_mass = std::min(kept_mass, st.total_mass());
        p_ind = st.marginal_distribution(K);
    }

    // virtual sector: ports, indistinguishable-arm ancilla, loss ancilla
    PatternDistribution p_virt;
    {
        fock::FockState st(K + 2, cutoff);
        const int anc_ind = K, anc_loss = K + 1;
        st.inject_squeezed(m0, cfg.r);
        st.apply_two_mode(m0, anc_loss, fock::splitter(cfg.eta_t));
        st.apply_two_mode(m0, anc_ind, fock::splitter(1.0 - cfg.eta_ind));
        apply_interferometer(st);
        kept_mass = std::min(kept_mass, st.total_mass());
        p_virt = st.marginal_distribution(K);
    }

    if (1.0 - kept_mass > 1e-6) throw GuardError("Fock oracle truncation leak exceeds 1e-6");

    PatternDistribution total;
    OutputPattern sum(K, 0);
    for (const auto& [s_i, w_i] : p_ind)
        for (const auto& [s_v, w_v] : p_virt) {
            for (int k = 0; k < K; ++k) sum[k] = s_i[k] + s_v[k];
            total[sum] += w_i * w_v;
        }
    return total;
}

/// Aggregates a PNR distribution by click support; mass is preserved exactly.
inline ClickDistribution threshold_from_pnr(const PatternDistribution& dist) {
    ClickDistribution out;
    for (const auto& [s, w] : dist) out[pattern_support(s)] += w;
    return out;
}

}  // namespace gbs
