#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <thread>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "gbs/config.hpp"
#include "gbs/covariance.hpp"
#include "gbs/hafnian.hpp"
#include "gbs/pattern.hpp"
#include "gbs/unitary.hpp"

namespace gbs {

namespace detail {

// splitmix64 finalizer; derives independent per-block RNG streams
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Walker-Vose alias table: O(n) build, O(1) categorical draws.
class AliasTable {
public:
    explicit AliasTable(const std::vector<double>& weights) {
        const int n = static_cast<int>(weights.size());
        if (n == 0) throw ConfigError("alias table requires at least one outcome");
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw ConfigError("alias table weights must be nonnegative");
            total += w;
        }
        if (!(total > 0.0)) throw ConfigError("alias table weights must not all vanish");
        prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        std::vector<double> scaled(n);
        for (int i = 0; i < n; ++i) scaled[i] = weights[i] * n / total;
        std::vector<int> small, large;
        for (int i = n - 1; i >= 0; --i) (scaled[i] < 1.0 ? small : large).push_back(i);
        while (!small.empty() && !large.empty()) {
            const int s = small.back(), l = large.back();
            small.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (int i : large) prob_[i] = 1.0;
        for (int i : small) prob_[i] = 1.0;
    }

    template <class RNG>
    int sample(RNG& rng) const {
        std::uniform_int_distribution<int> slot(0, static_cast<int>(prob_.size()) - 1);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        const int i = slot(rng);
        return u01(rng) < prob_[i] ? i : alias_[i];
    }

    int size() const { return static_cast<int>(prob_.size()); }

private:
    std::vector<double> prob_;
    std::vector<int> alias_;
};

/// Truncated per-virtual-mode photon-number pmf over {0..N_t} with
/// N_t = max(1, ceil(alpha_d * t)): P(n) proportional to G(n)/(n! sqrt(det Qm)),
/// renormalized over the truncated support.
inline std::vector<double> photon_number_pmf(const ExperimentConfig& cfg, int m, double t = 10.0) {
    cfg.validate();
    if (m < 1 || m > cfg.M) throw ConfigError("virtual mode index out of range");
    if (!(t > 0.0)) throw ConfigError("truncation factor must be positive");
    const ModeCoefficients c = coefficients(cfg);
    const int nt = std::max(1, static_cast<int>(std::ceil(c.alpha_d * t)));
    const double inv_sqrt_det =
        1.0 / std::sqrt((1.0 + c.alpha_d) * (1.0 + c.alpha_d) - c.beta_d * c.beta_d);
    std::vector<double> pmf(nt + 1);
    double total = 0.0;
    for (int n = 0; n <= nt; ++n) {
        pmf[n] = g_function(n, c.alpha_d_p, c.beta_d_p) * std::exp(-log_factorial(n)) * inv_sqrt_det;
        total += pmf[n];
    }
    for (double& p : pmf) p /= total;
    return pmf;
}

/// Samples the combined distinguishable-photon output pattern: per virtual
/// mode, a photon count from the truncated pmf, then per-photon output ports
/// with weights |T_{j,m}|^2. Cost O(M (1 + N_t)) per sample.
class DistinguishableSampler {
public:
    DistinguishableSampler(const ExperimentConfig& cfg, const Matrix& T, double t = 10.0)
        : cfg_(cfg) {
        cfg_.validate();
        require_unitary(T, std::max(cfg_.tol, 1e-10));
        if (static_cast<int>(T.rows()) != cfg_.K)
            throw ConfigError("interferometer size does not match K");
        const std::vector<double> pmf = photon_number_pmf(cfg_, 1, t);
        number_.reserve(cfg_.M);
        ports_.reserve(cfg_.M);
        for (int m = 0; m < cfg_.M; ++m) {
            number_.emplace_back(pmf);
            std::vector<double> w(cfg_.K);
            for (int k = 0; k < cfg_.K; ++k) w[k] = std::norm(T(k, m));
            ports_.emplace_back(w);
        }
    }

    template <class RNG>
    OutputPattern sample(RNG& rng) const {
        OutputPattern s(cfg_.K, 0);
        for (int m = 0; m < cfg_.M; ++m) {
            const int n = number_[m].sample(rng);
            for (int i = 0; i < n; ++i) ++s[ports_[m].sample(rng)];
        }
        return s;
    }

    int max_photons() const { return cfg_.M * (number_[0].size() - 1); }

private:
    ExperimentConfig cfg_;
    std::vector<AliasTable> number_;
    std::vector<AliasTable> ports_;
};

inline OutputPattern sample_virtual_patterns(const ExperimentConfig& cfg, const Matrix& T,
                                             double t, std::mt19937_64& rng) {
    return DistinguishableSampler(cfg, T, t).sample(rng);
}

/// Monte-Carlo estimate of the distinguishable-part distribution.
struct EmpiricalDistribution {
    std::unordered_map<OutputPattern, double, PatternHash> table;
    std::uint64_t n_samples = 0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;

    double prob(const OutputPattern& s) const {
        auto it = table.find(s);
        return it == table.end() ? 0.0 : it->second;
    }
};

/// Runs ceil(1/epsilon) samples (or n_samples when nonzero) in fixed blocks
/// of 65536; each block owns an RNG stream derived from (seed, block index),
/// so the merged counts are identical for any thread count.
inline EmpiricalDistribution estimate_p_sim(const ExperimentConfig& cfg, const Matrix& T, double t,
                                            double epsilon, std::uint64_t seed,
                                            std::uint64_t n_samples = 0, int n_threads = 1) {
    if (n_samples == 0) {
        if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
        n_samples = static_cast<std::uint64_t>(std::ceil(1.0 / epsilon));
    }
    if (n_threads < 1) throw ConfigError("thread count must be positive");
    const DistinguishableSampler sampler(cfg, T, t);

    constexpr std::uint64_t kBlock = 65536;
    const std::uint64_t n_blocks = (n_samples + kBlock - 1) / kBlock;
    using CountMap = std::unordered_map<OutputPattern, std::uint64_t, PatternHash>;

    auto run_block = [&](std::uint64_t b, CountMap& counts) {
        std::mt19937_64 rng(detail::mix_seed(seed, b));
        const std::uint64_t begin = b * kBlock;
        const std::uint64_t end = std::min(begin + kBlock, n_samples);
        for (std::uint64_t i = begin; i < end; ++i) ++counts[sampler.sample(rng)];
    };

    CountMap merged;
    if (n_threads == 1 || n_blocks <= 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b, merged);
    } else {
        const int workers = static_cast<int>(
            std::min<std::uint64_t>(n_blocks, static_cast<std::uint64_t>(n_threads)));
        std::vector<CountMap> local(workers);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::uint64_t b = w; b < n_blocks; b += workers) run_block(b, local[w]);
            });
        for (auto& th : pool) th.join();
        for (auto& part : local)
            for (auto& [pat, cnt] : part) merged[pat] += cnt;
    }

    EmpiricalDistribution dist;
    dist.n_samples = n_samples;
    dist.epsilon = epsilon;
    dist.seed = seed;
    dist.config_hash = gbs::config_hash(cfg);
    dist.table.reserve(merged.size());
    for (auto& [pat, cnt] : merged)
        dist.table.emplace(pat, static_cast<double>(cnt) / static_cast<double>(n_samples));
    return dist;
}

/// Sample dump: a header line with provenance, then one pattern per line.
inline void write_samples(std::ostream& os, const std::vector<OutputPattern>& samples,
                          const ExperimentConfig& cfg, std::uint64_t seed) {
    os << "# config_hash=" << config_hash(cfg) << " seed=" << seed
       << " n_samples=" << samples.size() << "\n";
    for (const auto& s : samples) os << pattern_to_string(s) << "\n";
}

}  // namespace gbs
