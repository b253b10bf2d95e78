#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gbs/config.hpp"
#include "gbs/pattern.hpp"
#include "gbs/pnr.hpp"
#include "gbs/sampler.hpp"
#include "gbs/unitary.hpp"

namespace gbs {

struct FidelityRecord {
    double eta_ind = 0.0;
    int n_cut = 0;
    double epsilon = 0.0;
    OutputPattern pattern;
    double fidelity = 0.0;
    std::uint64_t haar_seed = 0;
    double runtime_ms = 0.0;
};

/// P_n for n = 0..N: the exact indistinguishable part of total n combined
/// with the supplied distinguishable-part evaluator.
template <class DistFn>
std::vector<double> prob_components(const GaussianEngine& engine, const OutputPattern& s,
                                    DistFn&& dist) {
    const int N = total_photons(s);
    std::vector<double> comps(N + 1);
    for (int n = 0; n <= N; ++n) comps[n] = engine.prob_component(s, n, dist);
    return comps;
}

/// Truncated probability: sum of P_n up to n = N_cut, with the
/// distinguishable part read from the empirical table.
inline double p_approx(const GaussianEngine& engine, const OutputPattern& s, int n_cut,
                       const EmpiricalDistribution& p_sim) {
    const int N = total_photons(s);
    if (n_cut < 0 || n_cut > N) throw std::invalid_argument("N_cut must lie in [0, N]");
    if (p_sim.config_hash != config_hash(engine.config()))
        throw ConfigError("empirical distribution was built with a different config");
    double total = 0.0;
    for (int n = 0; n <= n_cut; ++n)
        total += engine.prob_component(
            s, n, [&](const OutputPattern& rest) { return p_sim.prob(rest); });
    return total;
}

inline double p_approx(const ExperimentConfig& cfg, const Matrix& T, const OutputPattern& s,
                       int n_cut, const EmpiricalDistribution& p_sim) {
    return p_approx(GaussianEngine(cfg, T), s, n_cut, p_sim);
}

/// F = P_approx(N_cut) / P_approx(N), both sides sharing one empirical
/// distinguishable distribution so the ratio isolates truncation error.
/// exact_denominator switches both sides to the exact decomposition sum
/// (small K only); epsilon is then ignored and recorded as 0.
inline FidelityRecord fidelity(const ExperimentConfig& cfg, const Matrix& T,
                               const OutputPattern& s, double epsilon, int n_cut,
                               bool exact_denominator = false, int n_threads = 1,
                               double guard = 1e6) {
    const int N = total_photons(s);
    if (n_cut < 0 || n_cut > N) throw std::invalid_argument("N_cut must lie in [0, N]");
    const auto start = std::chrono::steady_clock::now();
    const GaussianEngine engine(cfg, T);

    std::vector<double> comps;
    if (exact_denominator) {
        comps = prob_components(
            engine, s, [&](const OutputPattern& rest) { return engine.prob_dist_exact(rest, guard); });
    } else {
        const EmpiricalDistribution p_sim =
            estimate_p_sim(cfg, T, 10.0, epsilon, cfg.seed, 0, n_threads);
        comps = prob_components(engine, s,
                                [&](const OutputPattern& rest) { return p_sim.prob(rest); });
    }
    double num = 0.0, den = 0.0;
    for (int n = 0; n <= N; ++n) {
        den += comps[n];
        if (n <= n_cut) num += comps[n];
    }
    if (den == 0.0) throw std::domain_error("total probability is zero; fidelity undefined");

    FidelityRecord rec;
    rec.eta_ind = cfg.eta_ind;
    rec.n_cut = n_cut;
    rec.epsilon = exact_denominator ? 0.0 : epsilon;
    rec.pattern = s;
    rec.fidelity = num / den;
    rec.haar_seed = cfg.seed;
    rec.runtime_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    return rec;
}

/// Per-N_cut least-squares fits over sweep records: the one-parameter model
/// F = 1 - c e^{eta_ind} against a two-parameter linear model F = a + b eta_ind.
struct SweepFit {
    int n_cut = 0;
    double c = 0.0;
    double sse_exp = 0.0;
    double a = 0.0;
    double b = 0.0;
    double sse_lin = 0.0;
};

struct SweepResult {
    std::vector<FidelityRecord> records;
    std::vector<SweepFit> fits;
};

namespace detail {

inline SweepFit fit_models(int n_cut, const std::vector<double>& eta, const std::vector<double>& f) {
    SweepFit fit;
    fit.n_cut = n_cut;
    const std::size_t n = eta.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::exp(eta[i]);
        sxy += x * (1.0 - f[i]);
        sxx += x * x;
    }
    fit.c = sxx > 0.0 ? sxy / sxx : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = f[i] - (1.0 - fit.c * std::exp(eta[i]));
        fit.sse_exp += r * r;
    }
    double se = 0.0, sf = 0.0, see = 0.0, sef = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        se += eta[i];
        sf += f[i];
        see += eta[i] * eta[i];
        sef += eta[i] * f[i];
    }
    const double denom = n * see - se * se;
    fit.b = denom != 0.0 ? (n * sef - se * sf) / denom : 0.0;
    fit.a = (sf - fit.b * se) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = f[i] - (fit.a + fit.b * eta[i]);
        fit.sse_lin += r * r;
    }
    return fit;
}

}  // namespace detail

/// Fidelity sweep over (eta_ind x N_cut x haar seed). Haar seeds run
/// base_seed..base_seed+n_haar-1; per (eta, seed) the interferometer,
/// empirical distribution, and component sums are shared, while runtime_ms
/// times the truncated-sum evaluation at each N_cut. Records are emitted in
/// grid order; fits are per N_cut over all records.
inline SweepResult fidelity_sweep(const ExperimentConfig& base, const std::vector<double>& etas,
                                  const std::vector<int>& n_cuts, int n_haar,
                                  const OutputPattern& s, double epsilon, int n_threads = 1) {
    if (n_haar <= 0) throw ConfigError("n_haar must be positive");
    if (etas.empty() || n_cuts.empty()) throw ConfigError("sweep grid must be nonempty");
    const int N = total_photons(s);
    for (int n_cut : n_cuts)
        if (n_cut < 0 || n_cut > N) throw ConfigError("N_cut must lie in [0, N]");

    SweepResult out;
    out.records.reserve(etas.size() * n_cuts.size() * static_cast<std::size_t>(n_haar));
    // rec_at(e, c, h) laid out in grid order
    const std::size_t stride_c = static_cast<std::size_t>(n_haar);
    const std::size_t stride_e = n_cuts.size() * stride_c;
    out.records.resize(etas.size() * stride_e);

    for (std::size_t ei = 0; ei < etas.size(); ++ei) {
        ExperimentConfig cfg = base;
        cfg.eta_ind = etas[ei];
        cfg.validate();
        for (int h = 0; h < n_haar; ++h) {
            cfg.seed = base.seed + static_cast<std::uint64_t>(h);
            const Matrix T = haar_random_unitary(cfg.K, cfg.seed);
            const GaussianEngine engine(cfg, T);
            const EmpiricalDistribution p_sim =
                estimate_p_sim(cfg, T, 10.0, epsilon, cfg.seed, 0, n_threads);
            const double den = p_approx(engine, s, N, p_sim);
            if (den == 0.0) throw std::domain_error("total probability is zero; fidelity undefined");
            for (std::size_t ci = 0; ci < n_cuts.size(); ++ci) {
                const auto start = std::chrono::steady_clock::now();
                const double num = p_approx(engine, s, n_cuts[ci], p_sim);
                const double ms = std::chrono::duration<double, std::milli>(
                                      std::chrono::steady_clock::now() - start)
                                      .count();
                FidelityRecord rec;
                rec.eta_ind = etas[ei];
                rec.n_cut = n_cuts[ci];
                rec.epsilon = epsilon;
                rec.pattern = s;
                rec.fidelity = num / den;
                rec.haar_seed = cfg.seed;
                rec.runtime_ms = ms;
                out.records[ei * stride_e + ci * stride_c + h] = std::move(rec);
            }
        }
    }

    for (std::size_t ci = 0; ci < n_cuts.size(); ++ci) {
        std::vector<double> eta, f;
        for (const auto& rec : out.records)
            if (rec.n_cut == n_cuts[ci]) {
                eta.push_back(rec.eta_ind);
                f.push_back(rec.fidelity);
            }
        out.fits.push_back(detail::fit_models(n_cuts[ci], eta, f));
    }
    return out;
}

/// CSV serialization of sweep records; runtime_ms is wall time and is the
/// only nondeterministic column.
inline void write_fidelity_csv(std::ostream& os, const std::vector<FidelityRecord>& records) {
    os << "eta_ind,N_cut,epsilon,pattern,F,haar_seed,runtime_ms\n";
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const auto& rec : records) {
        os << fmt(rec.eta_ind) << ',' << rec.n_cut << ',' << fmt(rec.epsilon) << ','
           << pattern_to_string(rec.pattern, ';') << ',' << fmt(rec.fidelity) << ','
           << rec.haar_seed << ',';
        std::snprintf(buf, sizeof(buf), "%.3f", rec.runtime_ms);
        os << buf << "\n";
    }
}

}  // namespace gbs
