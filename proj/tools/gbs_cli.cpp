#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gbs/approx.hpp"
#include "gbs/config.hpp"
#include "gbs/fock.hpp"
#include "gbs/pattern.hpp"
#include "gbs/pnr.hpp"
#include "gbs/sampler.hpp"
#include "gbs/threshold.hpp"
#include "gbs/unitary.hpp"

namespace {

int log_level() {
    const char* env = std::getenv("GBS_LOG");
    if (!env) return 0;
    const std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[info] " << msg << "\n";
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

struct LoadedConfig {
    gbs::ExperimentConfig cfg;
    nlohmann::json raw;
};

LoadedConfig load(const std::string& path, std::optional<std::uint64_t> seed_override,
                  std::optional<double> eta_ind_override) {
    std::ifstream in(path);
    if (!in) throw gbs::ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw gbs::ConfigError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    LoadedConfig out;
    out.raw = j;
    out.cfg = gbs::parse_config(j);
    if (seed_override) out.cfg.seed = *seed_override;
    if (eta_ind_override) {
        out.cfg.eta_ind = *eta_ind_override;
        out.cfg.validate();
    }
    return out;
}

// T comes from the seed unless the config embeds an explicit matrix
// ("T": K rows of K entries, each [re, im]), which is validated for unitarity.
gbs::Matrix interferometer_from(const LoadedConfig& lc) {
    if (!lc.raw.contains("T")) return gbs::haar_random_unitary(lc.cfg.K, lc.cfg.seed);
    const auto& jt = lc.raw.at("T");
    if (!jt.is_array() || static_cast<int>(jt.size()) != lc.cfg.K)
        throw gbs::ConfigError("'T' must be a K x K matrix");
    gbs::Matrix T(lc.cfg.K, lc.cfg.K);
    try {
        for (int i = 0; i < lc.cfg.K; ++i) {
            const auto& row = jt.at(i);
            if (!row.is_array() || static_cast<int>(row.size()) != lc.cfg.K)
                throw gbs::ConfigError("'T' must be a K x K matrix");
            for (int k = 0; k < lc.cfg.K; ++k) {
                const auto& e = row.at(k);
                if (!e.is_array() || e.size() != 2) throw gbs::ConfigError("'T' entries are [re, im]");
                T(i, k) = gbs::Complex(e.at(0).get<double>(), e.at(1).get<double>());
            }
        }
    } catch (const nlohmann::json::exception& err) {
        throw gbs::ConfigError(std::string("malformed 'T': ") + err.what());
    }
    gbs::require_unitary(T, std::max(lc.cfg.tol, 1e-10));
    return T;
}

gbs::OutputPattern parse_pattern(const std::string& text, int K) {
    gbs::OutputPattern s;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        try {
            s.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw gbs::ConfigError("pattern entries must be integers");
        }
    gbs::validate_pattern(s, K);
    return s;
}

// clicked ports are 1-based at the interface, 0-based internally
gbs::ClickPattern parse_clicks(const std::string& text, int K) {
    gbs::ClickPattern u;
    if (!text.empty()) {
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ','))
            try {
                u.push_back(std::stoi(tok) - 1);
            } catch (const std::exception&) {
                throw gbs::ConfigError("clicked ports must be integers");
            }
    }
    std::sort(u.begin(), u.end());
    gbs::validate_clicks(u, K);
    return u;
}

int cmd_prob_pnr(const LoadedConfig& lc, const std::string& pattern_text,
                 std::optional<int> ncut, double epsilon, double trunc_factor, int threads,
                 double guard) {
    const gbs::OutputPattern s = parse_pattern(pattern_text, lc.cfg.K);
    const gbs::Matrix T = interferometer_from(lc);
    Timer timer;
    if (ncut) {
        const gbs::GaussianEngine engine(lc.cfg, T);
        const gbs::EmpiricalDistribution p_sim =
            gbs::estimate_p_sim(lc.cfg, T, trunc_factor, epsilon, lc.cfg.seed, 0, threads);
        const double p = gbs::p_approx(engine, s, *ncut, p_sim);
        std::cout << "P_approx(" << gbs::pattern_to_string(s) << ") = " << fmt17(p) << "\n";
    } else {
        const double p = gbs::prob_total_exact(lc.cfg, T, s, guard);
        std::cout << "P(" << gbs::pattern_to_string(s) << ") = " << fmt17(p) << "\n";
    }
    std::cerr << "time_ms " << timer.ms() << "\n";
    return 0;
}

int cmd_prob_threshold(const LoadedConfig& lc, const std::string& clicks_text, bool ideal) {
    const gbs::ClickPattern u = parse_clicks(clicks_text, lc.cfg.K);
    const gbs::Matrix T = interferometer_from(lc);
    Timer timer;
    const double p = ideal ? gbs::prob_threshold_ideal(lc.cfg, T, u)
                           : gbs::prob_threshold(lc.cfg, T, u);
    std::string label;
    for (std::size_t i = 0; i < u.size(); ++i) label += (i ? "," : "") + std::to_string(u[i] + 1);
    std::cout << "P_click(" << label << ") = " << fmt17(p) << "\n";
    std::cerr << "time_ms " << timer.ms() << "\n";
    return 0;
}

int cmd_sample(const LoadedConfig& lc, std::uint64_t n_samples, const std::string& out_path,
               double trunc_factor) {
    const gbs::Matrix T = interferometer_from(lc);
    const gbs::DistinguishableSampler sampler(lc.cfg, T, trunc_factor);
    Timer timer;
    std::vector<gbs::OutputPattern> samples;
    samples.reserve(n_samples);
    std::mt19937_64 rng(gbs::detail::mix_seed(lc.cfg.seed, 0));
    double total_photons = 0.0;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        samples.push_back(sampler.sample(rng));
        total_photons += gbs::total_photons(samples.back());
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    gbs::write_samples(out, samples, lc.cfg, lc.cfg.seed);
    if (!out) throw std::runtime_error("failed writing samples to " + out_path);
    const double mean_per_mode =
        n_samples ? total_photons / (static_cast<double>(n_samples) * lc.cfg.M) : 0.0;
    std::cout << "n_samples = " << n_samples << "\n";
    std::cout << "mean_photons_per_mode = " << fmt17(mean_per_mode) << "\n";
    std::cerr << "time_ms " << timer.ms() << "\n";
    return 0;
}

int cmd_fidelity_sweep(const LoadedConfig& lc, const std::string& out_path, double epsilon_flag,
                       bool epsilon_given, std::optional<int> ncut_flag, int threads) {
    gbs::ExperimentConfig cfg = lc.cfg;
    std::vector<double> etas{cfg.eta_ind};
    std::vector<int> ncuts;
    int n_haar = 10;
    double epsilon = epsilon_given ? epsilon_flag : 1e-6;
    gbs::OutputPattern pattern;

    if (lc.raw.contains("sweep")) {
        const auto& sw = lc.raw.at("sweep");
        try {
            if (sw.contains("eta_ind")) etas = sw.at("eta_ind").get<std::vector<double>>();
            if (sw.contains("n_cut")) ncuts = sw.at("n_cut").get<std::vector<int>>();
            if (sw.contains("n_haar")) n_haar = sw.at("n_haar").get<int>();
            if (!epsilon_given && sw.contains("epsilon")) epsilon = sw.at("epsilon").get<double>();
            if (sw.contains("pattern")) pattern = sw.at("pattern").get<std::vector<int>>();
        } catch (const nlohmann::json::exception& e) {
            throw gbs::ConfigError(std::string("malformed 'sweep': ") + e.what());
        }
    }
    if (pattern.empty()) {
        pattern.assign(cfg.K, 0);
        for (int k = 0; k < std::min(cfg.M, cfg.K); ++k) pattern[k] = 1;
    }
    gbs::validate_pattern(pattern, cfg.K);
    if (ncut_flag) ncuts = {*ncut_flag};
    if (ncuts.empty()) ncuts = {gbs::total_photons(pattern)};

    log_info("sweep over " + std::to_string(etas.size()) + " eta values, " +
             std::to_string(ncuts.size()) + " cuts, " + std::to_string(n_haar) + " seeds");
    const gbs::SweepResult result =
        gbs::fidelity_sweep(cfg, etas, ncuts, n_haar, pattern, epsilon, threads);

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    gbs::write_fidelity_csv(out, result.records);
    if (!out) throw std::runtime_error("failed writing CSV to " + out_path);

    for (const auto& fit : result.fits)
        std::cout << "fit n_cut=" << fit.n_cut << " c=" << fmt17(fit.c)
                  << " sse_exp=" << fmt17(fit.sse_exp) << " a=" << fmt17(fit.a)
                  << " b=" << fmt17(fit.b) << " sse_lin=" << fmt17(fit.sse_lin) << "\n";
    return 0;
}

int cmd_oracle_check(const LoadedConfig& lc, double guard) {
    const gbs::Matrix T = interferometer_from(lc);
    const int cutoff = gbs::fock_default_cutoff(lc.cfg);
    log_info("fock cutoff " + std::to_string(cutoff));
    const gbs::PatternDistribution oracle = gbs::fock_pnr_distribution(lc.cfg, T, cutoff);

    const gbs::GaussianEngine engine(lc.cfg, T);
    bool pass = true;
    double worst = 0.0;

    // PNR comparison over all patterns with N <= 4
    const int K = lc.cfg.K;
    gbs::OutputPattern cap(K, 4);
    for (int n = 0; n <= 4; ++n)
        for (const auto& s : gbs::enumerate_subpatterns(cap, n)) {
            auto it = oracle.find(s);
            const double po = it == oracle.end() ? 0.0 : it->second;
            const double pe = engine.prob_total_exact(s, guard);
            const double diff = std::abs(po - pe);
            worst = std::max(worst, diff);
            if (diff > 1e-6) {
                pass = false;
                std::cout << "MISMATCH pnr " << gbs::pattern_to_string(s) << " fock=" << fmt17(po)
                          << " engine=" << fmt17(pe) << "\n";
            }
        }
    std::cout << "pnr_max_abs_diff = " << fmt17(worst) << "\n";

    // threshold comparison over every click set
    const gbs::ClickDistribution oracle_clicks = gbs::threshold_from_pnr(oracle);
    double worst_thr = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << K); ++mask) {
        gbs::ClickPattern u;
        for (int k = 0; k < K; ++k)
            if (mask >> k & 1) u.push_back(k);
        auto it = oracle_clicks.find(u);
        const double po = it == oracle_clicks.end() ? 0.0 : it->second;
        const double pe = gbs::prob_threshold(lc.cfg, T, u);
        const double diff = std::abs(po - pe);
        worst_thr = std::max(worst_thr, diff);
        if (diff > 1e-6) {
            pass = false;
            std::cout << "MISMATCH threshold {";
            for (std::size_t i = 0; i < u.size(); ++i) std::cout << (i ? "," : "") << u[i] + 1;
            std::cout << "} fock=" << fmt17(po) << " engine=" << fmt17(pe) << "\n";
        }
    }
    std::cout << "threshold_max_abs_diff = " << fmt17(worst_thr) << "\n";
    std::cout << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian boson sampling with partially distinguishable photons"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> eta_ind;
    std::optional<int> ncut;
    double epsilon = 1e-6;
    bool epsilon_given = false;
    double trunc_factor = 10.0;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool ideal = false;
    std::string out_path;
    double guard = 1e6;

    app.add_option("--config", config_path, "path to the JSON config")->required();
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--eta-ind", eta_ind, "override the config indistinguishability");
    app.add_option("--threads", threads, "cap internal parallelism");
    app.add_option("--ncut", ncut, "truncation N_cut for the approximate path");
    app.add_option("--epsilon", epsilon, "target accuracy of the empirical distribution")
        ->each([&](const std::string&) { epsilon_given = true; });
    app.add_option("--trunc-factor", trunc_factor, "photon-number truncation factor t");
    app.add_option("--guard", guard, "exact-enumeration size guard");
    app.add_flag("--ideal", ideal, "threshold: use the torontonian route");
    app.add_option("--out", out_path, "output file path");

    std::string pattern_text;
    std::string clicks_text;
    std::uint64_t n_samples = 0;

    CLI::App* pnr = app.add_subcommand("prob-pnr", "exact or truncated PNR pattern probability");
    pnr->add_option("pattern", pattern_text, "comma-separated counts, length K")->required();

    CLI::App* thr = app.add_subcommand("prob-threshold", "threshold click-pattern probability");
    thr->add_option("clicks", clicks_text, "comma-separated 1-based clicked ports (may be empty)");

    CLI::App* smp = app.add_subcommand("sample", "draw distinguishable-photon output samples");
    smp->add_option("n_samples", n_samples, "number of samples")->required();

    CLI::App* swp = app.add_subcommand("fidelity-sweep", "fidelity grid sweep, CSV output");
    CLI::App* orc = app.add_subcommand("oracle-check", "Fock-basis oracle comparison");

    CLI11_PARSE(app, argc, argv);

    try {
        const LoadedConfig lc = load(config_path, seed, eta_ind);
        if (threads < 1) throw gbs::ConfigError("--threads must be positive");
        if (pnr->parsed())
            return cmd_prob_pnr(lc, pattern_text, ncut, epsilon, trunc_factor, threads, guard);
        if (thr->parsed()) return cmd_prob_threshold(lc, clicks_text, ideal);
        if (smp->parsed()) {
            if (out_path.empty()) throw gbs::ConfigError("sample requires --out");
            return cmd_sample(lc, n_samples, out_path, trunc_factor);
        }
        if (swp->parsed()) {
            if (out_path.empty()) throw gbs::ConfigError("fidelity-sweep requires --out");
            return cmd_fidelity_sweep(lc, out_path, epsilon, epsilon_given, ncut, threads);
        }
        if (orc->parsed()) return cmd_oracle_check(lc, guard);
    } catch (const gbs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gbs::GuardError& e) {
        std::cerr << "guard violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
