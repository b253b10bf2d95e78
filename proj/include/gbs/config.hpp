#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gbs/errors.hpp"

namespace gbs {

/// Physical parameters of one experiment: K output ports fed by M squeezed
/// inputs with common squeezing r, overall transmission eta_t and
/// indistinguishability eta_ind.
struct ExperimentConfig {
    int K = 0;
    int M = 0;
    double r = 0.0;
    double eta_t = 1.0;
    double eta_ind = 1.0;
    std::uint64_t seed = 0;
    double tol = 1e-10;

    void validate() const {
        if (K <= 0) throw ConfigError("K must be a positive integer");
        if (M <= 0) throw ConfigError("M must be a positive integer");
        if (M > K) throw ConfigError("M may not exceed K");
        if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("r must be finite and >= 0");
        if (!(eta_t >= 0.0 && eta_t <= 1.0)) throw ConfigError("eta_t must lie in [0, 1]");
        if (!(eta_ind >= 0.0 && eta_ind <= 1.0)) throw ConfigError("eta_ind must lie in [0, 1]");
        if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    }
};

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (v.is_array())
        throw ConfigError("'" + key + "' must be a single number, not per-port values");
    if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
    return v.get<double>();
}

}  // namespace detail

/// Parses a flat JSON config object. Transmission is given either as eta_t or
/// as the triple (eta_s, eta_u, eta_d) whose product it is, never both.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const char* key : {"K", "M", "r", "eta_ind"})
        if (!j.contains(key)) throw ConfigError(std::string("missing required key '") + key + "'");

    ExperimentConfig cfg;
    try {
        cfg.K = j.at("K").get<int>();
        cfg.M = j.at("M").get<int>();
        cfg.r = detail::require_number(j, "r");
        cfg.eta_ind = detail::require_number(j, "eta_ind");

        const bool has_direct = j.contains("eta_t");
        const bool has_triple = j.contains("eta_s") || j.contains("eta_u") || j.contains("eta_d");
        if (has_direct && has_triple)
            throw ConfigError("give either eta_t or the triple (eta_s, eta_u, eta_d), not both");
        if (has_direct) {
            cfg.eta_t = detail::require_number(j, "eta_t");
        } else if (has_triple) {
            for (const char* key : {"eta_s", "eta_u", "eta_d"})
                if (!j.contains(key))
                    throw ConfigError(std::string("incomplete transmission triple: missing '") + key + "'");
            double es = detail::require_number(j, "eta_s");
            double eu = detail::require_number(j, "eta_u");
            double ed = detail::require_number(j, "eta_d");
            for (double e : {es, eu, ed})
                if (!(e >= 0.0 && e <= 1.0))
                    throw ConfigError("each transmission factor must lie in [0, 1]");
            cfg.eta_t = es * eu * ed;
        } else {
            throw ConfigError("missing transmission: give eta_t or (eta_s, eta_u, eta_d)");
        }

        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("tol")) cfg.tol = detail::require_number(j, "tol");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return parse_config(j);
}

/// Canonical serialization used for hashing and sample-dump headers.
inline std::string canonical_string(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "K=" << cfg.K << ";M=" << cfg.M << ";r=" << cfg.r << ";eta_t=" << cfg.eta_t
       << ";eta_ind=" << cfg.eta_ind << ";seed=" << cfg.seed << ";tol=" << cfg.tol;
    return os.str();
}

/// FNV-1a hash of the canonical serialization; stable across runs and platforms.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical_string(cfg)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace gbs
