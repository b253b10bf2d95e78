#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "gbs/errors.hpp"

namespace gbs {

/// Per-port photon counts of a PNR detection event. Index 0 is port 1.
using OutputPattern = std::vector<int>;

/// Set of clicked ports for a threshold detection event, 0-based and
/// canonically sorted ascending. Serialized 1-based at the interfaces.
using ClickPattern = std::vector<int>;

inline int total_photons(const OutputPattern& s) {
    return std::accumulate(s.begin(), s.end(), 0);
}

struct PatternHash {
    std::size_t operator()(const OutputPattern& s) const noexcept {
        // FNV-1a over the counts
        std::uint64_t h = 1469598103934665603ULL;
        for (int v : s) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

inline void validate_pattern(const OutputPattern& s, int num_ports) {
    if (static_cast<int>(s.size()) != num_ports)
        throw ConfigError("pattern length " + std::to_string(s.size()) +
                                    " does not match port count " + std::to_string(num_ports));
    for (int v : s)
        if (v < 0) throw ConfigError("pattern has a negative count");
}

inline void validate_clicks(const ClickPattern& u, int num_ports) {
    int prev = -1;
    for (int p : u) {
        if (p < 0 || p >= num_ports)
            throw ConfigError("clicked port index out of range");
        if (p <= prev)
            throw ConfigError("click pattern must be sorted ascending without repeats");
        prev = p;
    }
}

/// Support set of a PNR pattern: the sorted list of ports with s_k > 0.
inline ClickPattern pattern_support(const OutputPattern& s) {
    ClickPattern u;
    for (int k = 0; k < static_cast<int>(s.size()); ++k)
        if (s[k] > 0) u.push_back(k);
    return u;
}

inline std::string pattern_to_string(const OutputPattern& s, char sep = ',') {
    std::string out;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (k) out.push_back(sep);
        out += std::to_string(s[k]);
    }
    return out;
}

}  // namespace gbs
