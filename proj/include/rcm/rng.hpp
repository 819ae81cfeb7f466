#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace rcm {

/// Identifies a reproducible random sequence: a root seed plus a stream
/// (replica) index. Equal pairs always produce equal sequences.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    friend bool operator==(const RngStream&, const RngStream&) = default;
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Child stream for a named purpose and index, e.g. ("edges", replica).
/// The root seed is kept; only the stream id is remixed.
inline RngStream substream(const RngStream& parent, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t s = splitmix64(parent.stream_id ^ 0x5bd1e9955bd1e995ULL);
    s = splitmix64(s ^ fnv1a64(tag));
    s = splitmix64(s ^ index);
    return RngStream{parent.seed, s};
}

/// Random engine bound to one RngStream. Conversions to doubles are done
/// here rather than through std distributions so that uniform draws are
/// identical across standard library implementations.
class Rng {
public:
    explicit Rng(const RngStream& stream)
        : engine_(splitmix64(stream.seed ^ splitmix64(stream.stream_id + 0x632be59bd9b4e019ULL))) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        std::poisson_distribution<std::uint64_t> dist(mean);
        return dist(engine_);
    }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) {
        std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
        return dist(engine_);
    }

    /// Number of failures before the first success of a Bernoulli(p)
    /// sequence; used to skip over runs of rejected candidates.
    std::uint64_t geometric_skip(double p) {
        if (p >= 1.0) return 0;
        if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
        const double k = std::floor(std::log(uniform_pos()) / std::log1p(-p));
        if (!(k < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
        return static_cast<std::uint64_t>(k);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace rcm
