#ifndef PAPRLAB_RNG_HPP
#define PAPRLAB_RNG_HPP

#include <cstdint>

namespace paprlab {

/// SplitMix64 generator. Chosen over std::mt19937_64 + distributions because
/// the full output sequence (including derived bits, signs and uniforms) is
/// bit-identical across platforms and standard library implementations, which
/// the dataset reproducibility contract depends on.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Single bit (top bit of the next word).
    int next_bit() { return static_cast<int>(next() >> 63); }

    /// +1.0 or -1.0 with equal probability.
    double next_sign() { return next_bit() ? -1.0 : 1.0; }

    /// Uniform in [0, 1) with 53 bits of precision.
    double next_unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [-range, range).
    double next_symmetric(double range) {
        return (2.0 * next_unit() - 1.0) * range;
    }

    /// Uniform integer in [0, bound). Rejection-free modulo is fine here:
    /// bound is tiny compared to 2^64, bias is < bound/2^64.
    std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

private:
    std::uint64_t state_;
};

/// Deterministic seed derivation: one SplitMix64 finalizer round applied to
/// base offset by the salt. Used everywhere a subordinate stream is needed
/// (per-row seeds, per-epoch shuffles, evaluation streams) so that all
/// randomness flows from a single master seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace paprlab

#endif // PAPRLAB_RNG_HPP
