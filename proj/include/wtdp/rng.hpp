#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace wtdp {

// splitmix64 step (Vigna). Pure 64-bit integer arithmetic, so the output is
// identical on every platform and standard library.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ generator with hand-rolled distribution transforms.
// <random> distributions are implementation-defined, which would break
// bit-reproducibility of runs across toolchains; everything here is specified
// arithmetic on the raw 64-bit stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    // Independent stream for parallel trials. Stream derivation, stable by
    // contract: the generator state is the splitmix64 expansion of
    // seed XOR (stream_id + 1) * 0x9e3779b97f4a7c15.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        return Rng(seed ^ ((stream_id + 1) * 0x9e3779b97f4a7c15ULL));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1]; safe as a log() argument.
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Unit-mean exponential.
    double exponential() { return -std::log(uniform_pos()); }

    // Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace wtdp
