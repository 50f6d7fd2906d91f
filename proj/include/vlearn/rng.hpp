#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace vlearn {

// Deterministic, serializable random stream (xoshiro256++ seeded via
// splitmix64). State is four 64-bit words, so checkpoints can capture it
// exactly. Every consumer of randomness takes one of these explicitly;
// there is no hidden global generator.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}

    RngStream(uint64_t seed, uint64_t stream_id) {
        uint64_t x = seed ^ (stream_id * 0x9e3779b97f4a7c15ULL);
        for (auto& w : state_) {
            w = splitmix64(x);
        }
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double uniform01_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via Box-Muller. No cached spare, so the state is
    // exactly the four words above.
    double normal() {
        const double u1 = uniform01_pos();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    // Uniform index in [0, n) via multiply-shift.
    uint64_t uniform_index(uint64_t n) {
        return static_cast<uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    std::array<uint64_t, 4> state() const { return state_; }
    void set_state(const std::array<uint64_t, 4>& s) { state_ = s; }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::array<uint64_t, 4> state_;
};

// Stream ids used by the trainer so that sub-streams never collide.
enum class StreamId : uint64_t {
    param_init = 1,
    env = 2,
    action = 3,
    buffer = 4,
    eval = 5,
};

inline RngStream make_stream(uint64_t seed, StreamId id) {
    return RngStream(seed, static_cast<uint64_t>(id));
}

}  // namespace vlearn
