#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "vlearn/rng.hpp"

namespace vlearn {

// One replay record. `done` means environment termination; time-limit
// truncation is not stored, so bootstrapping continues through it. `logp_b`
// is the log-density of `a` under the policy that produced it, written once
// at collection and never recomputed.
struct Transition {
    std::vector<double> s;
    std::vector<double> a;
    double r = 0.0;
    std::vector<double> s_next;
    bool done = false;
    double logp_b = 0.0;

    // Throws std::invalid_argument on non-finite fields or |a_i| > 1.
    void validate() const;
};

struct BufferConfig {
    std::size_t capacity = 500000;
    uint64_t seed = 0;
};

// Fixed-capacity FIFO ring with uniform with-replacement sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(const BufferConfig& cfg);

    void push(Transition t);
    // k transitions sampled uniformly with replacement; throws
    // std::underflow_error when size() < k.
    std::vector<Transition> sample_batch(std::size_t k, RngStream& rng) const;

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    // Logical index: 0 is the oldest stored transition.
    const Transition& at(std::size_t i) const;

    // JSONL fixture interface: one transition per line.
    void dump_jsonl(std::ostream& os) const;
    static ReplayBuffer load_jsonl(std::istream& is, const BufferConfig& cfg);

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // next write slot once full
    std::vector<Transition> data_;
};

}  // namespace vlearn
