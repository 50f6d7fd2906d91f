#include "vlearn/replay_buffer.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace vlearn {

namespace {
bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}
}  // namespace

void Transition::validate() const {
    if (!all_finite(s) || !all_finite(a) || !all_finite(s_next) ||
        !std::isfinite(r) || !std::isfinite(logp_b)) {
        throw std::invalid_argument("Transition: non-finite field");
    }
    for (double ai : a) {
        if (std::abs(ai) > 1.0) {
            throw std::invalid_argument("Transition: action outside [-1, 1]");
        }
    }
}

ReplayBuffer::ReplayBuffer(const BufferConfig& cfg) : capacity_(cfg.capacity) {
    if (capacity_ < 1) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
    data_.reserve(std::min<std::size_t>(capacity_, 1 << 20));
}

void ReplayBuffer::push(Transition t) {
    t.validate();
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[head_] = std::move(t);
        head_ = (head_ + 1) % capacity_;
    }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= data_.size()) throw std::out_of_range("ReplayBuffer::at");
    if (data_.size() < capacity_) return data_[i];
    return data_[(head_ + i) % capacity_];
}

std::vector<Transition> ReplayBuffer::sample_batch(std::size_t k, RngStream& rng) const {
    if (k < 1) throw std::invalid_argument("ReplayBuffer: batch size must be >= 1");
    if (data_.empty()) {
        throw std::underflow_error("ReplayBuffer: cannot sample from an empty buffer");
    }
    std::vector<Transition> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        // Logical indexing keeps draws independent of the ring's physical
        // rotation, so a dumped-and-reloaded buffer samples identically.
        out.push_back(at(rng.uniform_index(data_.size())));
    }
    return out;
}

void ReplayBuffer::dump_jsonl(std::ostream& os) const {
    for (std::size_t i = 0; i < size(); ++i) {
        const Transition& t = at(i);
        nlohmann::json j{{"s", t.s},         {"a", t.a},       {"r", t.r},
                         {"s_next", t.s_next}, {"done", t.done}, {"logp_b", t.logp_b}};
        os << j.dump() << "\n";
    }
}

ReplayBuffer ReplayBuffer::load_jsonl(std::istream& is, const BufferConfig& cfg) {
    ReplayBuffer buf(cfg);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        Transition t;
        t.s = j.at("s").get<std::vector<double>>();
        t.a = j.at("a").get<std::vector<double>>();
        t.r = j.at("r").get<double>();
        t.s_next = j.at("s_next").get<std::vector<double>>();
        t.done = j.at("done").get<bool>();
        t.logp_b = j.at("logp_b").get<double>();
        buf.push(std::move(t));
    }
    return buf;
}

}  // namespace vlearn
