#include "vlearn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace vlearn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'V', 'L', 'R', 'N', 'C', 'K', 'P', '1'};
constexpr uint32_t kVersion = 1;

struct Writer {
    std::ofstream os;

    explicit Writer(const std::string& path) : os(path, std::ios::binary | std::ios::trunc) {
        if (!os) throw CheckpointError("cannot open checkpoint for writing: " + path);
    }
    void bytes(const void* p, std::size_t n) { os.write(static_cast<const char*>(p), n); }
    void u32(uint32_t v) { bytes(&v, 4); }
    void u64(uint64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void str(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    void arr(const std::vector<double>& v) {
        u64(v.size());
        bytes(v.data(), v.size() * sizeof(double));
    }
    void rng(const RngStream& r) {
        for (uint64_t w : r.state()) u64(w);
    }
};

struct ReadCursor {
    std::vector<char> data;
    std::size_t pos = 0;

    explicit ReadCursor(const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw CheckpointError("cannot open checkpoint: " + path);
        is.seekg(0, std::ios::end);
        data.resize(static_cast<std::size_t>(is.tellg()));
        is.seekg(0);
        is.read(data.data(), static_cast<std::streamsize>(data.size()));
    }
    void bytes(void* p, std::size_t n) {
        if (pos + n > data.size()) throw CheckpointError("checkpoint truncated");
        std::memcpy(p, data.data() + pos, n);
        pos += n;
    }
    uint32_t u32() {
        uint32_t v;
        bytes(&v, 4);
        return v;
    }
    uint64_t u64() {
        uint64_t v;
        bytes(&v, 8);
        return v;
    }
    double f64() {
        double v;
        bytes(&v, 8);
        return v;
    }
    std::string str() {
        const uint64_t n = u64();
        if (pos + n > data.size()) throw CheckpointError("checkpoint truncated");
        std::string s(data.data() + pos, n);
        pos += n;
        return s;
    }
    std::vector<double> arr() {
        const uint64_t n = u64();
        std::vector<double> v(n);
        bytes(v.data(), n * sizeof(double));
        return v;
    }
    RngStream rng() {
        std::array<uint64_t, 4> s;
        for (auto& w : s) w = u64();
        RngStream r;
        r.set_state(s);
        return r;
    }
};

void write_adam(Writer& w, const AdamState& a) {
    w.arr(a.m);
    w.arr(a.v);
    w.u64(a.t);
}

void read_adam(ReadCursor& r, AdamState& a) {
    a.m = r.arr();
    a.v = r.arr();
    a.t = r.u64();
}

}  // namespace

void save_checkpoint(const std::string& path, const Trainer& trainer,
                     const std::string& config_echo) {
    const TrainerState& st = trainer.state();
    Writer w(path);
    w.bytes(kMagic, sizeof(kMagic));
    w.u32(kVersion);
    w.str(config_echo);
    w.u64(st.policy.spec.hash());
    w.u64(st.critics.spec.hash());
    w.u64(st.step);
    w.u64(st.critic_updates);
    w.u64(st.policy_updates);
    w.u64(static_cast<uint64_t>(st.episode_step));
    w.arr(st.env_state);
    w.arr(st.policy.phi);
    w.arr(st.policy.old_phi);
    w.u64(static_cast<uint64_t>(st.critics.count()));
    for (int i = 0; i < st.critics.count(); ++i) {
        w.arr(st.critics.online[i]);
        w.arr(st.critics.target[i]);
    }
    write_adam(w, st.adam_policy);
    for (int i = 0; i < st.critics.count(); ++i) write_adam(w, st.adam_critic[i]);
    w.rng(st.rng_env);
    w.rng(st.rng_action);
    w.rng(st.rng_buffer);
    w.u64(st.buffer.size());
    for (std::size_t i = 0; i < st.buffer.size(); ++i) {
        const Transition& t = st.buffer.at(i);
        w.arr(t.s);
        w.arr(t.a);
        w.f64(t.r);
        w.arr(t.s_next);
        w.u64(t.done ? 1 : 0);
        w.f64(t.logp_b);
    }
    w.bytes("END1", 4);
    w.os.flush();
    if (!w.os) throw CheckpointError("failed writing checkpoint: " + path);
}

std::string read_checkpoint_config(const std::string& path) {
    ReadCursor r(path);
    char magic[8];
    r.bytes(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0) {
        throw CheckpointError("not a checkpoint file: " + path);
    }
    const uint32_t version = r.u32();
    if (version != kVersion) {
        throw CheckpointError("checkpoint version mismatch: found " + std::to_string(version) +
                              ", expected " + std::to_string(kVersion));
    }
    return r.str();
}

void restore_checkpoint(const std::string& path, Trainer& trainer) {
    ReadCursor r(path);
    char magic[8];
    r.bytes(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0) {
        throw CheckpointError("not a checkpoint file: " + path);
    }
    const uint32_t version = r.u32();
    if (version != kVersion) {
        throw CheckpointError("checkpoint version mismatch: found " + std::to_string(version) +
                              ", expected " + std::to_string(kVersion));
    }
    (void)r.str();  // config echo, already applied by the caller

    TrainerState& st = trainer.state();
    const uint64_t policy_hash = r.u64();
    const uint64_t critic_hash = r.u64();
    if (policy_hash != st.policy.spec.hash() || critic_hash != st.critics.spec.hash()) {
        throw CheckpointError("checkpoint spec hash mismatch (different architecture)");
    }

    st.step = r.u64();
    st.critic_updates = r.u64();
    st.policy_updates = r.u64();
    st.episode_step = static_cast<int>(r.u64());
    st.env_state = r.arr();
    st.policy.phi = r.arr();
    st.policy.old_phi = r.arr();
    const uint64_t n_critics = r.u64();
    if (n_critics != static_cast<uint64_t>(st.critics.count())) {
        throw CheckpointError("checkpoint critic count mismatch");
    }
    for (uint64_t i = 0; i < n_critics; ++i) {
        st.critics.online[i] = r.arr();
        st.critics.target[i] = r.arr();
    }
    read_adam(r, st.adam_policy);
    for (uint64_t i = 0; i < n_critics; ++i) read_adam(r, st.adam_critic[i]);
    st.rng_env = r.rng();
    st.rng_action = r.rng();
    st.rng_buffer = r.rng();

    const uint64_t n_transitions = r.u64();
    st.buffer = ReplayBuffer(BufferConfig{trainer.config().buffer_capacity, trainer.config().seed});
    for (uint64_t i = 0; i < n_transitions; ++i) {
        Transition t;
        t.s = r.arr();
        t.a = r.arr();
        t.r = r.f64();
        t.s_next = r.arr();
        t.done = r.u64() != 0;
        t.logp_b = r.f64();
        st.buffer.push(std::move(t));
    }

    char tail[4];
    r.bytes(tail, 4);
    if (std::memcmp(tail, "END1", 4) != 0) {
        throw CheckpointError("checkpoint trailer corrupt: " + path);
    }

    // Parameter vectors must match the architecture exactly.
    if (st.policy.phi.size() != st.policy.spec.param_count() ||
        st.policy.old_phi.size() != st.policy.spec.param_count()) {
        throw CheckpointError("checkpoint policy parameter count mismatch");
    }
    for (int i = 0; i < st.critics.count(); ++i) {
        if (st.critics.online[i].size() != st.critics.spec.param_count() ||
            st.critics.target[i].size() != st.critics.spec.param_count()) {
            throw CheckpointError("checkpoint critic parameter count mismatch");
        }
    }
}

}  // namespace vlearn
