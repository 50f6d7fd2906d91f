#include "vlearn/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vlearn {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
    // Shortest representation that parses back to the same double.
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string fmt_int_list(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

std::string fmt_double_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt_double(v[i]);
    }
    return out;
}

// Typed accessors over the raw key/value map; every getter records that its
// key was consumed so leftovers can be reported as schema violations.
struct Reader {
    std::map<std::string, std::string> kv;
    std::map<std::string, bool> seen;

    bool has(const std::string& k) {
        auto it = kv.find(k);
        if (it == kv.end()) return false;
        seen[k] = true;
        return true;
    }
    std::string raw(const std::string& k) { return kv.at(k); }

    void get(const std::string& k, double& out) {
        if (!has(k)) return;
        try {
            std::size_t pos = 0;
            out = std::stod(raw(k), &pos);
            if (pos != raw(k).size()) throw std::invalid_argument("");
        } catch (...) {
            throw ConfigError("config key '" + k + "': expected a real number, got '" + raw(k) + "'");
        }
    }
    void get(const std::string& k, uint64_t& out) {
        if (!has(k)) return;
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(raw(k), &pos);
            if (pos != raw(k).size() || v < 0) throw std::invalid_argument("");
            out = static_cast<uint64_t>(v);
        } catch (...) {
            throw ConfigError("config key '" + k + "': expected a non-negative integer, got '" +
                              raw(k) + "'");
        }
    }
    void get(const std::string& k, int& out) {
        uint64_t v = static_cast<uint64_t>(out);
        get(k, v);
        out = static_cast<int>(v);
    }
    void get(const std::string& k, bool& out) {
        if (!has(k)) return;
        const std::string v = raw(k);
        if (v == "true" || v == "1") {
            out = true;
        } else if (v == "false" || v == "0") {
            out = false;
        } else {
            throw ConfigError("config key '" + k + "': expected true/false, got '" + v + "'");
        }
    }
    void get(const std::string& k, std::vector<int>& out) {
        if (!has(k)) return;
        out.clear();
        std::stringstream ss(raw(k));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                out.push_back(std::stoi(trim(item)));
            } catch (...) {
                throw ConfigError("config key '" + k + "': expected a comma list of integers");
            }
        }
    }
    void get(const std::string& k, std::vector<double>& out) {
        if (!has(k)) return;
        out.clear();
        std::stringstream ss(raw(k));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                out.push_back(std::stod(trim(item)));
            } catch (...) {
                throw ConfigError("config key '" + k + "': expected a comma list of reals");
            }
        }
    }
    template <typename Enum, typename FromStr>
    void get_enum(const std::string& k, Enum& out, FromStr&& from) {
        if (!has(k)) return;
        try {
            out = from(raw(k));
        } catch (const std::exception& e) {
            throw ConfigError("config key '" + k + "': " + e.what());
        }
    }
};

}  // namespace

ExperimentConfig ExperimentConfig::defaults() { return {}; }

std::string ExperimentConfig::resolved_text() const {
    std::map<std::string, std::string> kv;
    const TrainConfig& t = train;
    kv["seed"] = std::to_string(t.seed);
    kv["env.id"] = to_string(t.env.id);
    kv["env.dim"] = std::to_string(t.env.dim);
    kv["train.total_steps"] = std::to_string(t.total_steps);
    kv["train.warmup_steps"] = std::to_string(t.warmup_steps);
    kv["train.batch_size"] = std::to_string(t.batch_size);
    kv["train.policy_update_interval"] = std::to_string(t.policy_update_interval);
    kv["train.old_policy_interval"] = std::to_string(t.old_policy_interval);
    kv["train.eval_every"] = std::to_string(t.eval_every);
    kv["train.eval_episodes"] = std::to_string(t.eval_episodes);
    kv["net.hidden"] = fmt_int_list(t.hidden);
    kv["net.activation"] = to_string(t.activation);
    kv["net.layer_norm_first"] = t.layer_norm_first ? "true" : "false";
    kv["critic.loss"] = to_string(t.critic_loss);
    kv["critic.gamma"] = fmt_double(t.critic.gamma);
    kv["critic.eps_rho"] = fmt_double(t.critic.eps_rho);
    kv["critic.tau"] = fmt_double(t.critic.tau);
    kv["critic.lr"] = fmt_double(t.critic_lr);
    kv["critic.twin"] = t.twin_critic ? "true" : "false";
    kv["policy.loss"] = to_string(t.policy_loss);
    kv["policy.alpha"] = fmt_double(t.policy.alpha);
    kv["policy.clip"] = fmt_double(t.policy.clip);
    kv["policy.normalize_adv"] = t.policy.normalize_adv ? "true" : "false";
    kv["policy.lr"] = fmt_double(t.policy_lr);
    kv["trust_region.eps_mu"] = fmt_double(t.bounds.eps_mu);
    kv["trust_region.eps_sigma"] = fmt_double(t.bounds.eps_sigma);
    kv["buffer.capacity"] = std::to_string(t.buffer_capacity);
    kv["bandit.n"] = std::to_string(bandit.n);
    kv["bandit.trials"] = std::to_string(bandit.trials);
    kv["bandit.kl_divergences"] = fmt_double_list(bandit.kl_divergences);
    kv["bandit.behavior_mean"] = fmt_double(bandit.behavior_mean);
    kv["bandit.behavior_std"] = fmt_double(bandit.behavior_std);
    kv["bandit.reward"] = bandit.reward.kind == RewardKind::quadratic ? "quadratic" : "linear";
    kv["bandit.reward_a_star"] = fmt_double(bandit.reward.a_star);
    kv["bandit.reward_scale"] = fmt_double(bandit.reward.scale);
    kv["bandit.reward_slope"] = fmt_double(bandit.reward.slope);

    std::string out;
    for (const auto& [k, v] : kv) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    }
    return out;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    Reader r;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        }
        if (r.kv.count(key)) {
            throw ConfigError("config key '" + key + "' given more than once");
        }
        r.kv[key] = val;
    }

    ExperimentConfig cfg;
    TrainConfig& t = cfg.train;

    r.get("seed", t.seed);
    std::string env_id = to_string(t.env.id);
    int env_dim = t.env.dim;
    if (r.has("env.id")) env_id = r.raw("env.id");
    r.get("env.dim", env_dim);
    try {
        t.env = EnvSpec::make(env_id_from_string(env_id), env_dim);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config key 'env.id': ") + e.what());
    }

    r.get("train.total_steps", t.total_steps);
    r.get("train.warmup_steps", t.warmup_steps);
    r.get("train.batch_size", t.batch_size);
    r.get("train.policy_update_interval", t.policy_update_interval);
    r.get("train.old_policy_interval", t.old_policy_interval);
    r.get("train.eval_every", t.eval_every);
    r.get("train.eval_episodes", t.eval_episodes);
    r.get("net.hidden", t.hidden);
    r.get_enum("net.activation", t.activation, activation_from_string);
    r.get("net.layer_norm_first", t.layer_norm_first);
    r.get_enum("critic.loss", t.critic_loss, critic_loss_from_string);
    r.get("critic.gamma", t.critic.gamma);
    r.get("critic.eps_rho", t.critic.eps_rho);
    r.get("critic.tau", t.critic.tau);
    r.get("critic.lr", t.critic_lr);
    r.get("critic.twin", t.twin_critic);
    r.get_enum("policy.loss", t.policy_loss, policy_loss_from_string);
    r.get("policy.alpha", t.policy.alpha);
    r.get("policy.clip", t.policy.clip);
    r.get("policy.normalize_adv", t.policy.normalize_adv);
    r.get("policy.lr", t.policy_lr);
    r.get("trust_region.eps_mu", t.bounds.eps_mu);
    r.get("trust_region.eps_sigma", t.bounds.eps_sigma);
    r.get("buffer.capacity", t.buffer_capacity);
    t.policy.eps_rho = t.critic.eps_rho;  // truncation level is shared

    r.get("bandit.n", cfg.bandit.n);
    r.get("bandit.trials", cfg.bandit.trials);
    r.get("bandit.kl_divergences", cfg.bandit.kl_divergences);
    r.get("bandit.behavior_mean", cfg.bandit.behavior_mean);
    r.get("bandit.behavior_std", cfg.bandit.behavior_std);
    if (r.has("bandit.reward")) {
        const std::string v = r.raw("bandit.reward");
        if (v == "quadratic") {
            cfg.bandit.reward.kind = RewardKind::quadratic;
        } else if (v == "linear") {
            cfg.bandit.reward.kind = RewardKind::linear;
        } else {
            throw ConfigError("config key 'bandit.reward': expected quadratic or linear");
        }
    }
    r.get("bandit.reward_a_star", cfg.bandit.reward.a_star);
    r.get("bandit.reward_scale", cfg.bandit.reward.scale);
    r.get("bandit.reward_slope", cfg.bandit.reward.slope);

    std::vector<std::string> unknown;
    for (const auto& [k, v] : r.kv) {
        if (!r.seen.count(k)) unknown.push_back(k);
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }

    try {
        t.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_experiment_config(buf.str());
}

}  // namespace vlearn
