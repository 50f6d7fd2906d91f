#pragma once

#include <string>

#include "vlearn/trainer.hpp"

namespace vlearn {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Single-file binary checkpoint: versioned header, config echo, spec hashes,
// every parameter/moment vector as length-prefixed little-endian doubles, RNG
// words, env state, and the full replay buffer. Captures enough to resume a
// run on the exact trajectory; load(save(x)) is bitwise exact.
void save_checkpoint(const std::string& path, const Trainer& trainer,
                     const std::string& config_echo);

// Reads only the embedded config echo (needed to rebuild the Trainer).
std::string read_checkpoint_config(const std::string& path);

// Restores the full state into a trainer built from the same config.
// Throws CheckpointError on version or spec-hash mismatch.
void restore_checkpoint(const std::string& path, Trainer& trainer);

}  // namespace vlearn
