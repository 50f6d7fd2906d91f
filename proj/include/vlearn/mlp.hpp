#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vlearn/rng.hpp"

namespace vlearn {

// Flat 64-bit parameter storage. The layout inside is fixed by MlpSpec, so a
// ParamVector is both the unit of gradient accumulation and the unit of
// checkpointing.
using ParamVector = std::vector<double>;

enum class Activation { tanh, relu };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

// Architecture of a feed-forward network. Parameter layout, in order:
//   [layer-norm gain (input_dim), layer-norm shift (input_dim)]   (if enabled)
//   per linear layer: weights row-major (fan_out x fan_in), then biases.
// Hidden layers use `activation`; the output layer is linear.
struct MlpSpec {
    int input_dim = 1;
    std::vector<int> hidden;
    int output_dim = 1;
    Activation activation = Activation::tanh;
    bool layer_norm_first = false;

    void validate() const;  // throws std::invalid_argument on bad dimensions

    std::size_t param_count() const;
    std::size_t num_linear_layers() const { return hidden.size() + 1; }
    int layer_fan_in(std::size_t layer) const;
    int layer_fan_out(std::size_t layer) const;
    // Offset of layer's weight block; biases follow the weights.
    std::size_t layer_offset(std::size_t layer) const;

    // Canonical text form, hashed into checkpoints to detect mismatches.
    std::string canonical_string() const;
    uint64_t hash() const;

    bool operator==(const MlpSpec&) const = default;
};

// Variance floor used by layer normalization.
inline constexpr double kLayerNormVarFloor = 1e-8;

// Normalize x to zero mean / unit variance across features, then apply the
// elementwise affine (gain, shift). Exposed separately so tests can probe the
// pre-affine statistics.
void layer_norm(std::span<const double> x, std::span<const double> gain,
                std::span<const double> shift, std::span<double> out);

// Scratch buffers for a forward/backward pass. Reusable across calls with the
// same spec; reallocates lazily when the spec changes shape.
struct MlpWorkspace {
    // act[0] is the (possibly layer-normalized) network input; act[l+1] is the
    // output of linear layer l after its activation (output layer: linear).
    std::vector<std::vector<double>> act;
    std::vector<double> raw_input;   // pre-layer-norm input copy
    std::vector<double> ln_xhat;     // normalized input before affine
    double ln_sigma = 1.0;
    bool ln_floored = false;
    std::vector<std::vector<double>> delta;  // backward scratch

    const std::vector<double>& output() const { return act.back(); }
};

// Deterministic fan-in-scaled uniform initialization: weights uniform in
// [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero, layer-norm gain 1 / shift 0.
ParamVector init_params(const MlpSpec& spec, uint64_t seed);

void forward(const MlpSpec& spec, const ParamVector& params,
             std::span<const double> x, MlpWorkspace& ws);
std::vector<double> forward(const MlpSpec& spec, const ParamVector& params,
                            std::span<const double> x);

// Backward pass for the scalar function <upstream, forward(x)>. Requires `ws`
// filled by forward(). Accumulates (+=) into grad_params when non-null and
// writes the input gradient when grad_x is non-null.
void backward(const MlpSpec& spec, const ParamVector& params, MlpWorkspace& ws,
              std::span<const double> upstream, ParamVector* grad_params,
              std::vector<double>* grad_x);

// Exact reverse-mode gradient of <upstream, forward(x)> w.r.t. params.
ParamVector grad_params(const MlpSpec& spec, const ParamVector& params,
                        std::span<const double> x, std::span<const double> upstream);

// Gradient of <upstream, forward(x)> w.r.t. x.
std::vector<double> grad_input(const MlpSpec& spec, const ParamVector& params,
                               std::span<const double> x, std::span<const double> upstream);

}  // namespace vlearn
