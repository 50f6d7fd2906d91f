#include "vlearn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace vlearn {

Activation activation_from_string(const std::string& s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "relu") return Activation::relu;
    throw std::invalid_argument("unknown activation: " + s);
}

std::string to_string(Activation a) {
    return a == Activation::tanh ? "tanh" : "relu";
}

void MlpSpec::validate() const {
    if (input_dim < 1 || output_dim < 1) {
        throw std::invalid_argument("MlpSpec: dimensions must be >= 1");
    }
    if (hidden.empty()) {
        throw std::invalid_argument("MlpSpec: hidden layer list must be non-empty");
    }
    for (int h : hidden) {
        if (h < 1) throw std::invalid_argument("MlpSpec: hidden sizes must be >= 1");
    }
}

int MlpSpec::layer_fan_in(std::size_t layer) const {
    return layer == 0 ? input_dim : hidden[layer - 1];
}

int MlpSpec::layer_fan_out(std::size_t layer) const {
    return layer == hidden.size() ? output_dim : hidden[layer];
}

std::size_t MlpSpec::layer_offset(std::size_t layer) const {
    std::size_t off = layer_norm_first ? 2 * static_cast<std::size_t>(input_dim) : 0;
    for (std::size_t l = 0; l < layer; ++l) {
        off += static_cast<std::size_t>(layer_fan_out(l)) * (layer_fan_in(l) + 1);
    }
    return off;
}

std::size_t MlpSpec::param_count() const {
    return layer_offset(num_linear_layers());
}

std::string MlpSpec::canonical_string() const {
    std::ostringstream os;
    os << "mlp:" << input_dim << ":[";
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        if (i) os << ",";
        os << hidden[i];
    }
    os << "]:" << output_dim << ":" << to_string(activation)
       << ":ln=" << (layer_norm_first ? 1 : 0);
    return os.str();
}

uint64_t MlpSpec::hash() const {
    // FNV-1a over the canonical string.
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : canonical_string()) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

void layer_norm(std::span<const double> x, std::span<const double> gain,
                std::span<const double> shift, std::span<double> out) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double sigma = std::sqrt(std::max(var, kLayerNormVarFloor));
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = gain[i] * ((x[i] - mean) / sigma) + shift[i];
    }
}

ParamVector init_params(const MlpSpec& spec, uint64_t seed) {
    spec.validate();
    ParamVector p(spec.param_count(), 0.0);
    RngStream rng(seed, static_cast<uint64_t>(StreamId::param_init));
    std::size_t off = 0;
    if (spec.layer_norm_first) {
        for (int i = 0; i < spec.input_dim; ++i) p[off + i] = 1.0;  // gain
        off += 2 * static_cast<std::size_t>(spec.input_dim);        // shift stays 0
    }
    for (std::size_t l = 0; l < spec.num_linear_layers(); ++l) {
        const int fin = spec.layer_fan_in(l);
        const int fout = spec.layer_fan_out(l);
        const double bound = 1.0 / std::sqrt(static_cast<double>(fin));
        for (int i = 0; i < fout * fin; ++i) {
            p[off + i] = rng.uniform(-bound, bound);
        }
        off += static_cast<std::size_t>(fout) * fin;
        off += fout;  // biases stay 0
    }
    return p;
}

namespace {

void ensure_workspace(const MlpSpec& spec, MlpWorkspace& ws) {
    const std::size_t n_layers = spec.num_linear_layers();
    ws.act.resize(n_layers + 1);
    ws.delta.resize(n_layers + 1);
    ws.act[0].resize(spec.input_dim);
    ws.delta[0].resize(spec.input_dim);
    for (std::size_t l = 0; l < n_layers; ++l) {
        ws.act[l + 1].resize(spec.layer_fan_out(l));
        ws.delta[l + 1].resize(spec.layer_fan_out(l));
    }
    if (spec.layer_norm_first) {
        ws.raw_input.resize(spec.input_dim);
        ws.ln_xhat.resize(spec.input_dim);
    }
}

inline double dot(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

void forward(const MlpSpec& spec, const ParamVector& params,
             std::span<const double> x, MlpWorkspace& ws) {
    if (x.size() != static_cast<std::size_t>(spec.input_dim)) {
        throw std::invalid_argument("forward: input dimension mismatch");
    }
    if (params.size() != spec.param_count()) {
        throw std::invalid_argument("forward: parameter count mismatch");
    }
    ensure_workspace(spec, ws);

    if (spec.layer_norm_first) {
        std::copy(x.begin(), x.end(), ws.raw_input.begin());
        const int n = spec.input_dim;
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : x) var += (v - mean) * (v - mean);
        var /= n;
        ws.ln_floored = var <= kLayerNormVarFloor;
        ws.ln_sigma = std::sqrt(std::max(var, kLayerNormVarFloor));
        const double* gain = params.data();
        const double* shift = params.data() + n;
        for (int i = 0; i < n; ++i) {
            ws.ln_xhat[i] = (x[i] - mean) / ws.ln_sigma;
            ws.act[0][i] = gain[i] * ws.ln_xhat[i] + shift[i];
        }
    } else {
        std::copy(x.begin(), x.end(), ws.act[0].begin());
    }

    const std::size_t n_layers = spec.num_linear_layers();
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int fin = spec.layer_fan_in(l);
        const int fout = spec.layer_fan_out(l);
        const double* w = params.data() + spec.layer_offset(l);
        const double* b = w + static_cast<std::size_t>(fout) * fin;
        const double* in = ws.act[l].data();
        double* out = ws.act[l + 1].data();
        const bool last = (l + 1 == n_layers);
        for (int o = 0; o < fout; ++o) {
            double z = b[o] + dot(w + static_cast<std::size_t>(o) * fin, in, fin);
            if (!last) {
                z = spec.activation == Activation::tanh ? std::tanh(z) : std::max(z, 0.0);
            }
            out[o] = z;
        }
    }
}

std::vector<double> forward(const MlpSpec& spec, const ParamVector& params,
                            std::span<const double> x) {
    MlpWorkspace ws;
    forward(spec, params, x, ws);
    return ws.output();
}

void backward(const MlpSpec& spec, const ParamVector& params, MlpWorkspace& ws,
              std::span<const double> upstream, ParamVector* grad_params,
              std::vector<double>* grad_x) {
    const std::size_t n_layers = spec.num_linear_layers();
    if (upstream.size() != static_cast<std::size_t>(spec.output_dim)) {
        throw std::invalid_argument("backward: upstream dimension mismatch");
    }
    if (grad_params && grad_params->size() != spec.param_count()) {
        throw std::invalid_argument("backward: gradient size mismatch");
    }

    std::copy(upstream.begin(), upstream.end(), ws.delta[n_layers].begin());

    for (std::size_t l = n_layers; l-- > 0;) {
        const int fin = spec.layer_fan_in(l);
        const int fout = spec.layer_fan_out(l);
        const double* w = params.data() + spec.layer_offset(l);
        const bool last = (l + 1 == n_layers);
        double* d_out = ws.delta[l + 1].data();
        const double* a_out = ws.act[l + 1].data();

        // Fold the activation derivative into the output delta.
        if (!last) {
            for (int o = 0; o < fout; ++o) {
                if (spec.activation == Activation::tanh) {
                    d_out[o] *= 1.0 - a_out[o] * a_out[o];
                } else {
                    d_out[o] = a_out[o] > 0.0 ? d_out[o] : 0.0;
                }
            }
        }

        if (grad_params) {
            double* gw = grad_params->data() + spec.layer_offset(l);
            double* gb = gw + static_cast<std::size_t>(fout) * fin;
            const double* a_in = ws.act[l].data();
            for (int o = 0; o < fout; ++o) {
                const double d = d_out[o];
                if (d != 0.0) {
                    double* row = gw + static_cast<std::size_t>(o) * fin;
                    for (int i = 0; i < fin; ++i) row[i] += d * a_in[i];
                }
                gb[o] += d;
            }
        }

        double* d_in = ws.delta[l].data();
        std::fill(d_in, d_in + fin, 0.0);
        for (int o = 0; o < fout; ++o) {
            const double d = d_out[o];
            if (d != 0.0) {
                const double* row = w + static_cast<std::size_t>(o) * fin;
                for (int i = 0; i < fin; ++i) d_in[i] += d * row[i];
            }
        }
    }

    if (spec.layer_norm_first) {
        const int n = spec.input_dim;
        const double* gain = params.data();
        const double* u = ws.delta[0].data();  // gradient w.r.t. LN output
        if (grad_params) {
            double* g_gain = grad_params->data();
            double* g_shift = g_gain + n;
            for (int i = 0; i < n; ++i) {
                g_gain[i] += u[i] * ws.ln_xhat[i];
                g_shift[i] += u[i];
            }
        }
        if (grad_x) {
            grad_x->assign(n, 0.0);
            double mean_v = 0.0, mean_vx = 0.0;
            std::vector<double> v(n);
            for (int i = 0; i < n; ++i) {
                v[i] = u[i] * gain[i];
                mean_v += v[i];
                mean_vx += v[i] * ws.ln_xhat[i];
            }
            mean_v /= n;
            mean_vx /= n;
            for (int i = 0; i < n; ++i) {
                double g = v[i] - mean_v;
                if (!ws.ln_floored) g -= ws.ln_xhat[i] * mean_vx;
                (*grad_x)[i] = g / ws.ln_sigma;
            }
        }
    } else if (grad_x) {
        grad_x->assign(ws.delta[0].begin(), ws.delta[0].end());
    }
}

ParamVector grad_params(const MlpSpec& spec, const ParamVector& params,
                        std::span<const double> x, std::span<const double> upstream) {
    MlpWorkspace ws;
    forward(spec, params, x, ws);
    ParamVector g(spec.param_count(), 0.0);
    backward(spec, params, ws, upstream, &g, nullptr);
    return g;
}

std::vector<double> grad_input(const MlpSpec& spec, const ParamVector& params,
                               std::span<const double> x, std::span<const double> upstream) {
    MlpWorkspace ws;
    forward(spec, params, x, ws);
    std::vector<double> gx;
    backward(spec, params, ws, upstream, nullptr, &gx);
    return gx;
}

}  // namespace vlearn
