#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lfs/autograd.hpp"
#include "lfs/common.hpp"

namespace lfs::nn {

// Flat registry of named learnable tensors. Registration order is the
// canonical parameter order used by the optimizer, EMA and checkpoints.
class ParamStore {
public:
    ag::Var add(const std::string& name, Tensor init);
    const std::vector<std::pair<std::string, ag::Var>>& items() const { return items_; }
    ag::Var find(const std::string& name) const;

private:
    std::vector<std::pair<std::string, ag::Var>> items_;
};

Tensor randn(std::vector<int> shape, double stddev, Rng& rng);
Tensor kaiming_conv(int co, int ci, int k, Rng& rng);
Tensor kaiming_linear(int out, int in, Rng& rng);

struct Conv2d {
    ag::Var w, b;
    int stride = 1, pad = 1;
    bool has_bias = true;

    Conv2d() = default;
    Conv2d(ParamStore& ps, const std::string& name, int ci, int co, int k,
           int stride_, Rng& rng, bool bias = true);
    ag::Var operator()(const ag::Var& x) const;
};

struct Linear {
    ag::Var w, b;

    Linear() = default;
    Linear(ParamStore& ps, const std::string& name, int in, int out, Rng& rng);
    // Affine map whose output is all-ones for any input (zero weight, unit
    // bias); the identity-at-initialization contract of the transforms.
    static Linear ones_init(ParamStore& ps, const std::string& name, int in, int out);
    ag::Var operator()(const ag::Var& x) const;
};

struct InstanceNorm {
    ag::Var gamma, beta;

    InstanceNorm() = default;
    InstanceNorm(ParamStore& ps, const std::string& name, int c);
    ag::Var operator()(const ag::Var& x) const;
};

// [C] bias over a [C,H,W] map.
ag::Var bias_add(const ag::Var& x, const ag::Var& b);
// [C,H,W] -> [C]
ag::Var global_avg_pool(const ag::Var& x);
// Scale channel c of x by s[c].
ag::Var channel_scale(const ag::Var& x, const ag::Var& s);

// Per-input-channel filter modulation with optional output-filter L2
// demodulation (epsilon 1e-8). w is [Co,Ci,K,K], s is [Ci].
ag::Var modulate_filters(const ag::Var& w, const ag::Var& s, bool demodulate);

}  // namespace lfs::nn
