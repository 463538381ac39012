#include "lfs/nn.hpp"

#include <cmath>

namespace lfs::nn {

using ag::Var;

Var ParamStore::add(const std::string& name, Tensor init) {
    for (const auto& [n, v] : items_)
        if (n == name) throw Error("ParamStore: duplicate parameter name " + name);
    Var v = ag::param(std::move(init));
    items_.emplace_back(name, v);
    return v;
}

Var ParamStore::find(const std::string& name) const {
    for (const auto& [n, v] : items_)
        if (n == name) return v;
    throw Error("ParamStore: unknown parameter " + name);
}

Tensor randn(std::vector<int> shape, double stddev, Rng& rng) {
    Tensor t(std::move(shape));
    std::normal_distribution<double> dist(0.0, stddev);
    for (int64_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

Tensor kaiming_conv(int co, int ci, int k, Rng& rng) {
    return randn({co, ci, k, k}, std::sqrt(2.0 / (static_cast<double>(ci) * k * k)), rng);
}

Tensor kaiming_linear(int out, int in, Rng& rng) {
    return randn({out, in}, std::sqrt(2.0 / static_cast<double>(in)), rng);
}

Conv2d::Conv2d(ParamStore& ps, const std::string& name, int ci, int co, int k,
               int stride_, Rng& rng, bool bias)
    : stride(stride_), pad(k / 2), has_bias(bias) {
    w = ps.add(name + ".w", kaiming_conv(co, ci, k, rng));
    if (has_bias) b = ps.add(name + ".b", Tensor::zeros({co}));
}

Var Conv2d::operator()(const Var& x) const {
    Var y = ag::conv2d(x, w, stride, pad);
    return has_bias ? bias_add(y, b) : y;
}

Linear::Linear(ParamStore& ps, const std::string& name, int in, int out, Rng& rng) {
    w = ps.add(name + ".w", kaiming_linear(out, in, rng));
    b = ps.add(name + ".b", Tensor::zeros({out}));
}

Linear Linear::ones_init(ParamStore& ps, const std::string& name, int in, int out) {
    Linear l;
    l.w = ps.add(name + ".w", Tensor::zeros({out, in}));
    l.b = ps.add(name + ".b", Tensor::ones({out}));
    return l;
}

Var Linear::operator()(const Var& x) const {
    return ag::add(ag::matvec(w, x), b);
}

InstanceNorm::InstanceNorm(ParamStore& ps, const std::string& name, int c) {
    gamma = ps.add(name + ".gamma", Tensor::ones({c}));
    beta = ps.add(name + ".beta", Tensor::zeros({c}));
}

Var InstanceNorm::operator()(const Var& x) const {
    return ag::row_affine(ag::row_standardize(x, 1e-8), gamma, beta);
}

Var bias_add(const Var& x, const Var& b) {
    return ag::row_affine(x, Var{}, b);
}

Var global_avg_pool(const Var& x) {
    const auto& sh = x->value.shape();
    return ag::smul(ag::row_sum(x, sh[0], sh[1] * sh[2]), 1.0 / (sh[1] * sh[2]));
}

Var channel_scale(const Var& x, const Var& s) {
    return ag::row_affine(x, s, ag::Var{});
}

Var modulate_filters(const Var& w, const Var& s, bool demodulate) {
    const auto& sh = w->value.shape();
    const int co = sh[0], ci = sh[1], kk = sh[2] * sh[3];
    if (static_cast<int>(s->value.size()) != ci)
        throw ShapeMismatch("modulate_filters: scale length must equal filter input channels");
    Var wm = ag::mul(ag::reshape(w, {co, ci, kk}), ag::mid_broadcast(s, co, kk));
    if (demodulate) {
        Var norm2 = ag::row_sum(ag::square(wm), co, ci * kk);
        Var inv = ag::pow_(ag::sadd(norm2, 1e-8), -0.5);
        wm = ag::mul(wm, ag::reshape(ag::row_broadcast(inv, ci * kk), {co, ci, kk}));
    }
    return ag::reshape(wm, sh);
}

}  // namespace lfs::nn
