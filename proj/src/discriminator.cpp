#include "lfs/discriminator.hpp"

#include <algorithm>

namespace lfs {

using ag::Var;

namespace {
constexpr double kSlope = 0.2;

Var pooled(const Var& x) {
    // Downsample while there is spatial extent left; small toy images run
    // out before the fourth block.
    const auto& sh = x->value.shape();
    if (sh[1] >= 2 && sh[1] % 2 == 0 && sh[2] % 2 == 0) return ag::avgpool2(x);
    return x;
}

}  // namespace

Discriminator::Discriminator(nn::ParamStore& ps, const std::string& prefix,
                             int channels, int code_len, Rng& rng)
    : channels_(channels), code_len_(code_len) {
    const int c0 = std::max(4, channels / 4);
    const int c1 = std::max(4, channels / 2);
    c1_ = nn::Conv2d(ps, prefix + ".c1", 3, c0, 3, 1, rng);
    c2_ = nn::Conv2d(ps, prefix + ".c2", c0, c1, 3, 1, rng);
    c3_ = nn::Conv2d(ps, prefix + ".c3", c1, channels, 3, 1, rng);
    c4_ = nn::Conv2d(ps, prefix + ".c4", channels, channels, 3, 1, rng);
    head_b_ = nn::Linear(ps, prefix + ".b", channels, 1, rng);
    head_u_ = nn::Linear(ps, prefix + ".u", code_len, channels, rng);
}

Var Discriminator::features(const Var& image) const {
    const auto& sh = image->value.shape();
    if (sh.size() != 3 || sh[0] != 3)
        throw ShapeMismatch("Discriminator: expected [3,H,W] image");
    Var x = pooled(ag::leaky_relu(c1_(image), kSlope));
    x = pooled(ag::leaky_relu(c2_(x), kSlope));
    x = pooled(ag::leaky_relu(c3_(x), kSlope));
    x = pooled(ag::leaky_relu(c4_(x), kSlope));
    return nn::global_avg_pool(x);
}

Var Discriminator::project(const Var& code) const {
    if (static_cast<int>(code->value.size()) != code_len_)
        throw ShapeMismatch("Discriminator: code length mismatch");
    return head_u_(code);
}

Var Discriminator::operator()(const Var& image, const Var& code) const {
    Var phi = features(image);
    Var logit = ag::add(head_b_(phi), ag::dot(phi, project(code)));
    return logit;
}

}  // namespace lfs
