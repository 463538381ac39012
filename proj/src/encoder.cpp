#include "lfs/encoder.hpp"

#include <algorithm>

namespace lfs {

using ag::Var;

namespace {
constexpr double kSlope = 0.2;
}

Encoder::Encoder(nn::ParamStore& ps, const std::string& prefix, int channels, Rng& rng)
    : channels_(channels) {
    const int c0 = std::max(4, channels / 2);
    const int c = channels;
    b1c1_ = nn::Conv2d(ps, prefix + ".b1c1", 3, c0, 3, 1, rng);
    b1n1_ = nn::InstanceNorm(ps, prefix + ".b1n1", c0);
    b1c2_ = nn::Conv2d(ps, prefix + ".b1c2", c0, c0, 3, 1, rng);
    b1n2_ = nn::InstanceNorm(ps, prefix + ".b1n2", c0);
    b2c1_ = nn::Conv2d(ps, prefix + ".b2c1", c0, c, 3, 1, rng);
    b2n1_ = nn::InstanceNorm(ps, prefix + ".b2n1", c);
    b2c2_ = nn::Conv2d(ps, prefix + ".b2c2", c, c, 3, 1, rng);
    b2n2_ = nn::InstanceNorm(ps, prefix + ".b2n2", c);
    b3c1_ = nn::Conv2d(ps, prefix + ".b3c1", c, c, 3, 1, rng);
    b3n1_ = nn::InstanceNorm(ps, prefix + ".b3n1", c);
    b3c2_ = nn::Conv2d(ps, prefix + ".b3c2", c, c, 3, 1, rng);
    b3n2_ = nn::InstanceNorm(ps, prefix + ".b3n2", c);
    b4c1_ = nn::Conv2d(ps, prefix + ".b4c1", c, c, 3, 1, rng);
    b4n1_ = nn::InstanceNorm(ps, prefix + ".b4n1", c);
    b4c2_ = nn::Conv2d(ps, prefix + ".b4c2", c, c, 3, 1, rng);
    b4n2_ = nn::InstanceNorm(ps, prefix + ".b4n2", c);
    rs1_ = nn::Conv2d(ps, prefix + ".rs1", c, c, 3, 1, rng);
    rs2_ = nn::Conv2d(ps, prefix + ".rs2", c, c, 3, 1, rng);
    t1_ = nn::Conv2d(ps, prefix + ".t1", c, c, 3, 1, rng);
    t2_ = nn::Conv2d(ps, prefix + ".t2", c, c, 3, 1, rng);
    id1_ = nn::Conv2d(ps, prefix + ".id1", c, 2 * c, 3, 2, rng);
    id2_ = nn::Conv2d(ps, prefix + ".id2", 2 * c, 2 * c, 3, 1, rng);
    en1_ = nn::Conv2d(ps, prefix + ".en1", c, c, 3, 1, rng);
    en2_ = nn::Conv2d(ps, prefix + ".en2", c, c, 3, 1, rng);
}

Encoder::Taps Encoder::encode(const Var& image) const {
    const auto& sh = image->value.shape();
    if (sh.size() != 3 || sh[0] != 3)
        throw ShapeMismatch("Encoder::encode: expected [3,H,W] image");
    if (sh[1] != sh[2] || sh[1] % 8 != 0)
        throw ShapeMismatch("Encoder::encode: image must be square with side divisible by 8");
    Var x = ag::leaky_relu(b1n1_(b1c1_(image)), kSlope);
    x = ag::leaky_relu(b1n2_(b1c2_(x)), kSlope);
    x = ag::avgpool2(x);
    x = ag::leaky_relu(b2n1_(b2c1_(x)), kSlope);
    x = ag::leaky_relu(b2n2_(b2c2_(x)), kSlope);
    Var mid = ag::avgpool2(x);
    x = ag::leaky_relu(b3n1_(b3c1_(mid)), kSlope);
    x = ag::leaky_relu(b3n2_(b3c2_(x)), kSlope);
    x = ag::leaky_relu(b4n1_(b4c1_(x)), kSlope);
    Var deep = ag::leaky_relu(b4n2_(b4c2_(x)), kSlope);
    return {mid, deep};
}

Var Encoder::shape_head(const Taps& taps) const {
    Var res = rs2_(ag::leaky_relu(rs1_(taps.mid), kSlope));
    return ag::add(taps.mid, res);
}

Var Encoder::texture_head(const Taps& taps) const {
    Var x = t2_(ag::leaky_relu(t1_(taps.deep), kSlope));
    return nn::global_avg_pool(x);
}

Var Encoder::identity_head(const Taps& taps) const {
    return id2_(ag::leaky_relu(id1_(taps.deep), kSlope));
}

Var Encoder::entangled_head(const Taps& taps) const {
    return en2_(ag::leaky_relu(en1_(taps.deep), kSlope));
}

}  // namespace lfs
