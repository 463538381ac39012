#include "lfs/generator.hpp"

#include <algorithm>

namespace lfs {

using ag::Var;

namespace {
constexpr double kSlope = 0.2;
}

Generator::Generator(nn::ParamStore& ps, const std::string& prefix, int channels, Rng& rng)
    : channels_(channels) {
    const int c = channels;
    const int c2 = std::max(4, c / 2);
    const int c3 = std::max(4, c / 4);
    const int cin[4] = {c, c, c, c2};
    const int cout[4] = {c, c, c2, c3};
    for (int i = 0; i < 4; ++i) {
        const std::string name = prefix + ".blk" + std::to_string(i);
        Block& blk = blocks_[i];
        blk.affine = nn::Linear(ps, name + ".affine", c, cin[i], rng);
        // Unit-mean style scales at init keep early training near the
        // unmodulated convolution.
        std::fill_n(blk.affine.b->value.data(), blk.affine.b->value.size(), 1.0);
        blk.w = ps.add(name + ".w", nn::kaiming_conv(cout[i], cin[i], 3, rng));
        blk.b = ps.add(name + ".b", Tensor::zeros({cout[i]}));
        blk.upsample = i >= 2;
    }
    to_rgb_ = nn::Conv2d(ps, prefix + ".rgb", c3, 3, 1, 1, rng);
}

Var Generator::run_block(const Block& blk, const Var& x, const Var& style) const {
    Var in = blk.upsample ? ag::upsample2(x) : x;
    Var s = blk.affine(style);
    Var wm = nn::modulate_filters(blk.w, s, /*demodulate=*/true);
    Var y = nn::bias_add(ag::conv2d(in, wm, 1, 1), blk.b);
    return ag::leaky_relu(y, kSlope);
}

Var Generator::operator()(const Var& x, const Var& style) const {
    if (x->value.ndim() != 3 || x->value.dim(0) != channels_)
        throw ShapeMismatch("Generator: content input must be [C,h,w]");
    if (static_cast<int>(style->value.size()) != channels_)
        throw ShapeMismatch("Generator: style vector length must be C");
    Var h = x;
    for (const Block& blk : blocks_) h = run_block(blk, h, style);
    return ag::tanh_(to_rgb_(h));
}

}  // namespace lfs
