#include "lfs/transforms.hpp"

namespace lfs {

using ag::Var;

AgeEmbedding::AgeEmbedding(nn::ParamStore& ps, const std::string& prefix,
                           int code_len, int channels, Rng& rng)
    : code_len_(code_len),
      l1_(ps, prefix + ".l1", code_len, channels, rng),
      l2_(ps, prefix + ".l2", channels, channels, rng) {}

Var AgeEmbedding::operator()(const Var& code) const {
    if (static_cast<int>(code->value.size()) != code_len_)
        throw ShapeMismatch("AgeEmbedding: code length mismatch");
    return l2_(ag::leaky_relu(l1_(code), 0.2));
}

ShapeTransform::ShapeTransform(nn::ParamStore& ps, const std::string& prefix,
                               int channels, Rng& rng) {
    w_ = ps.add(prefix + ".w", nn::kaiming_conv(channels, channels, 3, rng));
    p_s_ = nn::Linear::ones_init(ps, prefix + ".ps", channels, channels);
}

Var ShapeTransform::scales(const Var& e) const { return p_s_(e); }

Var ShapeTransform::operator()(const Var& f_s, const Var& e, bool demodulate) const {
    if (f_s->value.ndim() != 3 || f_s->value.dim(0) != w_->value.dim(1))
        throw ShapeMismatch("ShapeTransform: feature channel count mismatch");
    Var wm = nn::modulate_filters(w_, scales(e), demodulate);
    return ag::conv2d(f_s, wm, 1, 1);
}

TextureTransform::TextureTransform(nn::ParamStore& ps, const std::string& prefix,
                                   int channels, Rng& rng) {
    (void)rng;
    p_t_ = nn::Linear::ones_init(ps, prefix + ".pt", channels, channels);
}

Var TextureTransform::gates(const Var& e) const { return p_t_(e); }

Var TextureTransform::operator()(const Var& f_t, const Var& e) const {
    if (f_t->value.size() != p_t_.b->value.size())
        throw ShapeMismatch("TextureTransform: texture vector length mismatch");
    return ag::mul(f_t, gates(e));
}

}  // namespace lfs
