#pragma once

#include "lfs/age_code.hpp"
#include "lfs/nn.hpp"

namespace lfs {

// Two-layer perceptron mapping an age code (length 6N) to a latent vector
// of length C, shared by the shape and texture branches.
class AgeEmbedding {
public:
    AgeEmbedding() = default;
    AgeEmbedding(nn::ParamStore& ps, const std::string& prefix, int code_len,
                 int channels, Rng& rng);

    ag::Var operator()(const ag::Var& code) const;
    int code_length() const { return code_len_; }

private:
    int code_len_ = 0;
    nn::Linear l1_, l2_;
};

// Age-conditioned modulated convolution on the shape map (Eq. 5 role).
class ShapeTransform {
public:
    ShapeTransform() = default;
    ShapeTransform(nn::ParamStore& ps, const std::string& prefix, int channels, Rng& rng);

    // f_s [C,h,w], age embedding e [C]. Demodulation is on during training;
    // pass false to recover the plain convolution at initialization.
    ag::Var operator()(const ag::Var& f_s, const ag::Var& e, bool demodulate) const;

    const ag::Var& filters() const { return w_; }
    ag::Var scales(const ag::Var& e) const;  // P_s(e)

private:
    ag::Var w_;       // [C,C,3,3]
    nn::Linear p_s_;  // identity-at-init affine
};

// Age-conditioned channel attention on the texture vector (Eq. 6 role).
class TextureTransform {
public:
    TextureTransform() = default;
    TextureTransform(nn::ParamStore& ps, const std::string& prefix, int channels, Rng& rng);

    ag::Var operator()(const ag::Var& f_t, const ag::Var& e) const;
    ag::Var gates(const ag::Var& e) const;  // P_t(e)

private:
    nn::Linear p_t_;
};

}  // namespace lfs
