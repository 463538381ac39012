#pragma once

#include "lfs/nn.hpp"

namespace lfs {

// Age-conditional projection discriminator:
//   d(I,z) = b(phi(I)) + phi(I) . u(z)
// with a four-block downsampling trunk and global average pooling.
class Discriminator {
public:
    Discriminator() = default;
    Discriminator(nn::ParamStore& ps, const std::string& prefix, int channels,
                  int code_len, Rng& rng);

    // image [3,H,W], code [6N] -> scalar logit.
    ag::Var operator()(const ag::Var& image, const ag::Var& code) const;

    ag::Var features(const ag::Var& image) const;  // phi(I), length C
    ag::Var project(const ag::Var& code) const;    // u(z), length C

private:
    int channels_ = 0;
    int code_len_ = 0;
    nn::Conv2d c1_, c2_, c3_, c4_;
    nn::Linear head_b_;  // C -> 1
    nn::Linear head_u_;  // 6N -> C
};

}  // namespace lfs
