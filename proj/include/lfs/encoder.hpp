#pragma once

#include "lfs/nn.hpp"

namespace lfs {

// Shared convolutional body with a middle tap (after the second pooled
// block) and a deep tap (after the final block), plus the shape / texture /
// identity heads and the entangled-baseline head.
class Encoder {
public:
    Encoder() = default;
    Encoder(nn::ParamStore& ps, const std::string& prefix, int channels, Rng& rng);

    struct Taps {
        ag::Var mid;   // [C, H/4, W/4]
        ag::Var deep;  // [C, H/4, W/4]
    };

    Taps encode(const ag::Var& image) const;

    ag::Var shape_head(const Taps& taps) const;      // f_s [C, H/4, W/4]
    ag::Var texture_head(const Taps& taps) const;    // f_t [C]
    ag::Var identity_head(const Taps& taps) const;   // f_id [2C, H/8, W/8]
    ag::Var entangled_head(const Taps& taps) const;  // f_en [C, H/4, W/4]

    int channels() const { return channels_; }

private:
    int channels_ = 0;
    nn::Conv2d b1c1_, b1c2_, b2c1_, b2c2_, b3c1_, b3c2_, b4c1_, b4c2_;
    nn::InstanceNorm b1n1_, b1n2_, b2n1_, b2n2_, b3n1_, b3n2_, b4n1_, b4n2_;
    nn::Conv2d rs1_, rs2_;  // residual shape head
    nn::Conv2d t1_, t2_;    // texture projection
    nn::Conv2d id1_, id2_;  // identity projection, first conv stride 2
    nn::Conv2d en1_, en2_;  // entangled baseline projection
};

}  // namespace lfs
