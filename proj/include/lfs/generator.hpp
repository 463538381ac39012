#pragma once

#include "lfs/nn.hpp"

namespace lfs {

// Style-based decoder: four synthesis blocks with style-modulated
// convolutions, nearest-neighbor 2x upsampling in the last two blocks, and
// a tanh RGB head. Stochastic noise injection is deliberately absent so
// inference and the reconstruction loss are deterministic.
class Generator {
public:
    Generator() = default;
    Generator(nn::ParamStore& ps, const std::string& prefix, int channels, Rng& rng);

    // x [C,h,w], style [C] -> image [3,4h,4w] in [-1,1].
    ag::Var operator()(const ag::Var& x, const ag::Var& style) const;

    int channels() const { return channels_; }

private:
    struct Block {
        nn::Linear affine;  // style -> per-input-channel scales
        ag::Var w;          // [Cout,Cin,3,3]
        ag::Var b;          // [Cout]
        bool upsample = false;
    };

    ag::Var run_block(const Block& blk, const ag::Var& x, const ag::Var& style) const;

    int channels_ = 0;
    Block blocks_[4];
    nn::Conv2d to_rgb_;
};

}  // namespace lfs
