#pragma once

#include <cstdint>

#include "lfs/age_code.hpp"
#include "lfs/discriminator.hpp"
#include "lfs/encoder.hpp"
#include "lfs/generator.hpp"
#include "lfs/transforms.hpp"

namespace lfs {

enum class ModelMode { disentangled, entangled };

struct ModelConfig {
    int code_block = kDefaultCodeBlock;  // N
    int channels = 256;                  // C
    int image_size = 256;
    ModelMode mode = ModelMode::disentangled;

    int code_len() const { return kNumAgeGroups * code_block; }
};

// All learnable state plus the forward composition F(I_r, z_t).
class ModelState {
public:
    ModelState(ModelConfig cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }

    const Encoder& encoder() const { return encoder_; }
    const AgeEmbedding& age_embedding() const { return embed_; }
    const ShapeTransform& shape_transform() const { return shape_tf_; }
    const TextureTransform& texture_transform() const { return texture_tf_; }
    const Generator& generator() const { return generator_; }
    const Discriminator& discriminator() const { return disc_; }

    struct Features {
        ag::Var f_s;   // [C, H/4, W/4]
        ag::Var f_t;   // [C]
        ag::Var f_id;  // [2C, H/8, W/8]
    };

    Features features(const ag::Var& image) const;

    // Disentangled path G(S_t(f_s,z), T_t(f_t,z)).
    ag::Var decode(const Features& f, const AgeCode& z) const;

    // Mode-aware full forward F(I, z).
    ag::Var forward(const ag::Var& image, const AgeCode& z) const;

    // Parameters split by training role. EMA and the generator-side
    // optimizer cover everything except the discriminator.
    std::vector<std::pair<std::string, ag::Var>> generator_side_params() const;
    std::vector<std::pair<std::string, ag::Var>> discriminator_params() const;

    bool demodulate() const { return demodulate_; }

private:
    ModelConfig cfg_;
    nn::ParamStore params_;
    Encoder encoder_;
    AgeEmbedding embed_;
    ShapeTransform shape_tf_;
    TextureTransform texture_tf_;
    Generator generator_;
    Discriminator disc_;
    bool demodulate_ = true;
};

}  // namespace lfs
