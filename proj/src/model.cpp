#include "lfs/model.hpp"

namespace lfs {

using ag::Var;

ModelState::ModelState(ModelConfig cfg, std::uint64_t seed) : cfg_(cfg) {
    Rng rng(seed);
    encoder_ = Encoder(params_, "enc", cfg_.channels, rng);
    embed_ = AgeEmbedding(params_, "age", cfg_.code_len(), cfg_.channels, rng);
    shape_tf_ = ShapeTransform(params_, "stf", cfg_.channels, rng);
    texture_tf_ = TextureTransform(params_, "ttf", cfg_.channels, rng);
    generator_ = Generator(params_, "gen", cfg_.channels, rng);
    disc_ = Discriminator(params_, "disc", cfg_.channels, cfg_.code_len(), rng);
}

ModelState::Features ModelState::features(const Var& image) const {
    Encoder::Taps taps = encoder_.encode(image);
    return {encoder_.shape_head(taps), encoder_.texture_head(taps),
            encoder_.identity_head(taps)};
}

Var ModelState::decode(const Features& f, const AgeCode& z) const {
    Var code = ag::constant(z.values);
    Var e = embed_(code);
    Var fs_t = shape_tf_(f.f_s, e, demodulate_);
    Var ft_t = texture_tf_(f.f_t, e);
    return generator_(fs_t, ft_t);
}

Var ModelState::forward(const Var& image, const AgeCode& z) const {
    if (cfg_.mode == ModelMode::entangled) {
        Encoder::Taps taps = encoder_.encode(image);
        Var f_en = encoder_.entangled_head(taps);
        Var e = embed_(ag::constant(z.values));
        return generator_(f_en, e);
    }
    return decode(features(image), z);
}

namespace {

bool is_disc(const std::string& name) { return name.rfind("disc.", 0) == 0; }

}  // namespace

std::vector<std::pair<std::string, Var>> ModelState::generator_side_params() const {
    std::vector<std::pair<std::string, Var>> out;
    for (const auto& item : params_.items())
        if (!is_disc(item.first)) out.push_back(item);
    return out;
}

std::vector<std::pair<std::string, Var>> ModelState::discriminator_params() const {
    std::vector<std::pair<std::string, Var>> out;
    for (const auto& item : params_.items())
        if (is_disc(item.first)) out.push_back(item);
    return out;
}

}  // namespace lfs
