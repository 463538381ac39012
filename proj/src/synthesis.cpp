#include "lfs/synthesis.hpp"

#include <unordered_map>

#include "lfs/image_io.hpp"

namespace lfs {

SynthesisMode parse_synthesis_mode(const std::string& token) {
    if (token == "single") return SynthesisMode::single;
    if (token == "lifespan") return SynthesisMode::lifespan;
    if (token == "interpolate") return SynthesisMode::interpolate;
    if (token == "shape-only" || token == "shape_only") return SynthesisMode::shape_only;
    if (token == "texture-swap" || token == "texture_swap") return SynthesisMode::texture_swap;
    if (token == "entangled") return SynthesisMode::entangled;
    throw BadRequest("unknown synthesis mode '" + token + "'");
}

Synthesizer::Synthesizer(const CheckpointBundle& bundle, bool use_ema)
    : model_(bundle.config.model_config(), bundle.config.seed) {
    std::unordered_map<std::string, const Tensor*> by_name;
    for (const auto& [name, t] : bundle.params) by_name[name] = &t;
    if (use_ema)
        for (const auto& [name, t] : bundle.ema_shadow) by_name[name] = &t;
    for (const auto& [name, p] : model_.params().items()) {
        const auto it = by_name.find(name);
        if (it == by_name.end())
            throw IncompatibleCheckpoint("checkpoint lacks parameter '" + name + "'");
        if (!it->second->same_shape(p->value))
            throw IncompatibleCheckpoint("parameter shape mismatch at '" + name + "'");
        std::copy(it->second->data(), it->second->data() + it->second->size(),
                  p->value.data());
    }
}

Tensor Synthesizer::prepared(const Tensor& reference) const {
    if (reference.ndim() != 3 || reference.dim(0) != 3)
        throw ShapeMismatch("reference must be a [3,H,W] image");
    return img::resize_bilinear(reference, model_.config().image_size);
}

Tensor Synthesizer::single(const Tensor& reference, int target_group) const {
    if (model_.config().mode != ModelMode::disentangled)
        throw IncompatibleCheckpoint("disentangled synthesis needs a disentangled checkpoint");
    const AgeCode z = interpolate_age_code(target_group, 0.0, model_.config().code_block);
    return model_.forward(ag::constant(prepared(reference)), z)->value;
}

std::vector<Tensor> Synthesizer::lifespan(const Tensor& reference) const {
    std::vector<Tensor> out;
    out.reserve(kNumAgeGroups);
    for (int g = 0; g < kNumAgeGroups; ++g) out.push_back(single(reference, g));
    return out;
}

std::vector<Tensor> Synthesizer::interpolate_sequence(const Tensor& reference, int group,
                                                      int steps) const {
    if (model_.config().mode != ModelMode::disentangled)
        throw IncompatibleCheckpoint("disentangled synthesis needs a disentangled checkpoint");
    if (group < 0 || group >= kNumAgeGroups - 1)
        throw BadRequest("interpolation group must be in 0..4");
    if (steps < 2) throw BadRequest("interpolation needs at least 2 steps");
    ag::Var image = ag::constant(prepared(reference));
    const ModelState::Features f = model_.features(image);
    std::vector<Tensor> out;
    out.reserve(static_cast<size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double alpha = static_cast<double>(i) / (steps - 1);
        const AgeCode z = interpolate_age_code(group, alpha, model_.config().code_block);
        out.push_back(model_.decode(f, z)->value);
    }
    return out;
}

std::vector<Tensor> Synthesizer::shape_only(const Tensor& reference) const {
    if (model_.config().mode != ModelMode::disentangled)
        throw IncompatibleCheckpoint("disentangled synthesis needs a disentangled checkpoint");
    ag::Var image = ag::constant(prepared(reference));
    const ModelState::Features f = model_.features(image);
    std::vector<Tensor> out;
    out.reserve(kNumAgeGroups);
    for (int g = 0; g < kNumAgeGroups; ++g) {
        const AgeCode z = interpolate_age_code(g, 0.0, model_.config().code_block);
        ag::Var e = model_.age_embedding()(ag::constant(z.values));
        ag::Var fs_t = model_.shape_transform()(f.f_s, e, model_.demodulate());
        out.push_back(model_.generator()(fs_t, f.f_t)->value);
    }
    return out;
}

Tensor Synthesizer::texture_swap(const Tensor& reference, const Tensor& donor,
                                 int target_group) const {
    if (model_.config().mode != ModelMode::disentangled)
        throw IncompatibleCheckpoint("disentangled synthesis needs a disentangled checkpoint");
    const ModelState::Features f_ref = model_.features(ag::constant(prepared(reference)));
    const ModelState::Features f_don = model_.features(ag::constant(prepared(donor)));
    const AgeCode z = interpolate_age_code(target_group, 0.0, model_.config().code_block);
    ag::Var e = model_.age_embedding()(ag::constant(z.values));
    ag::Var fs_t = model_.shape_transform()(f_ref.f_s, e, model_.demodulate());
    ag::Var ft_t = model_.texture_transform()(f_don.f_t, e);
    return model_.generator()(fs_t, ft_t)->value;
}

Tensor Synthesizer::entangled(const Tensor& reference, int target_group) const {
    if (model_.config().mode != ModelMode::entangled)
        throw IncompatibleCheckpoint("entangled synthesis needs an entangled checkpoint");
    const AgeCode z = interpolate_age_code(target_group, 0.0, model_.config().code_block);
    return model_.forward(ag::constant(prepared(reference)), z)->value;
}

std::vector<Tensor> Synthesizer::run(const SynthesisRequest& req) const {
    switch (req.mode) {
        case SynthesisMode::single:
            if (!req.target_group) throw BadRequest("single mode needs a target group");
            return {single(req.reference, *req.target_group)};
        case SynthesisMode::lifespan:
            return lifespan(req.reference);
        case SynthesisMode::interpolate: {
            if (!req.target_group) throw BadRequest("interpolate mode needs a target group");
            const int steps = req.alpha_steps.value_or(9);
            return interpolate_sequence(req.reference, *req.target_group, steps);
        }
        case SynthesisMode::shape_only:
            return shape_only(req.reference);
        case SynthesisMode::texture_swap:
            if (!req.target_group) throw BadRequest("texture-swap mode needs a target group");
            if (!req.donor) throw BadRequest("texture-swap mode needs a donor image");
            return {texture_swap(req.reference, *req.donor, *req.target_group)};
        case SynthesisMode::entangled:
            if (!req.target_group) throw BadRequest("entangled mode needs a target group");
            return {entangled(req.reference, *req.target_group)};
    }
    throw BadRequest("unhandled synthesis mode");
}

}  // namespace lfs
