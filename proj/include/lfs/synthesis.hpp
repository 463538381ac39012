#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lfs/trainer.hpp"

namespace lfs {

enum class SynthesisMode { single, lifespan, interpolate, shape_only, texture_swap, entangled };

SynthesisMode parse_synthesis_mode(const std::string& token);

struct SynthesisRequest {
    Tensor reference;  // [3,H,W] in [-1,1]
    SynthesisMode mode = SynthesisMode::single;
    std::optional<int> target_group;
    std::optional<int> alpha_steps;
    std::optional<Tensor> donor;  // texture_swap only
    bool use_ema = true;
};

// Read-only inference surface over a loaded checkpoint. All age codes are
// zero-noise, so every call is deterministic.
class Synthesizer {
public:
    explicit Synthesizer(const CheckpointBundle& bundle, bool use_ema = true);

    const ModelState& model() const { return model_; }
    const ModelConfig& config() const { return model_.config(); }

    Tensor single(const Tensor& reference, int target_group) const;
    std::vector<Tensor> lifespan(const Tensor& reference) const;
    // alpha = 0, 1/(k-1), ..., 1 between groups `group` and `group + 1`.
    std::vector<Tensor> interpolate_sequence(const Tensor& reference, int group,
                                             int steps) const;
    // Texture vector bypasses its transform; one image per group.
    std::vector<Tensor> shape_only(const Tensor& reference) const;
    Tensor texture_swap(const Tensor& reference, const Tensor& donor,
                        int target_group) const;
    Tensor entangled(const Tensor& reference, int target_group) const;

    // Dispatch on the request's mode; multi-image modes return their frames.
    std::vector<Tensor> run(const SynthesisRequest& req) const;

private:
    Tensor prepared(const Tensor& reference) const;

    ModelState model_;
};

}  // namespace lfs
