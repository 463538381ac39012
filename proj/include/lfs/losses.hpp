#pragma once

#include "lfs/model.hpp"

namespace lfs {

struct LossWeights {
    double adv = 1.0;
    double rec = 10.0;
    double cyc = 10.0;
    double id = 1.0;
    double shape = 10.0;
};

struct LossBreakdown {
    double adv = 0.0;
    double rec = 0.0;
    double cyc = 0.0;
    double id = 0.0;
    double shape = 0.0;
    double total = 0.0;
};

namespace losses {

// MSE between identity features of reference and generated image; the
// reference branch is a constant target.
ag::Var identity(const ModelState& model, const ag::Var& image_ref,
                 const ag::Var& image_gen);

// MSE between I_r and F(I_t, z_r); gradients flow through both passes.
ag::Var cycle(const ModelState& model, const ag::Var& image_ref,
              const ag::Var& image_gen, const AgeCode& z_ref);

// MSE between I_r and the same-age regeneration with a zero-noise code.
ag::Var reconstruction(const ModelState& model, const ag::Var& image_ref,
                       int ref_group);

// MSE between shape features of an adult reference (group 4) and its
// generated older counterpart (group 5); reference branch is constant.
ag::Var shape_reg(const ModelState& model, const ag::Var& image_ref_adult,
                  const ag::Var& image_gen_older, int ref_group, int target_group);

// Non-saturating logistic forms.
ag::Var adversarial_g(const std::vector<ag::Var>& fake_logits);
ag::Var adversarial_d(const std::vector<ag::Var>& real_logits,
                      const std::vector<ag::Var>& fake_logits);

// (gamma/2) * mean over samples of ||d logit / d image||^2, built with a
// differentiable backward pass so it trains the discriminator.
ag::Var r1_penalty(const ModelState& model, const std::vector<ag::Var>& real_images,
                   const std::vector<AgeCode>& codes, double gamma);

LossBreakdown total(double adv, double rec, double cyc, double id, double shape,
                    const LossWeights& w);

}  // namespace losses

}  // namespace lfs
