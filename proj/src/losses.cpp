#include "lfs/losses.hpp"

#include <cmath>
#include <string>

namespace lfs::losses {

using ag::Var;

Var identity(const ModelState& model, const Var& image_ref, const Var& image_gen) {
    const Encoder& enc = model.encoder();
    Var target = ag::detach(enc.identity_head(enc.encode(image_ref)));
    Var current = enc.identity_head(enc.encode(image_gen));
    return ag::mse(target, current);
}

Var cycle(const ModelState& model, const Var& image_ref, const Var& image_gen,
          const AgeCode& z_ref) {
    Var back = model.forward(image_gen, z_ref);
    return ag::mse(image_ref, back);
}

Var reconstruction(const ModelState& model, const Var& image_ref, int ref_group) {
    AgeCode z = interpolate_age_code(ref_group, 0.0, model.config().code_block);
    Var regen = model.forward(image_ref, z);
    return ag::mse(image_ref, regen);
}

Var shape_reg(const ModelState& model, const Var& image_ref_adult,
              const Var& image_gen_older, int ref_group, int target_group) {
    if (ref_group != 4 || target_group != 5)
        throw InvalidGroupPair("shape_reg: only the (4,5) adult-to-older pair is regularized, got (" +
                               std::to_string(ref_group) + "," + std::to_string(target_group) + ")");
    const Encoder& enc = model.encoder();
    Var target = ag::detach(enc.shape_head(enc.encode(image_ref_adult)));
    Var current = enc.shape_head(enc.encode(image_gen_older));
    return ag::mse(target, current);
}

namespace {

Var mean_of(const std::vector<Var>& scalars) {
    Var acc = scalars[0];
    for (size_t i = 1; i < scalars.size(); ++i) acc = ag::add(acc, scalars[i]);
    return ag::smul(acc, 1.0 / static_cast<double>(scalars.size()));
}

}  // namespace

Var adversarial_g(const std::vector<Var>& fake_logits) {
    std::vector<Var> terms;
    terms.reserve(fake_logits.size());
    for (const Var& l : fake_logits) terms.push_back(ag::softplus_(ag::neg(l)));
    return mean_of(terms);
}

Var adversarial_d(const std::vector<Var>& real_logits, const std::vector<Var>& fake_logits) {
    std::vector<Var> real_terms, fake_terms;
    for (const Var& l : real_logits) real_terms.push_back(ag::softplus_(ag::neg(l)));
    for (const Var& l : fake_logits) fake_terms.push_back(ag::softplus_(l));
    return ag::add(mean_of(real_terms), mean_of(fake_terms));
}

Var r1_penalty(const ModelState& model, const std::vector<Var>& real_images,
               const std::vector<AgeCode>& codes, double gamma) {
    std::vector<Var> terms;
    terms.reserve(real_images.size());
    for (size_t i = 0; i < real_images.size(); ++i) {
        // A grad-requiring alias of the image so the sweep below yields
        // d logit / d pixels as a differentiable expression.
        Var pix = ag::param(real_images[i]->value);
        Var logit = model.discriminator()(pix, ag::constant(codes[i].values));
        ag::GradMap grads = ag::backward(logit);
        auto it = grads.find(pix.get());
        if (it == grads.end())
            throw NonFiniteLoss("r1_penalty: image gradient unavailable");
        terms.push_back(ag::sum_all(ag::square(it->second)));
    }
    return ag::smul(mean_of(terms), 0.5 * gamma);
}

LossBreakdown total(double adv, double rec, double cyc, double id, double shape,
                    const LossWeights& w) {
    const double parts[] = {adv, rec, cyc, id, shape};
    const char* names[] = {"adv", "rec", "cyc", "id", "shape"};
    for (int i = 0; i < 5; ++i)
        if (!std::isfinite(parts[i]))
            throw NonFiniteLoss(std::string("total_loss: non-finite component ") + names[i]);
    LossBreakdown b;
    b.adv = adv;
    b.rec = rec;
    b.cyc = cyc;
    b.id = id;
    b.shape = shape;
    b.total = w.adv * adv + w.rec * rec + w.cyc * cyc + w.id * id + w.shape * shape;
    return b;
}

}  // namespace lfs::losses
