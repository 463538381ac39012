// Acceptance gate: one pass/fail line per criterion. Exit code is the number
// of failed criteria. Tolerances are pinned next to each check.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "lfs/evaluation.hpp"

using namespace lfs;

namespace {

struct Checker {
    bool ok = true;
    void expect(bool cond, const std::string& detail) {
        if (!cond) {
            ok = false;
            std::printf("       detail: %s\n", detail.c_str());
        }
    }
};

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (int64_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    double worst = 0.0;
    for (int64_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// --- criterion 1: age-code suite -------------------------------------------

bool c1_age_codes(Checker& c) {
    Rng rng(1);
    AgeCode zero = make_age_code(0, 0.0, rng);
    c.expect(zero.length() == 300, "default code length is not 6*50");
    for (int g = 0; g < kNumAgeGroups; ++g) {
        AgeCode code = make_age_code(g, 0.0, rng);
        bool placed = true;
        for (int i = 0; i < code.length(); ++i) {
            const double want = (i >= g * 50 && i < (g + 1) * 50) ? 1.0 : 0.0;
            if (code.values[i] != want) placed = false;
        }
        c.expect(placed, "zero-noise block placement wrong for group " + std::to_string(g));
    }
    for (int g = 0; g + 1 < kNumAgeGroups; ++g) {
        Tensor lo = make_age_code(g, 0.0, rng).values;
        Tensor hi = make_age_code(g + 1, 0.0, rng).values;
        for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            AgeCode mix = interpolate_age_code(g, alpha);
            Tensor want = Tensor::uninit(lo.shape());
            for (int64_t i = 0; i < want.size(); ++i)
                want[i] = alpha == 0.0 ? lo[i] : (1.0 - alpha) * lo[i] + alpha * hi[i];
            c.expect(bitwise_equal(mix.values, want),
                     "interpolation not affine at group " + std::to_string(g) +
                         " alpha " + fmt(alpha));
        }
        c.expect(bitwise_equal(interpolate_age_code(g, 0.0).values, lo) &&
                     bitwise_equal(interpolate_age_code(g, 1.0).values, hi),
                 "interpolation endpoints not exact at group " + std::to_string(g));
    }
    return c.ok;
}

// --- criterion 2: shape contracts ------------------------------------------

bool c2_shape_contract(Checker& c) {
    const auto t0 = std::chrono::steady_clock::now();
    AgeCode z = interpolate_age_code(2, 0.0);
    for (int ch : {32, 256}) {
        ModelConfig cfg;
        cfg.channels = ch;
        cfg.image_size = 256;
        ModelState m(cfg, 1);
        for (int h : {64, 128, 256}) {
            Tensor img = Tensor::full({3, h, h}, 0.1);
            ModelState::Features f = m.features(ag::constant(img));
            const std::string tag = "C=" + std::to_string(ch) + " H=" + std::to_string(h);
            c.expect(f.f_s->value.shape() == std::vector<int>{ch, h / 4, h / 4},
                     "shape feature is not [C,H/4,H/4] at " + tag);
            c.expect(f.f_t->value.shape() == std::vector<int>{ch},
                     "texture feature is not [C] at " + tag);
            c.expect(f.f_id->value.shape() == std::vector<int>{2 * ch, h / 8, h / 8},
                     "identity feature is not [2C,H/8,H/8] at " + tag);
            ag::Var out = m.decode(f, z);
            c.expect(out->value.shape() == std::vector<int>{3, h, h},
                     "decoded image is not [3,H,H] at " + tag);
            c.expect(out->value.dim(1) == 4 * f.f_s->value.dim(1),
                     "generator upsampling factor is not 4x at " + tag);
        }
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(elapsed < 10.0, "suite took " + fmt(elapsed) + "s, budget 10s");
    return c.ok;
}

// --- criterion 3: identity at initialization --------------------------------

bool c3_identity_at_init(Checker& c) {
    ModelConfig cfg;
    cfg.channels = 256;
    cfg.image_size = 64;
    ModelState m(cfg, 3);
    Rng rng(3);

    // texture gate is exactly all-ones at init, so the transform is exact
    Tensor ft = test::random_tensor({256}, rng, 0.5);
    for (int g : {0, 5}) {
        ag::Var e = m.age_embedding()(ag::constant(interpolate_age_code(g, 0.0).values));
        ag::Var out = m.texture_transform()(ag::constant(ft), e);
        c.expect(bitwise_equal(out->value, ft),
                 "texture transform is not exact identity at init, group " + std::to_string(g));
    }

    // shape transform equals the unconditioned (unit-scale) convolution
    Tensor fs = test::random_tensor({256, 16, 16}, rng, 0.5);
    ag::Var plain = ag::conv2d(
        ag::constant(fs),
        nn::modulate_filters(m.shape_transform().filters(),
                             ag::constant(Tensor::ones({256})), m.demodulate()),
        1, 1);
    for (int g : {0, 5}) {
        ag::Var e = m.age_embedding()(ag::constant(interpolate_age_code(g, 0.0).values));
        ag::Var out = m.shape_transform()(ag::constant(fs), e, m.demodulate());
        const double d = max_abs_diff(out->value, plain->value);
        c.expect(d < 1e-6, "shape transform deviates from unconditioned conv by " + fmt(d));
    }

    // consequently the full forward ignores the target group at init
    Tensor img = test::random_tensor({3, 64, 64}, rng, 0.4);
    Tensor base = m.forward(ag::constant(img), interpolate_age_code(0, 0.0))->value;
    for (int g = 1; g < kNumAgeGroups; ++g) {
        Tensor out = m.forward(ag::constant(img), interpolate_age_code(g, 0.0))->value;
        const double d = max_abs_diff(out, base);
        c.expect(d < 1e-5,
                 "output depends on target group at init: group " + std::to_string(g) +
                     " differs by " + fmt(d));
    }
    return c.ok;
}

// --- criterion 4: gradient suite -------------------------------------------

bool c4_gradients(Checker& c) {
    constexpr double kTol = 1e-4;
    auto run = [&](const char* name, const std::function<ag::Var()>& build,
                   const ag::Var& leaf, double h = 1e-5) {
        const double err = test::gradcheck(build, leaf, h);
        c.expect(err < kTol, std::string(name) + ": relative gradient error " + fmt(err));
    };
    Rng rng(4);

    {
        ag::Var w = ag::param(test::random_tensor({3, 2, 3, 3}, rng, 0.5));
        ag::Var s = ag::param(test::random_tensor({2}, rng, 0.3));
        for (int64_t i = 0; i < s->value.size(); ++i) s->value[i] += 1.0;
        auto build = [&] { return ag::mean_all(ag::square(nn::modulate_filters(w, s, true))); };
        run("modulate_filters/w", build, w);
        run("modulate_filters/s", build, s);
    }
    {
        nn::ParamStore ps;
        ShapeTransform st(ps, "st", 4, rng);
        for (const auto& item : ps.items())  // move off the identity init
            for (int64_t i = 0; i < item.second->value.size(); ++i)
                item.second->value[i] += 0.1 * std::sin(0.7 * static_cast<double>(i + 1));
        ag::Var fs = ag::param(test::random_tensor({4, 4, 4}, rng, 0.5));
        ag::Var e = ag::param(test::random_tensor({4}, rng, 0.5));
        auto build = [&] { return ag::mean_all(ag::square(st(fs, e, true))); };
        run("shape_transform/f_s", build, fs);
        run("shape_transform/e", build, e);
    }
    {
        nn::ParamStore ps;
        TextureTransform tt(ps, "tt", 4, rng);
        for (const auto& item : ps.items())
            for (int64_t i = 0; i < item.second->value.size(); ++i)
                item.second->value[i] += 0.1 * std::cos(0.9 * static_cast<double>(i + 1));
        ag::Var ft = ag::param(test::random_tensor({4}, rng, 0.5));
        ag::Var e = ag::param(test::random_tensor({4}, rng, 0.5));
        auto build = [&] { return ag::mean_all(ag::square(tt(ft, e))); };
        run("texture_transform/f_t", build, ft);
        run("texture_transform/e", build, e);
    }
    {
        nn::ParamStore ps;
        AgeEmbedding emb(ps, "emb", 12, 4, rng);
        ag::Var code = ag::param(test::random_tensor({12}, rng, 0.5));
        run("embed_age/code", [&] { return ag::mean_all(ag::square(emb(code))); }, code);
    }
    {
        nn::ParamStore ps;
        Discriminator disc(ps, "d", 4, 12, rng);
        ag::Var img = ag::param(test::random_tensor({3, 8, 8}, rng, 0.5));
        ag::Var code = ag::constant(make_age_code(1, 0.2, rng, 2).values);
        run("discriminate/image", [&] { return disc(img, code); }, img);
    }

    ModelConfig cfg;
    cfg.channels = 4;
    cfg.image_size = 8;
    cfg.code_block = 2;
    ModelState m(cfg, 4);
    ag::Var ref = ag::constant(test::random_tensor({3, 8, 8}, rng, 0.4));
    ag::Var gen = ag::param(test::random_tensor({3, 8, 8}, rng, 0.4));
    AgeCode z1 = make_age_code(1, 0.0, rng, 2);
    run("loss_identity/gen", [&] { return losses::identity(m, ref, gen); }, gen);
    run("loss_cycle/gen", [&] { return losses::cycle(m, ref, gen, z1); }, gen);
    run("loss_reconstruction/ref",
        [&] { return losses::reconstruction(m, gen, 1); }, gen);
    run("loss_shape_reg/gen", [&] { return losses::shape_reg(m, ref, gen, 4, 5); }, gen);
    {
        ag::Var l1 = ag::param(Tensor::from({1}, {0.3}));
        ag::Var l2 = ag::param(Tensor::from({1}, {-0.4}));
        run("loss_adversarial_g", [&] { return losses::adversarial_g({l1, l2}); }, l1);
        run("loss_adversarial_d/real",
            [&] { return losses::adversarial_d({l1}, {l2}); }, l1);
        run("loss_adversarial_d/fake",
            [&] { return losses::adversarial_d({l1}, {l2}); }, l2);
    }
    {
        ag::Var leaf = m.params().find("disc.b.w");
        std::vector<ag::Var> imgs = {ref};
        std::vector<AgeCode> codes = {z1};
        run("loss_r1_penalty/disc",
            [&] { return losses::r1_penalty(m, imgs, codes, 10.0); }, leaf, 1e-4);
    }
    return c.ok;
}

// --- criterion 5: loss trivial zeros ----------------------------------------

bool c5_loss_zeros(Checker& c) {
    ModelConfig cfg;
    cfg.channels = 4;
    cfg.image_size = 8;
    cfg.code_block = 2;
    ModelState m(cfg, 5);
    Rng rng(5);
    ag::Var img = ag::constant(test::random_tensor({3, 8, 8}, rng, 0.4));

    c.expect(ag::scalar_of(losses::identity(m, img, img)) == 0.0,
             "identity loss of an image against itself is not exactly zero");
    c.expect(ag::scalar_of(losses::shape_reg(m, img, img, 4, 5)) == 0.0,
             "shape regularization of an image against itself is not exactly zero");
    ag::Var regen = m.forward(img, interpolate_age_code(2, 0.0, cfg.code_block));
    c.expect(ag::scalar_of(ag::mse(regen, regen)) == 0.0,
             "reconstruction form on identical images is not exactly zero");

    constexpr double kTol = 1e-12;
    LossWeights sel{0.0, 10.0, 0.0, 0.0, 0.0};
    c.expect(std::abs(losses::total(0.9, 0.042, 0.7, 0.6, 0.5, sel).total - 0.42) < kTol,
             "selector: only the weighted term should contribute");
    LossWeights unit{1.0, 1.0, 1.0, 1.0, 1.0};
    c.expect(std::abs(losses::total(1.0, 1.0, 1.0, 1.0, 1.0, unit).total - 5.0) < kTol,
             "unit-weight arithmetic is off");
    LossWeights std_w;
    c.expect(std::abs(losses::total(0.3, 0.25, 0.3, 0.5, 0.15, std_w).total - 7.8) < kTol,
             "default-weight arithmetic is off");
    bool threw = false;
    try {
        losses::total(std::nan(""), 0, 0, 0, 0, std_w);
    } catch (const NonFiniteLoss&) {
        threw = true;
    }
    c.expect(threw, "non-finite component did not throw");
    return c.ok;
}

// --- criterion 6: EMA closed form -------------------------------------------

bool c6_ema(Checker& c) {
    const double live_v = 3.5, shadow0 = -1.25, decay = 0.999;
    const int k = 57;
    std::vector<std::pair<std::string, ag::Var>> live = {
        {"p", ag::param(Tensor::full({4}, live_v))}};
    EmaState ema = make_ema(live, decay);
    for (auto& [name, t] : ema.shadow)
        for (int64_t i = 0; i < t.size(); ++i) t[i] = shadow0;
    for (int i = 0; i < k; ++i) ema_update(ema, live, decay);
    const double want = std::pow(decay, k) * shadow0 + (1.0 - std::pow(decay, k)) * live_v;
    for (int64_t i = 0; i < ema.shadow[0].second.size(); ++i)
        c.expect(std::abs(ema.shadow[0].second[i] - want) < 1e-10,
                 "shadow after " + std::to_string(k) + " updates deviates from the recurrence");

    EmaState zero = make_ema(live, 0.0);
    for (auto& [name, t] : zero.shadow)
        for (int64_t i = 0; i < t.size(); ++i) t[i] = shadow0;
    ema_update(zero, live, 0.0);
    c.expect(zero.shadow[0].second[0] == live_v, "decay 0 must copy the live value exactly");

    EmaState one = make_ema(live, 1.0);
    for (auto& [name, t] : one.shadow)
        for (int64_t i = 0; i < t.size(); ++i) t[i] = shadow0;
    ema_update(one, live, 1.0);
    c.expect(one.shadow[0].second[0] == shadow0, "decay 1 must leave the shadow untouched");
    return c.ok;
}

// --- criterion 7: learning-rate schedule ------------------------------------

bool c7_schedule(Checker& c) {
    TrainConfig cfg;
    const struct {
        int epoch;
        double lr;
    } table[] = {{0, 0.001}, {49, 0.001}, {50, 1e-4}, {99, 1e-4},
                 {100, 1e-5}, {200, 1e-5}, {299, 1e-5}};
    for (const auto& row : table)
        c.expect(lr_at(row.epoch, cfg) == row.lr,
                 "lr at epoch " + std::to_string(row.epoch) + " is " +
                     fmt(lr_at(row.epoch, cfg)) + ", want " + fmt(row.lr));
    return c.ok;
}

// --- criterion 8: toy overfit -----------------------------------------------

Tensor toy_image(int i) {
    Tensor t({3, 64, 64});
    for (int ch = 0; ch < 3; ++ch)
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                t[(static_cast<int64_t>(ch) * 64 + y) * 64 + x] =
                    0.8 * std::sin(0.1 * (i + 1) * (x + 2 * ch) + 0.07 * (i + 2) * y);
    return t;
}

std::vector<Sample> toy_dataset() {
    const int groups[8] = {0, 0, 2, 2, 4, 4, 5, 5};
    std::vector<Sample> imgs;
    for (int i = 0; i < 8; ++i) imgs.push_back({toy_image(i), groups[i]});
    return imgs;
}

// Mean zero-noise reconstruction error of the live model over the toy set.
double toy_rec_metric(const ModelState& m, const std::vector<Sample>& imgs) {
    double acc = 0.0;
    for (const auto& s : imgs) {
        ag::Var out = m.forward(ag::constant(s.image), interpolate_age_code(s.group, 0.0));
        acc += ag::scalar_of(ag::mse(ag::constant(s.image), out));
    }
    return acc / static_cast<double>(imgs.size());
}

TrainConfig toy_train_config() {
    TrainConfig cfg;
    cfg.channels = 16;
    cfg.image_size = 64;
    cfg.batch_size = 2;
    cfg.seed = 7;
    // At 8-image scale the adversarial game oscillates and masks the
    // optimization signal this experiment measures; the discriminator still
    // trains, the generator just ignores it.
    cfg.weights.adv = 0.0;
    return cfg;
}

// Shared with criterion 10; trained once.
Trainer& toy_trained_trainer() {
    static Trainer tr = [] {
        Trainer t(toy_train_config());
        std::vector<Sample> imgs = toy_dataset();
        Rng rng(99);
        std::uniform_int_distribution<int> pick(0, 7);
        for (int s = 0; s < 2000; ++s) {
            int a = pick(rng), b = pick(rng);
            if (b == a) b = (a + 1) % 8;
            t.train_step({imgs[static_cast<size_t>(a)], imgs[static_cast<size_t>(b)]});
            // standard decay schedule, compressed onto the 2000-step run
            if (s == 599) t.set_epoch(50);
            if (s == 1399) t.set_epoch(100);
        }
        return t;
    }();
    return tr;
}

bool c8_toy_overfit(Checker& c) {
    std::vector<Sample> imgs = toy_dataset();
    const double rec_before = toy_rec_metric(Trainer(toy_train_config()).model(), imgs);
    Trainer& tr = toy_trained_trainer();
    const double rec_after = toy_rec_metric(tr.model(), imgs);
    c.expect(rec_after * 10.0 <= rec_before,
             "reconstruction fell only " + fmt(rec_before / rec_after) +
                 "x (before " + fmt(rec_before) + ", after " + fmt(rec_after) + ")");

    FallbackPerceptual per;
    double inter = 0.0;
    int pairs = 0;
    for (size_t i = 0; i < imgs.size(); ++i)
        for (size_t j = i + 1; j < imgs.size(); ++j) {
            inter += per.distance(imgs[i].image, imgs[j].image);
            ++pairs;
        }
    inter /= pairs;
    Synthesizer synth(tr.to_checkpoint());
    for (const auto& s : imgs) {
        const double d = per.distance(s.image, synth.single(s.image, s.group));
        c.expect(d < inter, "reconfiguration distance " + fmt(d) +
                                " not below mean inter-image distance " + fmt(inter));
    }
    return c.ok;
}

// --- criterion 9: determinism and checkpointing -----------------------------

bool c9_determinism(Checker& c) {
    TrainConfig cfg;
    cfg.channels = 8;
    cfg.image_size = 16;
    cfg.code_block = 4;
    cfg.batch_size = 2;
    cfg.seed = 11;
    Rng rng(9);
    std::vector<Sample> batch = {{test::random_tensor({3, 16, 16}, rng, 0.4), 4},
                                 {test::random_tensor({3, 16, 16}, rng, 0.4), 1}};

    Trainer a(cfg), b(cfg);
    for (int s = 0; s < 10; ++s) {
        StepStats sa = a.train_step(batch);
        StepStats sb = b.train_step(batch);
        const double denom = std::max({std::abs(sa.g.total), std::abs(sb.g.total), 1e-12});
        c.expect(std::abs(sa.g.total - sb.g.total) / denom < 1e-6,
                 "generator loss diverged at step " + std::to_string(s));
        const double ddenom = std::max({std::abs(sa.d_loss), std::abs(sb.d_loss), 1e-12});
        c.expect(std::abs(sa.d_loss - sb.d_loss) / ddenom < 1e-6,
                 "discriminator loss diverged at step " + std::to_string(s));
    }

    const std::string path = "/tmp/lfs_acceptance_ckpt.bin";
    save_checkpoint(a.to_checkpoint(), path);
    Synthesizer before(a.to_checkpoint());
    Synthesizer after(load_checkpoint(path));
    Tensor probe = test::random_tensor({3, 16, 16}, rng, 0.4);
    for (int g = 0; g < kNumAgeGroups; ++g)
        c.expect(bitwise_equal(before.single(probe, g), after.single(probe, g)),
                 "round-tripped checkpoint changed inference for group " + std::to_string(g));
    return c.ok;
}

// --- criterion 10: ablation executability -----------------------------------

bool c10_ablations(Checker& c) {
    Trainer& tr = toy_trained_trainer();
    CheckpointBundle bundle = tr.to_checkpoint();
    Synthesizer synth(bundle);
    Tensor ref = toy_image(0);
    Tensor donor = toy_image(5);

    std::vector<Tensor> so = synth.shape_only(ref);
    c.expect(so.size() == kNumAgeGroups, "shape-only did not yield one frame per group");
    for (const Tensor& f : so)
        c.expect(f.shape() == std::vector<int>{3, 64, 64}, "shape-only frame has wrong shape");

    c.expect(bitwise_equal(synth.texture_swap(ref, ref, 3), synth.single(ref, 3)),
             "self texture swap must equal plain synthesis bitwise");
    Tensor swapped = synth.texture_swap(ref, donor, 3);
    c.expect(swapped.shape() == std::vector<int>{3, 64, 64}, "texture swap has wrong shape");

    std::vector<Tensor> seq = synth.interpolate_sequence(ref, 2, 5);
    c.expect(seq.size() == 5, "interpolation step count is wrong");
    c.expect(bitwise_equal(seq.front(), synth.single(ref, 2)),
             "interpolation start is not the lower group bitwise");
    c.expect(bitwise_equal(seq.back(), synth.single(ref, 3)),
             "interpolation end is not the upper group bitwise");

    TrainConfig ecfg = toy_train_config();
    ecfg.mode = ModelMode::entangled;
    Trainer etr(ecfg);
    std::vector<Sample> imgs = toy_dataset();
    for (int s = 0; s < 10; ++s)
        etr.train_step({imgs[static_cast<size_t>(2 * s % 8)],
                        imgs[static_cast<size_t>((2 * s + 1) % 8)]});
    Synthesizer esynth(etr.to_checkpoint());
    Tensor e1 = esynth.entangled(ref, 4);
    c.expect(e1.shape() == std::vector<int>{3, 64, 64}, "entangled output has wrong shape");
    c.expect(bitwise_equal(e1, esynth.entangled(ref, 4)), "entangled mode is not deterministic");
    bool threw = false;
    try {
        synth.entangled(ref, 4);
    } catch (const IncompatibleCheckpoint&) {
        threw = true;
    }
    c.expect(threw, "disentangled checkpoint accepted an entangled request");
    return c.ok;
}

}  // namespace

int main() {
    const struct {
        const char* name;
        bool (*fn)(Checker&);
    } criteria[] = {
        {"age-code suite", c1_age_codes},
        {"shape contracts", c2_shape_contract},
        {"identity at initialization", c3_identity_at_init},
        {"gradient suite", c4_gradients},
        {"loss trivial zeros and arithmetic", c5_loss_zeros},
        {"EMA closed form", c6_ema},
        {"learning-rate schedule", c7_schedule},
        {"toy overfit", c8_toy_overfit},
        {"determinism and checkpointing", c9_determinism},
        {"ablation executability", c10_ablations},
    };
    int failures = 0;
    int index = 0;
    for (const auto& cr : criteria) {
        ++index;
        Checker c;
        bool ok = false;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            ok = cr.fn(c);
        } catch (const std::exception& e) {
            std::printf("       detail: unexpected exception: %s\n", e.what());
            ok = false;
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d %-36s %s (%.1fs)\n", index, cr.name,
                    ok ? "PASS" : "FAIL", secs);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
