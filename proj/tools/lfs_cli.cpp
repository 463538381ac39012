#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "lfs/evaluation.hpp"
#include "lfs/image_io.hpp"
#include "lfs/synthesis.hpp"
#include "lfs/trainer.hpp"

namespace fs = std::filesystem;
using namespace lfs;

namespace {

int run_train(const std::string& manifest_path, const std::string& gender,
              const std::string& out_dir, const std::string& config_path,
              const std::string& resume, int image_size, long long seed) {
    TrainConfig cfg = TrainConfig::parse_file(config_path);
    if (image_size > 0) cfg.image_size = image_size;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);

    const DatasetManifest data = load_manifest(manifest_path, parse_gender(gender));
    std::cout << "training on " << data.entries.size() << " " << gender << " images\n";

    fs::create_directories(out_dir);
    const std::string ckpt_path = (fs::path(out_dir) / "model.ckpt").string();

    Trainer trainer = resume.empty() ? Trainer(cfg) : Trainer(load_checkpoint(resume));
    int last_logged_epoch = -1;
    trainer.train(data, [&](int epoch, std::int64_t step, const StepStats& s) {
        if (epoch != last_logged_epoch) {
            if (last_logged_epoch >= 0) save_checkpoint(trainer.to_checkpoint(), ckpt_path);
            last_logged_epoch = epoch;
        }
        std::printf(
            "epoch %3d step %6lld  g %.5f (adv %.4f rec %.4f cyc %.4f id %.4f shape %.4f)"
            "  d %.5f\n",
            epoch, static_cast<long long>(step), s.g.total, s.g.adv, s.g.rec, s.g.cyc,
            s.g.id, s.g.shape, s.d_loss);
    });
    save_checkpoint(trainer.to_checkpoint(), ckpt_path);
    std::cout << "checkpoint written to " << ckpt_path << "\n";
    return 0;
}

int run_synthesize(const std::string& ckpt_path, const std::string& image_path,
                   const std::string& mode_token, int group, int steps,
                   const std::string& donor_path, bool no_ema,
                   const std::string& out_dir) {
    SynthesisRequest req;
    req.mode = parse_synthesis_mode(mode_token);
    req.reference = img::load_png(image_path);
    if (group >= 0) req.target_group = group;
    if (steps > 0) req.alpha_steps = steps;
    if (!donor_path.empty()) req.donor = img::load_png(donor_path);
    req.use_ema = !no_ema;

    Synthesizer synth(load_checkpoint(ckpt_path), req.use_ema);
    const std::vector<Tensor> frames = synth.run(req);

    fs::create_directories(out_dir);
    const std::string stem = fs::path(image_path).stem().string();
    auto emit = [&](const Tensor& t, const std::string& name) {
        const std::string path = (fs::path(out_dir) / name).string();
        img::save_png(t, path);
        std::cout << path << "\n";
    };

    switch (req.mode) {
        case SynthesisMode::single:
        case SynthesisMode::texture_swap:
        case SynthesisMode::entangled:
            emit(frames[0], stem + "_g" + std::to_string(*req.target_group) + ".png");
            break;
        case SynthesisMode::lifespan:
        case SynthesisMode::shape_only:
            for (int g = 0; g < kNumAgeGroups; ++g)
                emit(frames[static_cast<size_t>(g)], stem + "_g" + std::to_string(g) + ".png");
            emit(img::hstack(frames), stem + "_strip.png");
            break;
        case SynthesisMode::interpolate: {
            const int k = static_cast<int>(frames.size());
            for (int i = 0; i < k; ++i) {
                const double alpha = static_cast<double>(i) / (k - 1);
                char name[64];
                std::snprintf(name, sizeof(name), "_a%.3f.png", alpha);
                emit(frames[static_cast<size_t>(i)], stem + name);
            }
            emit(img::hstack(frames), stem + "_strip.png");
            break;
        }
    }
    return 0;
}

int run_evaluate(const std::string& ckpt_path, const std::string& manifest_path,
                 const std::string& backend, const std::string& embed_cmd,
                 const std::string& dist_cmd, double threshold,
                 const std::string& out_path) {
    Synthesizer synth(load_checkpoint(ckpt_path));
    const DatasetManifest testset = load_manifest(manifest_path);

    std::unique_ptr<EmbeddingBackend> embed;
    std::unique_ptr<PerceptualBackend> dist;
    if (backend == "fallback") {
        embed = std::make_unique<FallbackEmbedding>(threshold);
        dist = std::make_unique<FallbackPerceptual>();
    } else {
        if (embed_cmd.empty() || dist_cmd.empty())
            throw BadRequest("external backend needs --embed-cmd and --dist-cmd");
        embed = std::make_unique<ExternalEmbedding>(embed_cmd, threshold);
        dist = std::make_unique<ExternalPerceptual>(dist_cmd);
    }

    EvalReport report;
    const double rate = eval_identity(synth, testset, *embed, &report);
    const auto [mean, stdev] = eval_reconfiguration(synth, testset, *dist, &report);
    report.backend_label = backend;
    emit_report(report, out_path);

    std::printf("backend  %s\nid_rate  %.4f\nreconfig %.4f +- %.4f\nreport   %s\n",
                backend.c_str(), rate, mean, stdev, out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"disentangled lifespan face synthesis"};
    app.require_subcommand(1);

    // train
    std::string manifest_path, gender, out_dir, config_path, resume;
    int image_size = 0;
    long long seed = -1;
    CLI::App* train = app.add_subcommand("train", "train a model");
    train->add_option("--manifest", manifest_path, "dataset manifest")->required();
    train->add_option("--gender", gender, "male or female")
        ->required()
        ->check(CLI::IsMember({"male", "female"}));
    train->add_option("--out", out_dir, "output directory")->required();
    train->add_option("--config", config_path, "key=value config file")->required();
    train->add_option("--resume", resume, "checkpoint to resume from");
    train->add_option("--image-size", image_size, "override image size");
    train->add_option("--seed", seed, "override RNG seed");

    // synthesize
    std::string ckpt_path, image_path, mode_token = "single", donor_path, syn_out;
    int group = -1, steps = 0;
    bool no_ema = false;
    CLI::App* synth = app.add_subcommand("synthesize", "run inference");
    synth->add_option("--ckpt", ckpt_path, "checkpoint")->required();
    synth->add_option("--image", image_path, "reference PNG")->required();
    synth->add_option("--mode", mode_token, "synthesis mode")
        ->required()
        ->check(CLI::IsMember({"single", "lifespan", "interpolate", "shape-only",
                               "texture-swap", "entangled"}));
    synth->add_option("--group", group, "target age group 0..5");
    synth->add_option("--steps", steps, "interpolation steps");
    synth->add_option("--donor", donor_path, "texture donor PNG");
    synth->add_flag("--no-ema", no_ema, "use live instead of EMA parameters");
    synth->add_option("--out", syn_out, "output directory")->required();

    // evaluate
    std::string eval_ckpt, eval_manifest, backend = "fallback", embed_cmd, dist_cmd,
                report_path;
    double threshold = 0.8;
    CLI::App* eval = app.add_subcommand("evaluate", "run the metric suite");
    eval->add_option("--ckpt", eval_ckpt, "checkpoint")->required();
    eval->add_option("--manifest", eval_manifest, "test manifest")->required();
    eval->add_option("--backend", backend, "fallback or external")
        ->check(CLI::IsMember({"fallback", "external"}));
    eval->add_option("--embed-cmd", embed_cmd, "external embedding command");
    eval->add_option("--dist-cmd", dist_cmd, "external distance command");
    eval->add_option("--threshold", threshold, "identity verification cutoff");
    eval->add_option("--out", report_path, "report file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train)
            return run_train(manifest_path, gender, out_dir, config_path, resume,
                             image_size, seed);
        if (*synth)
            return run_synthesize(ckpt_path, image_path, mode_token, group, steps,
                                  donor_path, no_ema, syn_out);
        if (*eval)
            return run_evaluate(eval_ckpt, eval_manifest, backend, embed_cmd, dist_cmd,
                                threshold, report_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
