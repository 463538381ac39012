#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lfs/losses.hpp"

namespace lfs {

enum class Gender { male, female };

Gender parse_gender(const std::string& token);
std::string to_string(Gender g);
std::string to_string(ModelMode m);

struct TrainConfig {
    int code_block = kDefaultCodeBlock;  // N
    int channels = 256;                  // C
    int image_size = 256;
    int batch_size = 2;
    int epochs = 300;
    double lr = 0.001;
    std::map<int, double> lr_decay = {{50, 0.1}, {100, 0.1}};
    double ema_decay = 0.999;
    double noise_scale = 0.2;
    double r1_gamma = 10.0;
    LossWeights weights;
    std::uint64_t seed = 0;
    ModelMode mode = ModelMode::disentangled;

    ModelConfig model_config() const;

    // Plain key=value text, '#' comments; lr_decay as "50:0.1,100:0.1".
    static TrainConfig parse(const std::string& text);
    static TrainConfig parse_file(const std::string& path);
    std::string serialize() const;
};

// Piecewise-constant schedule: the decay factor of every entry with
// epoch <= the queried epoch is applied.
double lr_at(int epoch, const TrainConfig& cfg);

struct ManifestEntry {
    std::string image_path;  // resolved against the manifest's directory
    int age_group = 0;
    Gender gender = Gender::male;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
};

DatasetManifest load_manifest(const std::string& path,
                              std::optional<Gender> filter = std::nullopt);

// Adaptive moment estimation over a fixed named parameter list. Parameters
// are updated in place; a missing gradient is treated as zero.
class Adam {
public:
    Adam() = default;
    Adam(std::vector<std::pair<std::string, ag::Var>> params, double beta1 = 0.0,
         double beta2 = 0.99, double eps = 1e-8);

    void step(const ag::GradMap& grads, double lr);

    std::int64_t t() const { return t_; }
    // "m <name>" / "v <name>" moment tensors, registration order.
    std::vector<std::pair<std::string, Tensor>> state() const;
    void restore(const std::vector<std::pair<std::string, Tensor>>& state,
                 std::int64_t t);

private:
    std::vector<std::pair<std::string, ag::Var>> params_;
    std::vector<Tensor> m_, v_;
    double beta1_ = 0.0, beta2_ = 0.99, eps_ = 1e-8;
    std::int64_t t_ = 0;
};

struct EmaState {
    std::vector<std::pair<std::string, Tensor>> shadow;
    double decay = 0.999;
};

EmaState make_ema(const std::vector<std::pair<std::string, ag::Var>>& live,
                  double decay);
// shadow := decay * shadow + (1 - decay) * live, elementwise.
void ema_update(EmaState& ema,
                const std::vector<std::pair<std::string, ag::Var>>& live,
                double decay);

struct CheckpointBundle {
    TrainConfig config;
    int epoch = 0;
    std::int64_t step = 0;
    std::int64_t g_t = 0, d_t = 0;
    std::vector<std::pair<std::string, Tensor>> params;
    std::vector<std::pair<std::string, Tensor>> ema_shadow;
    std::vector<std::pair<std::string, Tensor>> g_opt, d_opt;
};

void save_checkpoint(const CheckpointBundle& bundle, const std::string& path);
CheckpointBundle load_checkpoint(const std::string& path);

struct Sample {
    Tensor image;  // [3,H,W] in [-1,1]
    int group = 0;
};

struct StepStats {
    LossBreakdown g;
    double d_loss = 0.0;
};

class Trainer {
public:
    explicit Trainer(TrainConfig cfg);
    explicit Trainer(const CheckpointBundle& bundle);

    const TrainConfig& config() const { return cfg_; }
    ModelState& model() { return model_; }
    const ModelState& model() const { return model_; }
    EmaState& ema() { return ema_; }
    int epoch() const { return epoch_; }
    void set_epoch(int e) { epoch_ = e; }
    std::int64_t step_count() const { return step_; }

    // Age-code draws for one step, fixed up front so the two substeps see
    // the same targets.
    struct StepPlan {
        std::vector<int> target_group;
        std::vector<AgeCode> z_target, z_ref, z_shape;  // z_shape empty unless r==4
    };

    StepPlan plan_step(const std::vector<Sample>& batch);
    double substep_discriminator(const std::vector<Sample>& batch, const StepPlan& plan);
    LossBreakdown substep_generator(const std::vector<Sample>& batch, const StepPlan& plan);
    void update_ema();

    StepStats train_step(const std::vector<Sample>& batch);

    using LogFn = std::function<void(int epoch, std::int64_t step, const StepStats&)>;
    // One epoch = one shuffled pass over the manifest.
    void train(const DatasetManifest& data, const LogFn& log = nullptr);

    CheckpointBundle to_checkpoint() const;

private:
    TrainConfig cfg_;
    ModelState model_;
    Adam g_opt_, d_opt_;
    EmaState ema_;
    Rng rng_;
    int epoch_ = 0;
    std::int64_t step_ = 0;
};

}  // namespace lfs
