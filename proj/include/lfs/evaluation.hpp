#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lfs/synthesis.hpp"

namespace lfs {

// Identity feature extractor used for the verification-rate metric.
class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    // Unit-L2-norm vector.
    virtual Tensor embed(const Tensor& image) = 0;
    // Verification cutoff on cosine similarity.
    virtual double threshold() const = 0;
    virtual std::string label() const = 0;
};

class PerceptualBackend {
public:
    virtual ~PerceptualBackend() = default;
    // Nonnegative, symmetric, zero on identical images.
    virtual double distance(const Tensor& a, const Tensor& b) = 0;
    virtual std::string label() const = 0;
};

// Self-contained defaults so the harness runs without external models:
// embedding = L2-normalized 16x16 grayscale downsample, perceptual = mean
// absolute pixel difference. Numbers under these are labelled "fallback".
class FallbackEmbedding : public EmbeddingBackend {
public:
    explicit FallbackEmbedding(double threshold = 0.8) : threshold_(threshold) {}
    Tensor embed(const Tensor& image) override;
    double threshold() const override { return threshold_; }
    std::string label() const override { return "fallback"; }

private:
    double threshold_;
};

class FallbackPerceptual : public PerceptualBackend {
public:
    double distance(const Tensor& a, const Tensor& b) override;
    std::string label() const override { return "fallback"; }
};

// Subprocess-backed plug-ins. Each record is one line: the command receives
// PNG path(s) on stdin and answers with one line of numbers on stdout.
class ExternalEmbedding : public EmbeddingBackend {
public:
    ExternalEmbedding(std::string command, double threshold);
    Tensor embed(const Tensor& image) override;
    double threshold() const override { return threshold_; }
    std::string label() const override { return "external"; }

private:
    std::string command_;
    double threshold_;
};

class ExternalPerceptual : public PerceptualBackend {
public:
    explicit ExternalPerceptual(std::string command);
    double distance(const Tensor& a, const Tensor& b) override;
    std::string label() const override { return "external"; }

private:
    std::string command_;
};

struct EvalRecord {
    std::string image;
    std::vector<bool> id_pass;  // one flag per age group
    double reconfig = 0.0;
};

struct EvalReport {
    std::string backend_label;
    std::vector<EvalRecord> records;

    bool has_aggregates() const { return !records.empty(); }
    double id_rate() const;
    // Population statistics over per-image reconfiguration distances.
    std::pair<double, double> reconfig_mean_std() const;
};

double cosine_similarity(const Tensor& a, const Tensor& b);

// (reference image, target group) -> generated image. Lets tests plug in
// stub models.
using SynthFn = std::function<Tensor(const Tensor&, int)>;

// For each test image, synthesize all 6 targets and count embedding passes.
double eval_identity(const SynthFn& synth, const DatasetManifest& testset,
                     EmbeddingBackend& backend, EvalReport* accum = nullptr);
double eval_identity(const Synthesizer& synth, const DatasetManifest& testset,
                     EmbeddingBackend& backend, EvalReport* accum = nullptr);

// Per image, distance between the reference and its zero-noise same-group
// regeneration; returns (mean, population std).
std::pair<double, double> eval_reconfiguration(const SynthFn& synth,
                                               const DatasetManifest& testset,
                                               PerceptualBackend& backend,
                                               EvalReport* accum = nullptr);
std::pair<double, double> eval_reconfiguration(const Synthesizer& synth,
                                               const DatasetManifest& testset,
                                               PerceptualBackend& backend,
                                               EvalReport* accum = nullptr);

void emit_report(const EvalReport& report, const std::string& path);
EvalReport parse_report(const std::string& path);

}  // namespace lfs
