#include "lfs/evaluation.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lfs/image_io.hpp"

namespace fs = std::filesystem;

namespace lfs {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    out += "'";
    return out;
}

// Feed one line of input to the command, read one line of output.
std::string run_line_filter(const std::string& command, const std::string& record) {
    const std::string pipeline =
        "printf '%s\\n' " + shell_quote(record) + " | ( " + command + " )";
    FILE* pipe = popen(pipeline.c_str(), "r");
    if (!pipe) throw IoError("cannot launch backend command: " + command);
    std::string out;
    char buf[4096];
    while (fgets(buf, sizeof(buf), pipe)) out += buf;
    const int rc = pclose(pipe);
    if (rc != 0)
        throw IoError("backend command failed (exit " + std::to_string(rc) + "): " + command);
    const auto nl = out.find('\n');
    return nl == std::string::npos ? out : out.substr(0, nl);
}

std::vector<double> parse_numbers(const std::string& line, const std::string& what) {
    std::istringstream in(line);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (out.empty()) throw IoError("backend returned no numbers for " + what);
    return out;
}

class TempPng {
public:
    explicit TempPng(const Tensor& image) {
        static std::atomic<int> counter{0};
        path_ = (fs::temp_directory_path() /
                 ("lfs_eval_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++) + ".png"))
                    .string();
        img::save_png(image, path_);
    }
    ~TempPng() { std::error_code ec; fs::remove(path_, ec); }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

void ensure_records(EvalReport* accum, const DatasetManifest& testset) {
    if (!accum) return;
    if (accum->records.empty()) {
        accum->records.resize(testset.entries.size());
        for (size_t i = 0; i < testset.entries.size(); ++i)
            accum->records[i].image = testset.entries[i].image_path;
    } else if (accum->records.size() != testset.entries.size()) {
        throw ShapeMismatch("evaluation report already holds a different test set");
    }
}

}  // namespace

Tensor FallbackEmbedding::embed(const Tensor& image) {
    const Tensor small = img::resize_bilinear(image, 16);
    Tensor v({16 * 16});
    for (int i = 0; i < 16 * 16; ++i)
        v[i] = (small[i] + small[256 + i] + small[512 + i]) / 3.0;
    double norm = 0.0;
    for (int i = 0; i < 256; ++i) norm += v[i] * v[i];
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
        v[0] = 1.0;
        return v;
    }
    for (int i = 0; i < 256; ++i) v[i] /= norm;
    return v;
}

double FallbackPerceptual::distance(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("perceptual distance needs equal shapes");
    double sum = 0.0;
    for (int64_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

ExternalEmbedding::ExternalEmbedding(std::string command, double threshold)
    : command_(std::move(command)), threshold_(threshold) {}

Tensor ExternalEmbedding::embed(const Tensor& image) {
    TempPng png(image);
    const std::vector<double> nums =
        parse_numbers(run_line_filter(command_, png.path()), "embedding");
    Tensor v({static_cast<int>(nums.size())});
    double norm = 0.0;
    for (size_t i = 0; i < nums.size(); ++i) {
        v[static_cast<int64_t>(i)] = nums[i];
        norm += nums[i] * nums[i];
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) throw IoError("external embedding has zero norm");
    for (int64_t i = 0; i < v.size(); ++i) v[i] /= norm;
    return v;
}

ExternalPerceptual::ExternalPerceptual(std::string command)
    : command_(std::move(command)) {}

double ExternalPerceptual::distance(const Tensor& a, const Tensor& b) {
    TempPng pa(a), pb(b);
    const std::vector<double> nums = parse_numbers(
        run_line_filter(command_, pa.path() + "\t" + pb.path()), "distance");
    if (nums[0] < 0.0) throw IoError("external distance is negative");
    return nums[0];
}

double cosine_similarity(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("cosine of unequal vectors");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int64_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double EvalReport::id_rate() const {
    std::int64_t passes = 0, total = 0;
    for (const EvalRecord& r : records) {
        for (bool p : r.id_pass) {
            ++total;
            passes += p ? 1 : 0;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(passes) / static_cast<double>(total);
}

std::pair<double, double> EvalReport::reconfig_mean_std() const {
    if (records.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (const EvalRecord& r : records) mean += r.reconfig;
    mean /= static_cast<double>(records.size());
    double var = 0.0;
    for (const EvalRecord& r : records) {
        const double d = r.reconfig - mean;
        var += d * d;
    }
    var /= static_cast<double>(records.size());
    return {mean, std::sqrt(var)};
}

double eval_identity(const SynthFn& synth, const DatasetManifest& testset,
                     EmbeddingBackend& backend, EvalReport* accum) {
    if (testset.entries.empty()) throw EmptyDataset("identity evaluation on empty test set");
    ensure_records(accum, testset);
    if (accum) accum->backend_label = backend.label();
    std::int64_t passes = 0, total = 0;
    for (size_t i = 0; i < testset.entries.size(); ++i) {
        const Tensor reference = img::load_png(testset.entries[i].image_path);
        const Tensor ref_embed = backend.embed(reference);
        std::vector<bool> flags;
        flags.reserve(kNumAgeGroups);
        for (int g = 0; g < kNumAgeGroups; ++g) {
            const Tensor generated = synth(reference, g);
            const bool pass =
                cosine_similarity(ref_embed, backend.embed(generated)) >= backend.threshold();
            flags.push_back(pass);
            ++total;
            passes += pass ? 1 : 0;
        }
        if (accum) accum->records[i].id_pass = flags;
    }
    return static_cast<double>(passes) / static_cast<double>(total);
}

double eval_identity(const Synthesizer& synth, const DatasetManifest& testset,
                     EmbeddingBackend& backend, EvalReport* accum) {
    return eval_identity(
        [&](const Tensor& ref, int g) { return synth.single(ref, g); }, testset, backend,
        accum);
}

std::pair<double, double> eval_reconfiguration(const SynthFn& synth,
                                               const DatasetManifest& testset,
                                               PerceptualBackend& backend,
                                               EvalReport* accum) {
    if (testset.entries.empty())
        throw EmptyDataset("reconfiguration evaluation on empty test set");
    ensure_records(accum, testset);
    if (accum) accum->backend_label = backend.label();
    std::vector<double> dists;
    dists.reserve(testset.entries.size());
    for (size_t i = 0; i < testset.entries.size(); ++i) {
        const ManifestEntry& e = testset.entries[i];
        const Tensor reference = img::load_png(e.image_path);
        const Tensor regen = synth(reference, e.age_group);
        const double d = backend.distance(img::resize_bilinear(reference, regen.dim(1)), regen);
        dists.push_back(d);
        if (accum) accum->records[i].reconfig = d;
    }
    double mean = 0.0;
    for (double d : dists) mean += d;
    mean /= static_cast<double>(dists.size());
    double var = 0.0;
    for (double d : dists) var += (d - mean) * (d - mean);
    var /= static_cast<double>(dists.size());
    return {mean, std::sqrt(var)};
}

std::pair<double, double> eval_reconfiguration(const Synthesizer& synth,
                                               const DatasetManifest& testset,
                                               PerceptualBackend& backend,
                                               EvalReport* accum) {
    return eval_reconfiguration(
        [&](const Tensor& ref, int g) { return synth.single(ref, g); }, testset, backend,
        accum);
}

void emit_report(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report '" + path + "'");
    out << "lfs-eval-report v1\n";
    out << "backend\t" << report.backend_label << "\n";
    for (const EvalRecord& r : report.records) {
        out << "record\t" << r.image << "\t";
        if (r.id_pass.empty()) {
            out << "-";
        } else {
            for (bool p : r.id_pass) out << (p ? '1' : '0');
        }
        out << "\t" << fmt_double(r.reconfig) << "\n";
    }
    if (report.has_aggregates()) {
        const auto [mean, stdev] = report.reconfig_mean_std();
        out << "aggregate\tid_rate=" << fmt_double(report.id_rate())
            << "\treconfig_mean=" << fmt_double(mean)
            << "\treconfig_std=" << fmt_double(stdev) << "\n";
    }
    if (!out) throw IoError("write failed for report '" + path + "'");
}

EvalReport parse_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "lfs-eval-report v1")
        throw IoError("not an evaluation report: '" + path + "'");
    EvalReport report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::istringstream cs(line);
        std::string col;
        while (std::getline(cs, col, '\t')) cols.push_back(col);
        if (cols[0] == "backend" && cols.size() == 2) {
            report.backend_label = cols[1];
        } else if (cols[0] == "record" && cols.size() == 4) {
            EvalRecord r;
            r.image = cols[1];
            if (cols[2] != "-")
                for (char c : cols[2]) r.id_pass.push_back(c == '1');
            r.reconfig = std::stod(cols[3]);
            report.records.push_back(std::move(r));
        } else if (cols[0] == "aggregate") {
            // recomputable from the records; validated on demand
        } else {
            throw IoError("malformed report line: '" + line + "'");
        }
    }
    return report;
}

}  // namespace lfs
