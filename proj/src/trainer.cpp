#include "lfs/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "lfs/image_io.hpp"

namespace fs = std::filesystem;

namespace lfs {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("config: bad value '" + s + "' for " + key);
    }
}

long long parse_int(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("config: bad value '" + s + "' for " + key);
    }
}

}  // namespace

Gender parse_gender(const std::string& token) {
    if (token == "male") return Gender::male;
    if (token == "female") return Gender::female;
    throw ManifestError("unknown gender '" + token + "'");
}

std::string to_string(Gender g) { return g == Gender::male ? "male" : "female"; }

std::string to_string(ModelMode m) {
    return m == ModelMode::disentangled ? "disentangled" : "entangled";
}

ModelConfig TrainConfig::model_config() const {
    ModelConfig mc;
    mc.code_block = code_block;
    mc.channels = channels;
    mc.image_size = image_size;
    mc.mode = mode;
    return mc;
}

std::string TrainConfig::serialize() const {
    std::ostringstream out;
    out << "code_block=" << code_block << "\n"
        << "channels=" << channels << "\n"
        << "image_size=" << image_size << "\n"
        << "batch_size=" << batch_size << "\n"
        << "epochs=" << epochs << "\n"
        << "lr=" << fmt_double(lr) << "\n";
    out << "lr_decay=";
    bool first = true;
    for (const auto& [e, f] : lr_decay) {
        if (!first) out << ",";
        out << e << ":" << fmt_double(f);
        first = false;
    }
    out << "\n"
        << "ema_decay=" << fmt_double(ema_decay) << "\n"
        << "noise_scale=" << fmt_double(noise_scale) << "\n"
        << "r1_gamma=" << fmt_double(r1_gamma) << "\n"
        << "lambda_adv=" << fmt_double(weights.adv) << "\n"
        << "lambda_rec=" << fmt_double(weights.rec) << "\n"
        << "lambda_cyc=" << fmt_double(weights.cyc) << "\n"
        << "lambda_id=" << fmt_double(weights.id) << "\n"
        << "lambda_shape=" << fmt_double(weights.shape) << "\n"
        << "seed=" << seed << "\n"
        << "mode=" << to_string(mode) << "\n";
    return out.str();
}

TrainConfig TrainConfig::parse(const std::string& text) {
    TrainConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw IoError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key == "code_block") cfg.code_block = static_cast<int>(parse_int(val, key));
        else if (key == "channels") cfg.channels = static_cast<int>(parse_int(val, key));
        else if (key == "image_size") cfg.image_size = static_cast<int>(parse_int(val, key));
        else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_int(val, key));
        else if (key == "epochs") cfg.epochs = static_cast<int>(parse_int(val, key));
        else if (key == "lr") cfg.lr = parse_double(val, key);
        else if (key == "lr_decay") {
            cfg.lr_decay.clear();
            std::istringstream items(val);
            std::string item;
            while (std::getline(items, item, ',')) {
                item = trim(item);
                if (item.empty()) continue;
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw IoError("config: lr_decay entries must be epoch:factor");
                cfg.lr_decay[static_cast<int>(parse_int(trim(item.substr(0, colon)), key))] =
                    parse_double(trim(item.substr(colon + 1)), key);
            }
        } else if (key == "ema_decay") cfg.ema_decay = parse_double(val, key);
        else if (key == "noise_scale") cfg.noise_scale = parse_double(val, key);
        else if (key == "r1_gamma") cfg.r1_gamma = parse_double(val, key);
        else if (key == "lambda_adv") cfg.weights.adv = parse_double(val, key);
        else if (key == "lambda_rec") cfg.weights.rec = parse_double(val, key);
        else if (key == "lambda_cyc") cfg.weights.cyc = parse_double(val, key);
        else if (key == "lambda_id") cfg.weights.id = parse_double(val, key);
        else if (key == "lambda_shape") cfg.weights.shape = parse_double(val, key);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(val, key));
        else if (key == "mode") {
            if (val == "disentangled") cfg.mode = ModelMode::disentangled;
            else if (val == "entangled") cfg.mode = ModelMode::entangled;
            else throw IoError("config: unknown mode '" + val + "'");
        } else {
            throw IoError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    if (cfg.code_block < 1 || cfg.channels < 1 || cfg.image_size < 8 ||
        cfg.batch_size < 1 || cfg.epochs < 0 || cfg.lr <= 0.0 ||
        cfg.ema_decay < 0.0 || cfg.ema_decay > 1.0 || cfg.noise_scale < 0.0)
        throw IoError("config: value out of range");
    return cfg;
}

TrainConfig TrainConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

double lr_at(int epoch, const TrainConfig& cfg) {
    double rate = cfg.lr;
    for (const auto& [e, f] : cfg.lr_decay)
        if (epoch >= e) rate *= f;
    return rate;
}

DatasetManifest load_manifest(const std::string& path, std::optional<Gender> filter) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest '" + path + "'");
    const fs::path root = fs::path(path).parent_path();
    DatasetManifest out;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::vector<std::string> cols;
        std::istringstream cs(s);
        std::string col;
        while (std::getline(cs, col, '\t')) cols.push_back(trim(col));
        if (cols.size() != 3)
            throw ManifestError("manifest row " + std::to_string(row) +
                                ": expected path<TAB>group<TAB>gender");
        ManifestEntry e;
        e.image_path = (root / cols[0]).string();
        try {
            size_t pos = 0;
            e.age_group = std::stoi(cols[1], &pos);
            if (pos != cols[1].size()) throw std::invalid_argument(cols[1]);
        } catch (const std::exception&) {
            throw ManifestError("manifest row " + std::to_string(row) + ": bad age group '" +
                                cols[1] + "'");
        }
        if (e.age_group < 0 || e.age_group >= kNumAgeGroups)
            throw ManifestError("manifest row " + std::to_string(row) + ": age group " +
                                cols[1] + " out of range");
        try {
            e.gender = parse_gender(cols[2]);
        } catch (const ManifestError&) {
            throw ManifestError("manifest row " + std::to_string(row) + ": bad gender '" +
                                cols[2] + "'");
        }
        if (!fs::exists(e.image_path))
            throw ManifestError("manifest row " + std::to_string(row) + ": missing image '" +
                                e.image_path + "'");
        if (!filter || e.gender == *filter) out.entries.push_back(std::move(e));
    }
    if (out.entries.empty()) throw EmptyDataset("manifest '" + path + "' has no usable entries");
    return out;
}

Adam::Adam(std::vector<std::pair<std::string, ag::Var>> params, double beta1,
           double beta2, double eps)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& [name, p] : params_) {
        m_.push_back(Tensor::zeros(p->value.shape()));
        v_.push_back(Tensor::zeros(p->value.shape()));
    }
}

void Adam::step(const ag::GradMap& grads, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Tensor& p = params_[i].second->value;
        const auto it = grads.find(params_[i].second.get());
        const Tensor* g = it == grads.end() ? nullptr : &it->second->value;
        if (g && !g->same_shape(p)) throw ShapeMismatch("adam: gradient shape mismatch");
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (int64_t k = 0; k < p.size(); ++k) {
            const double gk = g ? (*g)[k] : 0.0;
            m[k] = beta1_ * m[k] + (1.0 - beta1_) * gk;
            v[k] = beta2_ * v[k] + (1.0 - beta2_) * gk * gk;
            p[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
        }
    }
}

std::vector<std::pair<std::string, Tensor>> Adam::state() const {
    std::vector<std::pair<std::string, Tensor>> out;
    out.reserve(2 * params_.size());
    for (size_t i = 0; i < params_.size(); ++i) {
        out.emplace_back("m " + params_[i].first, m_[i].clone());
        out.emplace_back("v " + params_[i].first, v_[i].clone());
    }
    return out;
}

void Adam::restore(const std::vector<std::pair<std::string, Tensor>>& state,
                   std::int64_t t) {
    if (state.size() != 2 * params_.size())
        throw IncompatibleCheckpoint("optimizer state entry count mismatch");
    for (size_t i = 0; i < params_.size(); ++i) {
        const auto& [mn, mt] = state[2 * i];
        const auto& [vn, vt] = state[2 * i + 1];
        if (mn != "m " + params_[i].first || vn != "v " + params_[i].first)
            throw IncompatibleCheckpoint("optimizer state names do not match parameters");
        if (!mt.same_shape(m_[i]) || !vt.same_shape(v_[i]))
            throw IncompatibleCheckpoint("optimizer state shape mismatch");
        m_[i] = mt.clone();
        v_[i] = vt.clone();
    }
    t_ = t;
}

EmaState make_ema(const std::vector<std::pair<std::string, ag::Var>>& live,
                  double decay) {
    EmaState ema;
    ema.decay = decay;
    ema.shadow.reserve(live.size());
    for (const auto& [name, p] : live) ema.shadow.emplace_back(name, p->value.clone());
    return ema;
}

void ema_update(EmaState& ema,
                const std::vector<std::pair<std::string, ag::Var>>& live,
                double decay) {
    if (ema.shadow.size() != live.size())
        throw ShapeMismatch("ema: parameter count mismatch");
    for (size_t i = 0; i < live.size(); ++i) {
        Tensor& s = ema.shadow[i].second;
        const Tensor& p = live[i].second->value;
        if (!s.same_shape(p)) throw ShapeMismatch("ema: shape mismatch at " + live[i].first);
        for (int64_t k = 0; k < s.size(); ++k)
            s[k] = decay * s[k] + (1.0 - decay) * p[k];
    }
}

namespace {

constexpr char kMagic[8] = {'L', 'F', 'S', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_i64(std::ostream& out, std::int64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_str(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_tensors(std::ostream& out,
                   const std::vector<std::pair<std::string, Tensor>>& ts) {
    write_u64(out, ts.size());
    for (const auto& [name, t] : ts) {
        write_str(out, name);
        write_u64(out, t.shape().size());
        for (int d : t.shape()) write_i64(out, d);
        out.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
}

void read_raw(std::istream& in, void* dst, size_t n) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in.gcount()) != n)
        throw IoError("checkpoint: unexpected end of file");
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v;
    read_raw(in, &v, sizeof(v));
    return v;
}

std::int64_t read_i64(std::istream& in) {
    std::int64_t v;
    read_raw(in, &v, sizeof(v));
    return v;
}

std::string read_str(std::istream& in) {
    const std::uint64_t n = read_u64(in);
    if (n > (1u << 20)) throw IoError("checkpoint: implausible string length");
    std::string s(n, '\0');
    read_raw(in, s.data(), n);
    return s;
}

std::vector<std::pair<std::string, Tensor>> read_tensors(std::istream& in) {
    const std::uint64_t count = read_u64(in);
    std::vector<std::pair<std::string, Tensor>> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string name = read_str(in);
        const std::uint64_t ndim = read_u64(in);
        if (ndim > 8) throw IoError("checkpoint: implausible tensor rank");
        std::vector<int> shape(ndim);
        for (auto& d : shape) d = static_cast<int>(read_i64(in));
        Tensor t(shape);
        read_raw(in, t.data(), static_cast<size_t>(t.size()) * sizeof(double));
        out.emplace_back(std::move(name), std::move(t));
    }
    return out;
}

}  // namespace

void save_checkpoint(const CheckpointBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint '" + path + "'");
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
    write_str(out, bundle.config.serialize());
    write_i64(out, bundle.epoch);
    write_i64(out, bundle.step);
    write_i64(out, bundle.g_t);
    write_i64(out, bundle.d_t);
    write_tensors(out, bundle.params);
    write_tensors(out, bundle.ema_shadow);
    write_tensors(out, bundle.g_opt);
    write_tensors(out, bundle.d_opt);
    if (!out) throw IoError("write failed for checkpoint '" + path + "'");
}

CheckpointBundle load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path + "'");
    char magic[8];
    read_raw(in, magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IncompatibleCheckpoint("not a checkpoint file: '" + path + "'");
    std::uint32_t version;
    read_raw(in, &version, sizeof(version));
    if (version != kVersion)
        throw IncompatibleCheckpoint("unsupported checkpoint version " +
                                     std::to_string(version));
    CheckpointBundle b;
    b.config = TrainConfig::parse(read_str(in));
    b.epoch = static_cast<int>(read_i64(in));
    b.step = read_i64(in);
    b.g_t = read_i64(in);
    b.d_t = read_i64(in);
    b.params = read_tensors(in);
    b.ema_shadow = read_tensors(in);
    b.g_opt = read_tensors(in);
    b.d_opt = read_tensors(in);
    return b;
}

Trainer::Trainer(TrainConfig cfg)
    : cfg_(std::move(cfg)),
      model_(cfg_.model_config(), cfg_.seed),
      g_opt_(model_.generator_side_params()),
      d_opt_(model_.discriminator_params()),
      ema_(make_ema(model_.generator_side_params(), cfg_.ema_decay)),
      rng_(cfg_.seed) {}

Trainer::Trainer(const CheckpointBundle& bundle)
    : cfg_(bundle.config),
      model_(cfg_.model_config(), cfg_.seed),
      g_opt_(model_.generator_side_params()),
      d_opt_(model_.discriminator_params()),
      ema_(make_ema(model_.generator_side_params(), cfg_.ema_decay)),
      rng_(cfg_.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(bundle.step)),
      epoch_(bundle.epoch),
      step_(bundle.step) {
    std::unordered_map<std::string, const Tensor*> by_name;
    for (const auto& [name, t] : bundle.params) by_name[name] = &t;
    for (const auto& [name, p] : model_.params().items()) {
        const auto it = by_name.find(name);
        if (it == by_name.end())
            throw IncompatibleCheckpoint("checkpoint lacks parameter '" + name + "'");
        if (!it->second->same_shape(p->value))
            throw IncompatibleCheckpoint("parameter shape mismatch at '" + name + "'");
        std::copy(it->second->data(), it->second->data() + it->second->size(),
                  p->value.data());
    }
    if (bundle.ema_shadow.size() != ema_.shadow.size())
        throw IncompatibleCheckpoint("EMA shadow count mismatch");
    for (size_t i = 0; i < ema_.shadow.size(); ++i) {
        if (bundle.ema_shadow[i].first != ema_.shadow[i].first ||
            !bundle.ema_shadow[i].second.same_shape(ema_.shadow[i].second))
            throw IncompatibleCheckpoint("EMA shadow mismatch at '" +
                                         ema_.shadow[i].first + "'");
        ema_.shadow[i].second = bundle.ema_shadow[i].second.clone();
    }
    g_opt_.restore(bundle.g_opt, bundle.g_t);
    d_opt_.restore(bundle.d_opt, bundle.d_t);
}

Trainer::StepPlan Trainer::plan_step(const std::vector<Sample>& batch) {
    if (batch.empty()) throw EmptyDataset("empty training batch");
    StepPlan plan;
    std::uniform_int_distribution<int> pick(0, kNumAgeGroups - 2);
    for (const Sample& s : batch) {
        if (s.group < 0 || s.group >= kNumAgeGroups)
            throw InvalidGroup("training sample group " + std::to_string(s.group));
        int t = pick(rng_);
        if (t >= s.group) ++t;
        plan.target_group.push_back(t);
        plan.z_target.push_back(make_age_code(t, cfg_.noise_scale, rng_, cfg_.code_block));
        plan.z_ref.push_back(make_age_code(s.group, cfg_.noise_scale, rng_, cfg_.code_block));
        plan.z_shape.push_back(
            s.group == 4 ? make_age_code(5, cfg_.noise_scale, rng_, cfg_.code_block)
                         : AgeCode{});
    }
    return plan;
}

double Trainer::substep_discriminator(const std::vector<Sample>& batch,
                                      const StepPlan& plan) {
    std::vector<ag::Var> real_logits, fake_logits, real_images;
    const Discriminator& disc = model_.discriminator();
    for (size_t i = 0; i < batch.size(); ++i) {
        ag::Var img = ag::constant(batch[i].image);
        real_images.push_back(img);
        real_logits.push_back(disc(img, ag::constant(plan.z_ref[i].values)));
        // The generator pass feeds the discriminator a detached image.
        Tensor fake = model_.forward(img, plan.z_target[i])->value;
        fake_logits.push_back(disc(ag::constant(fake), ag::constant(plan.z_target[i].values)));
    }
    ag::Var loss = losses::adversarial_d(real_logits, fake_logits);
    if (cfg_.r1_gamma != 0.0)
        loss = ag::add(loss, losses::r1_penalty(model_, real_images, plan.z_ref,
                                                cfg_.r1_gamma));
    const double value = ag::scalar_of(loss);
    if (!std::isfinite(value)) throw NonFiniteLoss("adversarial_d");
    ag::GradMap grads = ag::backward(loss);
    d_opt_.step(grads, lr_at(epoch_, cfg_));
    return value;
}

LossBreakdown Trainer::substep_generator(const std::vector<Sample>& batch,
                                         const StepPlan& plan) {
    const LossWeights& w = cfg_.weights;
    const bool need_target_pass = w.adv != 0.0 || w.id != 0.0 || w.cyc != 0.0;
    const bool shape_applies = cfg_.mode == ModelMode::disentangled && w.shape != 0.0;

    std::vector<ag::Var> fake_logits, id_terms, cyc_terms, rec_terms, shape_terms;
    for (size_t i = 0; i < batch.size(); ++i) {
        ag::Var img = ag::constant(batch[i].image);
        ag::Var gen_t;
        if (need_target_pass) gen_t = model_.forward(img, plan.z_target[i]);
        if (w.adv != 0.0)
            fake_logits.push_back(
                model_.discriminator()(gen_t, ag::constant(plan.z_target[i].values)));
        if (w.id != 0.0) id_terms.push_back(losses::identity(model_, img, gen_t));
        if (w.cyc != 0.0) cyc_terms.push_back(losses::cycle(model_, img, gen_t, plan.z_ref[i]));
        if (w.rec != 0.0) rec_terms.push_back(losses::reconstruction(model_, img, batch[i].group));
        if (shape_applies && batch[i].group == 4) {
            ag::Var gen_older = model_.forward(img, plan.z_shape[i]);
            shape_terms.push_back(losses::shape_reg(model_, img, gen_older, 4, 5));
        }
    }

    auto mean_of = [](const std::vector<ag::Var>& terms) -> ag::Var {
        if (terms.empty()) return {};
        ag::Var acc = terms[0];
        for (size_t i = 1; i < terms.size(); ++i) acc = ag::add(acc, terms[i]);
        return ag::smul(acc, 1.0 / static_cast<double>(terms.size()));
    };

    ag::Var adv = fake_logits.empty() ? ag::Var{} : losses::adversarial_g(fake_logits);
    ag::Var id = mean_of(id_terms);
    ag::Var cyc = mean_of(cyc_terms);
    ag::Var rec = mean_of(rec_terms);
    ag::Var shape = mean_of(shape_terms);

    auto value_of = [](const ag::Var& v) { return v ? ag::scalar_of(v) : 0.0; };
    LossBreakdown bd = losses::total(value_of(adv), value_of(rec), value_of(cyc),
                                     value_of(id), value_of(shape), w);

    ag::Var total = ag::constant(Tensor::zeros({1}));
    auto accumulate = [&](const ag::Var& term, double weight) {
        if (term && weight != 0.0) total = ag::add(total, ag::smul(term, weight));
    };
    accumulate(adv, w.adv);
    accumulate(rec, w.rec);
    accumulate(cyc, w.cyc);
    accumulate(id, w.id);
    accumulate(shape, w.shape);

    ag::GradMap grads = ag::backward(total);
    g_opt_.step(grads, lr_at(epoch_, cfg_));
    return bd;
}

void Trainer::update_ema() {
    ema_update(ema_, model_.generator_side_params(), cfg_.ema_decay);
}

StepStats Trainer::train_step(const std::vector<Sample>& batch) {
    const StepPlan plan = plan_step(batch);
    StepStats stats;
    stats.d_loss = substep_discriminator(batch, plan);
    stats.g = substep_generator(batch, plan);
    update_ema();
    ++step_;
    return stats;
}

void Trainer::train(const DatasetManifest& data, const LogFn& log) {
    if (data.entries.empty()) throw EmptyDataset("nothing to train on");
    // Tiny datasets are decoded once; larger ones are streamed per batch.
    const bool cache = data.entries.size() <= 256;
    std::vector<Tensor> cached;
    auto fetch = [&](size_t idx) -> Tensor {
        if (cache) {
            if (cached.empty()) {
                cached.reserve(data.entries.size());
                for (const auto& e : data.entries)
                    cached.push_back(
                        img::resize_bilinear(img::load_png(e.image_path), cfg_.image_size));
            }
            return cached[idx];
        }
        return img::resize_bilinear(img::load_png(data.entries[idx].image_path),
                                    cfg_.image_size);
    };

    std::vector<size_t> order(data.entries.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::bernoulli_distribution flip(0.5);

    for (; epoch_ < cfg_.epochs; ++epoch_) {
        std::shuffle(order.begin(), order.end(), rng_);
        for (size_t at = 0; at < order.size(); at += static_cast<size_t>(cfg_.batch_size)) {
            std::vector<Sample> batch;
            const size_t end = std::min(order.size(), at + static_cast<size_t>(cfg_.batch_size));
            for (size_t i = at; i < end; ++i) {
                Tensor image = fetch(order[i]);
                if (flip(rng_)) image = img::hflip(image);
                batch.push_back({std::move(image), data.entries[order[i]].age_group});
            }
            const StepStats stats = train_step(batch);
            if (log) log(epoch_, step_, stats);
        }
    }
}

CheckpointBundle Trainer::to_checkpoint() const {
    CheckpointBundle b;
    b.config = cfg_;
    b.epoch = epoch_;
    b.step = step_;
    b.g_t = g_opt_.t();
    b.d_t = d_opt_.t();
    for (const auto& [name, p] : model_.params().items())
        b.params.emplace_back(name, p->value.clone());
    for (const auto& [name, t] : ema_.shadow) b.ema_shadow.emplace_back(name, t.clone());
    b.g_opt = g_opt_.state();
    b.d_opt = d_opt_.state();
    return b;
}

}  // namespace lfs
