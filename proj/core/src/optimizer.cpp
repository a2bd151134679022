#include "khattat/optimizer.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "khattat/augment.hpp"
#include "khattat/text_format.hpp"

namespace khattat {
namespace {

constexpr std::string_view kCheckpointMagic = "CKPT1\n";

void put_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

template <typename T, typename U>
void put_bits(std::string& out, T value) {
    U u;
    std::memcpy(&u, &value, sizeof u);
    for (std::size_t b = 0; b < sizeof u; ++b) out.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename U>
    U bits() {
        if (bytes_.size() - pos_ < sizeof(U)) throw OptimizerError("checkpoint is truncated");
        U u = 0;
        for (std::size_t b = 0; b < sizeof(U); ++b) u |= U(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
        pos_ += sizeof(U);
        return u;
    }
    std::uint32_t u32() { return bits<std::uint32_t>(); }
    float f32() {
        const auto u = bits<std::uint32_t>();
        float f;
        std::memcpy(&f, &u, 4);
        return f;
    }
    double f64() {
        const auto u = bits<std::uint64_t>();
        double d;
        std::memcpy(&d, &u, 8);
        return d;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& file, const char* what) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw OptimizerError(std::string("cannot read ") + what + " " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& file, const std::string& bytes, const char* what) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw OptimizerError(std::string("cannot write ") + what + " " + file.string());
}

std::string region_text(GlyphRange r) { return std::to_string(r.first + 1) + ".." + std::to_string(r.last); }

std::string checkpoint_name(const RunConfig& c, int iteration) {
    std::string n = std::to_string(iteration);
    if (n.size() < 4) n.insert(0, 4 - n.size(), '0');
    return c.stem + ".iter-" + n + ".ckpt";
}

}  // namespace

double LearningRateSchedule::at(int iteration, int total) const {
    if (warmup > 0 && iteration < warmup) return base_lr * double(iteration + 1) / double(warmup);
    const int span = std::max(1, total - warmup);
    const double progress = std::clamp(double(iteration - warmup) / double(span), 0.0, 1.0);
    return base_lr * (final_fraction + (1.0 - final_fraction) * 0.5 * (1.0 + std::cos(M_PI * progress)));
}

void RunConfig::validate() const {
    if (iterations < 1) throw OptimizerError("iterations must be at least 1");
    if (!(schedule.base_lr > 0.0)) throw OptimizerError("base learning rate must be positive");
    if (schedule.warmup < 0 || !(schedule.final_fraction >= 0.0 && schedule.final_fraction <= 1.0)) {
        throw OptimizerError("learning-rate warmup must be >= 0 and the final fraction in [0, 1]");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
        throw OptimizerError("Adam betas must be in [0, 1) and epsilon positive");
    }
    if (canvas < 8) throw OptimizerError("canvas must be at least 8 pixels");
    if (checkpoint_interval < 1) throw OptimizerError("checkpoint interval must be at least 1");
    if (weights) weights->validate();
    if (augment) AugmentationSpec{0, perspective_jitter, crop_fraction}.validate();
}

std::optional<std::string> RunTrace::header_value(std::string_view key) const {
    for (const auto& [k, v] : header) {
        if (k == key) return v;
    }
    return std::nullopt;
}

std::string RunTrace::to_tsv() const {
    std::string out;
    for (const auto& [k, v] : header) out += "# " + k + "=" + v + "\n";
    out += "iteration\tsds\tocr\tacap\ttotal\tgrad_norm\tlr\n";
    for (const TraceRecord& r : records) {
        out += std::to_string(r.iteration);
        for (double v : {r.sds, r.ocr, r.acap, r.total, r.grad_norm, r.learning_rate}) out += "\t" + format_double(v);
        out += "\n";
    }
    return out;
}

RunTrace RunTrace::from_tsv(std::string_view text) {
    RunTrace t;
    std::istringstream in{std::string(text)};
    std::string line;
    bool columns = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.starts_with("# ")) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw OptimizerError("trace header line without '=': " + line);
            t.header.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
            continue;
        }
        if (!columns) {
            if (!line.starts_with("iteration\t")) throw OptimizerError("trace is missing its column line");
            columns = true;
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream row(line);
        for (std::string cell; std::getline(row, cell, '\t');) cells.push_back(cell);
        if (cells.size() != 7) throw OptimizerError("trace row has " + std::to_string(cells.size()) + " fields: " + line);
        TraceRecord r;
        r.iteration = std::stoi(cells[0]);
        double* fields[] = {&r.sds, &r.ocr, &r.acap, &r.total, &r.grad_norm, &r.learning_rate};
        for (std::size_t i = 0; i < 6; ++i) {
            const auto v = parse_double(cells[i + 1]);
            if (!v) throw OptimizerError("trace field is not a number: " + cells[i + 1]);
            *fields[i] = *v;
        }
        t.records.push_back(r);
    }
    return t;
}

void RunTrace::save(const std::filesystem::path& file) const { write_file(file, to_tsv(), "trace"); }

RunTrace RunTrace::load(const std::filesystem::path& file) { return from_tsv(read_file(file, "trace")); }

std::string Checkpoint::serialize() const {
    std::string out(kCheckpointMagic);
    put_u32(out, std::uint32_t(iteration));
    put_u32(out, std::uint32_t(region.first));
    put_u32(out, std::uint32_t(region.last));
    put_u32(out, std::uint32_t(points.size()));
    for (Vec2 p : points) {
        put_bits<float, std::uint32_t>(out, static_cast<float>(p.x));
        put_bits<float, std::uint32_t>(out, static_cast<float>(p.y));
    }
    for (const auto* buf : {&points, &m, &v}) {
        for (Vec2 p : *buf) {
            put_bits<double, std::uint64_t>(out, p.x);
            put_bits<double, std::uint64_t>(out, p.y);
        }
    }
    return out;
}

Checkpoint Checkpoint::deserialize(std::string_view bytes) {
    if (!bytes.starts_with(kCheckpointMagic)) throw OptimizerError("not a checkpoint (missing CKPT1 header)");
    Reader in(bytes.substr(kCheckpointMagic.size()));
    Checkpoint c;
    c.iteration = int(in.u32());
    c.region.first = in.u32();
    c.region.last = in.u32();
    const std::uint32_t n = in.u32();
    std::vector<Vec2> rounded(n);
    for (Vec2& p : rounded) {
        p.x = in.f32();
        p.y = in.f32();
    }
    if (in.done()) {
        // Points only: resume from the float32 values with fresh moments.
        c.points = rounded;
        c.m.assign(n, Vec2{});
        c.v.assign(n, Vec2{});
        return c;
    }
    for (auto* buf : {&c.points, &c.m, &c.v}) {
        buf->resize(n);
        for (Vec2& p : *buf) {
            p.x = in.f64();
            p.y = in.f64();
        }
    }
    if (!in.done()) throw OptimizerError("checkpoint has trailing bytes");
    return c;
}

void Checkpoint::save(const std::filesystem::path& file) const { write_file(file, serialize(), "checkpoint"); }

Checkpoint Checkpoint::load(const std::filesystem::path& file) { return deserialize(read_file(file, "checkpoint")); }

WordLayout prepare_region(const WordLayout& word, GlyphRange region) {
    WordLayout out = word;
    for (std::size_t g = region.first; g < region.last && g < out.glyphs.size(); ++g) {
        out.glyphs[g] = subdivide_to_budget(out.glyphs[g], default_point_budget(out.glyphs[g]));
    }
    return out;
}

std::uint64_t augmentation_seed(std::uint64_t run_seed, int iteration) {
    // splitmix64 of the pair
    std::uint64_t z = run_seed * 0x9E3779B97F4A7C15ULL + std::uint64_t(iteration) + 0x632BE59BD9B4E019ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RunResult run(const WordLayout& initial, GlyphRange region, const std::string& prompt, const RunConfig& config,
              const Scorer& scorer, const FeatureExtractor& extractor, const Checkpoint* resume) {
    config.validate();
    if (region.first >= region.last || region.last > initial.glyphs.size()) {
        throw OptimizerError("region " + region_text(region) + " is outside a word of " +
                             std::to_string(initial.glyphs.size()) + " letters");
    }
    for (std::size_t g = region.first; g < region.last; ++g) {
        if (!initial.glyphs[g].morphable) throw OptimizerError("letter " + std::to_string(g + 1) + " has no outline to morph");
    }
    RunResult result;
    result.weights = config.weights.value_or(LossWeights::for_region(region.size()));
    const MorphObjective objective(initial, region, result.weights, scorer, extractor, prompt, config.canvas);

    result.word = initial;
    std::vector<Vec2> points = gather_points(initial, region);
    std::vector<Vec2> m(points.size()), v(points.size());
    int start = 0;
    if (resume) {
        if (resume->region.first != region.first || resume->region.last != region.last ||
            resume->points.size() != points.size() || resume->m.size() != points.size() ||
            resume->v.size() != points.size()) {
            throw OptimizerError("checkpoint does not match this run's region");
        }
        if (resume->iteration < 0 || resume->iteration > config.iterations) {
            throw OptimizerError("checkpoint iteration is outside the run");
        }
        points = resume->points;
        m = resume->m;
        v = resume->v;
        start = resume->iteration;
        scatter_points(result.word, region, points);
    }

    RunTrace& trace = result.trace;
    const auto& w = result.weights;
    trace.header = {{"sds_weight", format_double(w.sds)},
                    {"ocr_weight", format_double(w.ocr)},
                    {"acap_weight", format_double(w.acap)},
                    {"region", region_text(region)},
                    {"letters", std::to_string(region.size())},
                    {"iterations", std::to_string(config.iterations)},
                    {"seed", std::to_string(config.seed)},
                    {"canvas", std::to_string(config.canvas)},
                    {"base_lr", format_double(config.schedule.base_lr)},
                    {"scorer", scorer.name()},
                    {"prompt", prompt}};
    if (resume) trace.header.emplace_back("resumed_from", std::to_string(start));

    const bool files = !config.light && !config.output_dir.empty();
    if (files) std::filesystem::create_directories(config.output_dir);
    std::optional<std::filesystem::path> last_checkpoint;
    auto abort = [&](const std::string& why) {
        if (files) trace.save(config.output_dir / (config.stem + ".trace.tsv"));
        throw RunAborted(why, trace, last_checkpoint);
    };

    for (int it = start; it < config.iterations; ++it) {
        AugmentationSpec aug{augmentation_seed(config.seed, it), config.perspective_jitter, config.crop_fraction};
        if (!config.augment) {
            aug.perspective_jitter = 0.0;
            aug.crop_fraction = 1.0;
        }
        LossEvaluation e;
        try {
            e = objective.evaluate(result.word, aug);
        } catch (const ScorerError& err) {
            abort("iteration " + std::to_string(it) + ": scorer failed: " + err.what());
        } catch (const OptimizerError& err) {
            abort("iteration " + std::to_string(it) + ": " + err.what());
        }
        double g2 = 0.0;
        for (Vec2 g : e.gradient) g2 += norm2(g);

        const double lr = config.schedule.at(it, config.iterations);
        const double c1 = 1.0 - std::pow(config.beta1, it + 1);
        const double c2 = 1.0 - std::pow(config.beta2, it + 1);
        for (std::size_t i = 0; i < points.size(); ++i) {
            const Vec2 g = e.gradient[i];
            m[i] = m[i] * config.beta1 + g * (1.0 - config.beta1);
            v[i] = v[i] * config.beta2 + Vec2{g.x * g.x, g.y * g.y} * (1.0 - config.beta2);
            points[i].x -= lr * (m[i].x / c1) / (std::sqrt(v[i].x / c2) + config.epsilon);
            points[i].y -= lr * (m[i].y / c1) / (std::sqrt(v[i].y / c2) + config.epsilon);
        }
        scatter_points(result.word, region, points);
        trace.records.push_back({it, e.sds, e.ocr, e.acap, e.total, std::sqrt(g2), lr});

        if (files && (it + 1) % config.checkpoint_interval == 0) {
            const Checkpoint c{it + 1, region, points, m, v};
            const auto path = config.output_dir / checkpoint_name(config, it + 1);
            c.save(path);
            last_checkpoint = path;
            result.checkpoints.push_back(path);
        }
    }
    if (files) trace.save(config.output_dir / (config.stem + ".trace.tsv"));
    return result;
}

RunResult run(const WordLayout& initial, GlyphRange region, const std::string& prompt, const RunConfig& config,
              const Scorer& scorer) {
    const FilterBankExtractor extractor;
    return run(initial, region, prompt, config, scorer, extractor);
}

}  // namespace khattat
