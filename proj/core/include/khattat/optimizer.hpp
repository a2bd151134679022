#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "khattat/bezier.hpp"
#include "khattat/error.hpp"
#include "khattat/features.hpp"
#include "khattat/losses.hpp"
#include "khattat/scorer.hpp"

namespace khattat {

/// Linear warmup to base_lr, then cosine decay to final_fraction * base_lr.
struct LearningRateSchedule {
    double base_lr = 1.0;
    int warmup = 50;
    double final_fraction = 0.1;

    double at(int iteration, int total) const;
};

struct RunConfig {
    int iterations = 500;
    /// Light runs (region scoring) write no files.
    bool light = false;
    LearningRateSchedule schedule;
    double beta1 = 0.9;
    double beta2 = 0.9;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    /// Defaults to LossWeights::for_region(region length).
    std::optional<LossWeights> weights;
    int canvas = 512;
    bool augment = true;
    double perspective_jitter = 0.05;
    double crop_fraction = 0.85;
    int checkpoint_interval = 50;
    /// Trace and checkpoints go here as {stem}.trace.tsv and
    /// {stem}.iter-NNNN.ckpt; empty means keep everything in memory.
    std::filesystem::path output_dir;
    std::string stem = "run";

    void validate() const;
};

struct TraceRecord {
    int iteration = 0;
    double sds = 0.0;
    double ocr = 0.0;
    double acap = 0.0;
    double total = 0.0;
    double grad_norm = 0.0;
    double learning_rate = 0.0;
};

/// Per-iteration losses, measured before that iteration's update, with a
/// key=value header describing the run.
struct RunTrace {
    std::vector<std::pair<std::string, std::string>> header;
    std::vector<TraceRecord> records;

    std::optional<std::string> header_value(std::string_view key) const;
    std::string to_tsv() const;
    static RunTrace from_tsv(std::string_view text);
    void save(const std::filesystem::path& file) const;
    static RunTrace load(const std::filesystem::path& file);
};

/// Optimizer state after `iteration` completed updates.
struct Checkpoint {
    int iteration = 0;
    GlyphRange region;
    std::vector<Vec2> points;  // region control points
    std::vector<Vec2> m, v;    // Adam moments

    /// "CKPT1\n", u32 iteration, u32 first glyph, u32 last glyph, u32 point
    /// count, float32 (x, y) per point; then a float64 trailer with the
    /// exact points and both moment buffers so a resumed run is bit-identical.
    std::string serialize() const;
    static Checkpoint deserialize(std::string_view bytes);
    void save(const std::filesystem::path& file) const;
    static Checkpoint load(const std::filesystem::path& file);
};

struct RunResult {
    WordLayout word;
    RunTrace trace;
    std::vector<std::filesystem::path> checkpoints;
    LossWeights weights;
};

/// A run that stopped early; carries what was done so far.
class RunAborted : public OptimizerError {
public:
    RunAborted(const std::string& what, RunTrace trace, std::optional<std::filesystem::path> last_checkpoint)
        : OptimizerError(what), trace_(std::move(trace)), checkpoint_(std::move(last_checkpoint)) {}
    const RunTrace& trace() const noexcept { return trace_; }
    const std::optional<std::filesystem::path>& last_checkpoint() const noexcept { return checkpoint_; }

private:
    RunTrace trace_;
    std::optional<std::filesystem::path> checkpoint_;
};

/// Subdivide the region's glyphs to their default point budget.
WordLayout prepare_region(const WordLayout& word, GlyphRange region);

/// Seed of the augmentation drawn at `iteration`.
std::uint64_t augmentation_seed(std::uint64_t run_seed, int iteration);

/// Adam on the region's control points. `initial` fixes the reference
/// triangulation and the readability reference; pass `resume` to continue
/// from a checkpoint taken on the same configuration.
RunResult run(const WordLayout& initial, GlyphRange region, const std::string& prompt, const RunConfig& config,
              const Scorer& scorer, const FeatureExtractor& extractor, const Checkpoint* resume = nullptr);

/// Same, with the built-in readability extractor.
RunResult run(const WordLayout& initial, GlyphRange region, const std::string& prompt, const RunConfig& config,
              const Scorer& scorer);

}  // namespace khattat
