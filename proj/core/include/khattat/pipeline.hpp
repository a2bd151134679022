#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "khattat/error.hpp"
#include "khattat/font_selection.hpp"
#include "khattat/losses.hpp"
#include "khattat/optimizer.hpp"
#include "khattat/prompt_engine.hpp"
#include "khattat/region_selection.hpp"

namespace khattat {

/// Raised by run_pipeline; names the stage that failed. Usage errors are
/// bad configuration, everything else is a runtime failure.
class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& what, bool usage = false)
        : Error(stage + ": " + what), stage_(std::move(stage)), usage_(usage) {}
    const std::string& stage() const noexcept { return stage_; }
    bool usage() const noexcept { return usage_; }

private:
    std::string stage_;
    bool usage_;
};

struct PipelineConfig {
    std::string word;
    std::string concept_word;
    std::filesystem::path font_db;
    std::filesystem::path fonts_dir;
    /// Skips font selection when set.
    std::filesystem::path font;
    double lambda = 0.5;
    bool standardize = true;
    /// Overrides of the per-region defaults for the final morph.
    std::optional<double> sds_weight, ocr_weight, acap_weight;
    /// 1-based inclusive.
    std::optional<std::pair<std::size_t, std::size_t>> fixed_region;
    std::optional<std::size_t> max_region_len;
    bool offline_prompts = false;
    std::filesystem::path prompt_table;
    /// Which of the three object prompts to morph toward.
    int prompt_index = 0;
    std::filesystem::path output_dir = "out";
    std::uint64_t seed = 0;
    int iterations = 500;
    int light_iterations = 100;
    /// Defaults to the mock target's width, else 512.
    std::optional<int> canvas;
    bool augment = true;

    /// Throws PipelineError(stage "config", usage) on invalid settings.
    void validate() const;
};

struct PipelineResult {
    PromptSet prompts;
    FontChoice font;
    RegionCandidate region;
    std::vector<RegionCandidate> candidates;  // empty for a fixed region
    RunResult morph;
    std::filesystem::path svg;
    std::filesystem::path png;
};

/// prompts -> font -> layout -> regions -> morph -> export. Files go to
/// output_dir as {word}.{stage}.{ext}; the final outline is {word}.svg and
/// {word}.png. Progress lines go to `log`.
PipelineResult run_pipeline(const PipelineConfig& config, const Scorer& scorer, std::ostream& log);

/// Mock guidance target: the word with every letter of `region` replaced
/// by a ring of the same ink area, centred on the letter, whose outer
/// radius is the mean half-extent of the letter's control box (a disc when
/// the area allows no hole).
RasterImage circle_target(const WordLayout& word, GlyphRange region, int canvas);

}  // namespace khattat
