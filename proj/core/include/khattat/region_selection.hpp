#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "khattat/bezier.hpp"
#include "khattat/optimizer.hpp"
#include "khattat/scorer.hpp"

namespace khattat {

/// A contiguous run of letters, 1-based and inclusive.
struct RegionCandidate {
    std::size_t start = 1;
    std::size_t end = 1;
    /// Combined values; standardized across the word's candidates unless
    /// that is switched off, in which case they equal the raw ones.
    double readability = 0.0;
    double clip = 0.0;
    double composite = 0.0;
    double raw_readability = 0.0;  // -L_OCR(final vs original)
    double raw_clip = 0.0;
    bool morphable = true;

    std::size_t length() const { return end - start + 1; }
    GlyphRange range() const { return {start - 1, end}; }
    /// "i..j"
    std::string label() const;
};

/// Every contiguous (i, j) with j - i + 1 <= max_len, lexicographic.
std::vector<RegionCandidate> enumerate_regions(std::size_t n, std::optional<std::size_t> max_len = std::nullopt);

struct RegionScoring {
    double lambda = 0.5;
    /// z-score readability and clip across candidates before combining.
    bool standardize = true;
    int light_iterations = 100;
    /// Base configuration of the light runs; iterations and light are
    /// overridden, weights follow the candidate's length.
    RunConfig run;
    std::optional<std::size_t> max_len;

    void validate() const;
};

/// Light morph of one candidate, then its raw readability and clip
/// scores; composite uses the raw values. Candidates containing a letter
/// without ink are returned unscored with composite -inf.
RegionCandidate score_region(const WordLayout& word, RegionCandidate candidate, const std::string& prompt,
                             const Scorer& scorer, const RegionScoring& options);

/// Recompute readability, clip and composite from the raw scores. Only
/// finite candidates enter the mean and deviation; a zero deviation maps
/// every value to 0.
void combine_scores(std::vector<RegionCandidate>& candidates, double lambda, bool standardize);

/// Score all candidates of the word (concurrently) and combine them.
std::vector<RegionCandidate> score_regions(const WordLayout& word, const std::string& prompt, const Scorer& scorer,
                                           const RegionScoring& options);

/// Highest composite; ties go to the shorter region, then the smaller start.
RegionCandidate select_region(std::span<const RegionCandidate> scored);

/// Tab-separated report: region, readability, clip, composite, then the
/// raw scores.
std::string region_report_tsv(std::span<const RegionCandidate> scored);

}  // namespace khattat
