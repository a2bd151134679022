#include "khattat/region_selection.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "khattat/error.hpp"
#include "khattat/features.hpp"
#include "khattat/losses.hpp"
#include "khattat/raster.hpp"
#include "khattat/text_format.hpp"

namespace khattat {

std::string RegionCandidate::label() const { return std::to_string(start) + ".." + std::to_string(end); }

std::vector<RegionCandidate> enumerate_regions(std::size_t n, std::optional<std::size_t> max_len) {
    if (n == 0) throw SelectionError("cannot enumerate regions of an empty word");
    if (max_len && *max_len == 0) throw SelectionError("maximum region length must be at least 1");
    std::vector<RegionCandidate> out;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = i; j <= n && (!max_len || j - i + 1 <= *max_len); ++j) {
            RegionCandidate c;
            c.start = i;
            c.end = j;
            out.push_back(c);
        }
    }
    return out;
}

void RegionScoring::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw SelectionError("lambda must be in [0, 1], got " + format_double(lambda));
    if (light_iterations < 1) throw SelectionError("light runs need at least 1 iteration");
    if (max_len && *max_len == 0) throw SelectionError("maximum region length must be at least 1");
}

RegionCandidate score_region(const WordLayout& word, RegionCandidate candidate, const std::string& prompt,
                             const Scorer& scorer, const RegionScoring& options) {
    options.validate();
    if (candidate.start < 1 || candidate.start > candidate.end || candidate.end > word.glyphs.size()) {
        throw SelectionError("region " + candidate.label() + " is outside a word of " +
                             std::to_string(word.glyphs.size()) + " letters");
    }
    const GlyphRange range = candidate.range();
    for (std::size_t g = range.first; g < range.last; ++g) {
        if (!word.glyphs[g].morphable || word.glyphs[g].contours.empty()) {
            candidate.morphable = false;
            candidate.raw_readability = candidate.raw_clip = 0.0;
            candidate.readability = candidate.clip = 0.0;
            candidate.composite = -std::numeric_limits<double>::infinity();
            return candidate;
        }
    }

    RunConfig config = options.run;
    config.light = true;
    config.iterations = options.light_iterations;
    config.weights.reset();
    const WordLayout prepared = prepare_region(word, range);
    const FilterBankExtractor extractor;
    const RunResult result = run(prepared, range, prompt, config, scorer, extractor);

    const RasterImage original = render(prepared, config.canvas);
    const RasterImage final_render = render(result.word, config.canvas);
    candidate.morphable = true;
    candidate.raw_readability = -ocr_loss(original, final_render, extractor).value;
    candidate.raw_clip = request_clip_score(scorer, final_render, prompt);
    candidate.readability = candidate.raw_readability;
    candidate.clip = candidate.raw_clip;
    candidate.composite = options.lambda * candidate.readability + (1.0 - options.lambda) * candidate.clip;
    return candidate;
}

void combine_scores(std::vector<RegionCandidate>& candidates, double lambda, bool standardize) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw SelectionError("lambda must be in [0, 1], got " + format_double(lambda));
    auto zscore = [&](double RegionCandidate::*raw, double RegionCandidate::*out) {
        double sum = 0.0, n = 0.0;
        for (const auto& c : candidates) {
            if (c.morphable) sum += c.*raw, n += 1.0;
        }
        const double mean = n > 0.0 ? sum / n : 0.0;
        double var = 0.0;
        for (const auto& c : candidates) {
            if (c.morphable) var += (c.*raw - mean) * (c.*raw - mean);
        }
        const double sd = n > 0.0 ? std::sqrt(var / n) : 0.0;
        for (auto& c : candidates) {
            if (!c.morphable) continue;
            c.*out = !standardize ? c.*raw : (sd > 0.0 ? (c.*raw - mean) / sd : 0.0);
        }
    };
    zscore(&RegionCandidate::raw_readability, &RegionCandidate::readability);
    zscore(&RegionCandidate::raw_clip, &RegionCandidate::clip);
    for (auto& c : candidates) {
        c.composite = c.morphable ? lambda * c.readability + (1.0 - lambda) * c.clip
                                  : -std::numeric_limits<double>::infinity();
    }
}

std::vector<RegionCandidate> score_regions(const WordLayout& word, const std::string& prompt, const Scorer& scorer,
                                           const RegionScoring& options) {
    options.validate();
    std::vector<RegionCandidate> candidates = enumerate_regions(word.glyphs.size(), options.max_len);

    // Each light run owns its state; results land in their enumeration slot.
    std::vector<std::exception_ptr> errors(candidates.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < candidates.size(); i = next++) {
            try {
                candidates[i] = score_region(word, candidates[i], prompt, scorer, options);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, candidates.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    combine_scores(candidates, options.lambda, options.standardize);
    return candidates;
}

RegionCandidate select_region(std::span<const RegionCandidate> scored) {
    const RegionCandidate* best = nullptr;
    for (const auto& c : scored) {
        if (!std::isfinite(c.composite)) continue;
        if (!best || c.composite > best->composite ||
            (c.composite == best->composite &&
             (c.length() < best->length() || (c.length() == best->length() && c.start < best->start)))) {
            best = &c;
        }
    }
    if (!best) throw SelectionError("no candidate region has a finite score (no morphable letters?)");
    return *best;
}

std::string region_report_tsv(std::span<const RegionCandidate> scored) {
    std::string out = "region\treadability\tclip\tcomposite\traw_readability\traw_clip\n";
    for (const auto& c : scored) {
        out += c.label();
        for (double v : {c.readability, c.clip, c.composite, c.raw_readability, c.raw_clip}) out += "\t" + format_double(v);
        out += "\n";
    }
    return out;
}

}  // namespace khattat
