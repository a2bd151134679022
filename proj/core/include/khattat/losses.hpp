#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "khattat/augment.hpp"
#include "khattat/bezier.hpp"
#include "khattat/features.hpp"
#include "khattat/raster.hpp"
#include "khattat/scorer.hpp"
#include "khattat/triangulation.hpp"

namespace khattat {

struct LossWeights {
    double sds = 1.0;
    double ocr = 0.5;
    double acap = 0.5;

    /// Defaults for a morph region of `letters` glyphs: OCR weight 0.5 per letter.
    static LossWeights for_region(std::size_t letters);
    void validate() const;
};

/// ||E(original) - E(current)||^2 / feature_dim and its gradient w.r.t. current.
FeatureLoss ocr_loss(const RasterImage& original, const RasterImage& current, const FeatureExtractor& extractor);

/// Per-term values and the weighted gradient on the region's control points.
struct LossEvaluation {
    std::vector<Vec2> gradient;  // gather_points(word, region) order
    double sds = 0.0;            // scorer proxy, see SdsResult
    double ocr = 0.0;
    double acap = 0.0;
    double total = 0.0;          // weighted sum
    RasterImage render;          // un-augmented render of the current word
};

/// The composite objective of one morph run. Fixed at construction: the
/// reference triangulation of the region and the features of the
/// iteration-0 render.
class MorphObjective {
public:
    MorphObjective(const WordLayout& initial, GlyphRange region, LossWeights weights, const Scorer& scorer,
                   const FeatureExtractor& extractor, std::string prompt, int canvas);

    /// Semantic guidance sees the augmented render; readability sees the
    /// canonical one. Glyphs outside the region get no gradient.
    LossEvaluation evaluate(const WordLayout& word, const AugmentationSpec& augmentation) const;

    GlyphRange region() const { return region_; }
    const LossWeights& weights() const { return weights_; }
    const TriangulationAngles& reference() const { return reference_; }
    const RasterImage& original_render() const { return original_render_; }
    const std::vector<double>& original_features() const { return original_features_; }
    int canvas() const { return canvas_; }

private:
    GlyphRange region_;
    LossWeights weights_;
    const Scorer& scorer_;
    const FeatureExtractor& extractor_;
    std::string prompt_;
    int canvas_;
    TriangulationAngles reference_;
    RasterImage original_render_;
    std::vector<double> original_features_;
};

/// One-shot form of MorphObjective::evaluate with the pieces supplied by
/// the caller.
LossEvaluation total_gradient(const WordLayout& word, GlyphRange region, const LossWeights& weights,
                              const Scorer& scorer, const TriangulationAngles& reference,
                              const RasterImage& original_render, const AugmentationSpec& augmentation,
                              const FeatureExtractor& extractor, const std::string& prompt);

/// Index of the region's first point within gather_points(word, all glyphs).
std::size_t region_point_offset(const WordLayout& word, GlyphRange region);

}  // namespace khattat
