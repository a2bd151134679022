#include "khattat/losses.hpp"

#include <cmath>

#include "khattat/acap.hpp"
#include "khattat/error.hpp"

namespace khattat {
namespace {

void check_region(const WordLayout& word, GlyphRange region) {
    if (region.first >= region.last || region.last > word.glyphs.size()) {
        throw OptimizerError("region [" + std::to_string(region.first) + ", " + std::to_string(region.last) +
                             ") is not inside a word of " + std::to_string(word.glyphs.size()) + " letters");
    }
}

LossEvaluation evaluate_terms(const WordLayout& word, GlyphRange region, const LossWeights& weights,
                              const Scorer& scorer, const TriangulationAngles& reference,
                              std::span<const double> original_features, int canvas,
                              const AugmentationSpec& augmentation, const FeatureExtractor& extractor,
                              const std::string& prompt) {
    check_region(word, region);
    LossEvaluation out;
    RenderTape tape;
    out.render = render(word, canvas, tape);

    const Augmentation aug(canvas, canvas, augmentation);
    const SdsResult sds = request_sds(scorer, aug.apply(out.render), prompt, std::int64_t(augmentation.seed));
    out.sds = sds.proxy;
    const RasterImage sds_pixels = aug.transpose(sds.gradient);

    const FeatureLoss ocr = extractor.compare(original_features, out.render);
    out.ocr = ocr.value;

    const std::vector<Vec2> points = gather_points(word, region);
    const AcapResult acap = acap_loss(reference, points);
    out.acap = acap.loss;
    out.total = weights.sds * out.sds + weights.ocr * out.ocr + weights.acap * out.acap;

    // Both pixel-space terms share one pass through the rasterizer.
    RasterImage upstream(canvas, canvas);
    for (std::size_t k = 0; k < upstream.size(); ++k) {
        upstream.pixels[k] = weights.sds * sds_pixels.pixels[k] + weights.ocr * ocr.gradient.pixels[k];
    }
    const std::vector<Vec2> pixel_grad = backpropagate(tape, upstream);
    const std::size_t offset = region_point_offset(word, region);
    out.gradient.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        out.gradient[i] = pixel_grad[offset + i] + acap.gradient[i] * weights.acap;
        if (!std::isfinite(out.gradient[i].x) || !std::isfinite(out.gradient[i].y)) {
            throw OptimizerError("non-finite gradient at region point " + std::to_string(i) + " (sds " +
                                 std::to_string(out.sds) + ", ocr " + std::to_string(out.ocr) + ", acap " +
                                 std::to_string(out.acap) + ")");
        }
    }
    return out;
}

}  // namespace

LossWeights LossWeights::for_region(std::size_t letters) { return LossWeights{1.0, 0.5 * double(letters), 0.5}; }

void LossWeights::validate() const {
    for (double w : {sds, ocr, acap}) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw OptimizerError("loss weights must be finite and non-negative");
    }
}

FeatureLoss ocr_loss(const RasterImage& original, const RasterImage& current, const FeatureExtractor& extractor) {
    if (!original.same_shape(current)) throw ImageError("ocr_loss: images differ in size");
    const std::vector<double> reference = extractor.extract(original);
    return extractor.compare(reference, current);
}

std::size_t region_point_offset(const WordLayout& word, GlyphRange region) {
    std::size_t offset = 0;
    for (std::size_t g = 0; g < region.first && g < word.glyphs.size(); ++g) offset += word.glyphs[g].point_count();
    return offset;
}

MorphObjective::MorphObjective(const WordLayout& initial, GlyphRange region, LossWeights weights,
                               const Scorer& scorer, const FeatureExtractor& extractor, std::string prompt,
                               int canvas)
    : region_(region), weights_(weights), scorer_(scorer), extractor_(extractor), prompt_(std::move(prompt)),
      canvas_(canvas) {
    check_region(initial, region);
    weights_.validate();
    if (canvas < 8) throw OptimizerError("canvas must be at least 8 pixels");
    const std::vector<Vec2> points = gather_points(initial, region);
    const auto edges = contour_edges(initial, region);
    reference_ = triangulate(points, edges);
    original_render_ = render(initial, canvas);
    original_features_ = extractor_.extract(original_render_);
}

LossEvaluation MorphObjective::evaluate(const WordLayout& word, const AugmentationSpec& augmentation) const {
    return evaluate_terms(word, region_, weights_, scorer_, reference_, original_features_, canvas_, augmentation,
                          extractor_, prompt_);
}

LossEvaluation total_gradient(const WordLayout& word, GlyphRange region, const LossWeights& weights,
                              const Scorer& scorer, const TriangulationAngles& reference,
                              const RasterImage& original_render, const AugmentationSpec& augmentation,
                              const FeatureExtractor& extractor, const std::string& prompt) {
    weights.validate();
    if (original_render.width != original_render.height) throw ImageError("renders must be square");
    const std::vector<double> features = extractor.extract(original_render);
    return evaluate_terms(word, region, weights, scorer, reference, features, original_render.width, augmentation,
                          extractor, prompt);
}

}  // namespace khattat
