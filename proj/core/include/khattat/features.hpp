#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "khattat/raster.hpp"

namespace khattat {

enum class ExtractorKind { builtin_filterbank, remote_ocr_encoder };

/// Mean squared feature distance and its gradient w.r.t. the compared image.
struct FeatureLoss {
    double value = 0.0;
    RasterImage gradient;  // d value / d coverage
};

/// Readability feature extractor. Works on coverage images (1 = ink).
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual ExtractorKind kind() const = 0;
    virtual std::size_t feature_dim(int width, int height) const = 0;
    virtual std::vector<double> extract(const RasterImage& image) const = 0;
    /// ||extract(current) - reference||^2 / feature_dim with its gradient.
    virtual FeatureLoss compare(std::span<const double> reference, const RasterImage& current) const = 0;
};

/// Fixed bank of oriented difference-of-Gaussian filters: for each blur
/// scale sigma and orientation theta the response is
/// B(x + sigma*u) - B(x - sigma*u), u = (cos theta, sin theta), squashed by
/// tanh and average-pooled. Deterministic, smooth and Lipschitz.
class FilterBankExtractor final : public FeatureExtractor {
public:
    struct Params {
        std::array<double, 3> sigmas{1.0, 2.0, 4.0};
        int orientations = 4;
        int pool = 4;
        double gain = 2.0;
    };

    FilterBankExtractor() = default;
    explicit FilterBankExtractor(Params params);

    ExtractorKind kind() const override { return ExtractorKind::builtin_filterbank; }
    std::size_t feature_dim(int width, int height) const override;
    std::vector<double> extract(const RasterImage& image) const override;
    FeatureLoss compare(std::span<const double> reference, const RasterImage& current) const override;

    const Params& params() const { return params_; }
    std::size_t filter_count() const { return params_.sigmas.size() * std::size_t(params_.orientations); }

private:
    Params params_;
};

}  // namespace khattat
