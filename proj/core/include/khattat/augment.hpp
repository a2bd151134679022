#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "khattat/raster.hpp"

namespace khattat {

/// Random view transform applied to guidance renders: a perspective warp
/// that moves each image corner by up to `perspective_jitter` of the image
/// size, followed by a square crop whose side is drawn uniformly from
/// [crop_fraction, 1] of the image and resized back to full resolution.
struct AugmentationSpec {
    std::uint64_t seed = 0;
    double perspective_jitter = 0.05;  // <= 0.1
    double crop_fraction = 0.85;       // in [0.7, 1.0]

    void validate() const;
};

/// A sampled augmentation: a fixed linear map from source to output pixels
/// (bilinear taps), so gradients are its transpose.
class Augmentation {
public:
    Augmentation(int width, int height, const AugmentationSpec& spec);

    RasterImage apply(const RasterImage& source) const;
    /// Transpose of apply(): pulls an output-space gradient back to the source.
    RasterImage transpose(const RasterImage& upstream) const;

    bool identity() const { return identity_; }

private:
    struct Tap {
        std::array<std::int32_t, 4> index;
        std::array<double, 4> weight;
    };
    int width_, height_;
    bool identity_ = false;
    std::vector<Tap> taps_;
};

RasterImage augment(const RasterImage& image, const AugmentationSpec& spec);

}  // namespace khattat
