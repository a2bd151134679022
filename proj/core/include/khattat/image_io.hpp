#pragma once

#include <filesystem>

#include "khattat/raster.hpp"

namespace khattat {

/// Write coverage as an 8-bit grayscale PNG, black ink on white.
void write_png(const std::filesystem::path& path, const RasterImage& coverage);

/// Read a PNG (any colour type) back into coverage: dark pixels are ink.
RasterImage read_png(const std::filesystem::path& path);

}  // namespace khattat
