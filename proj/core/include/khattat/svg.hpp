#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "khattat/bezier.hpp"

namespace khattat {

/// SVG document for the word on the 600-unit canvas: a white background
/// rect and one black, even-odd filled <path> per glyph whose subpaths are
/// the glyph's contours, written as cubic segments. Letter index,
/// codepoint and advance ride along as data- attributes so parse_svg can
/// rebuild the layout exactly. Throws GeometryError for an empty word.
std::string to_svg(const WordLayout& word);

void export_svg(const WordLayout& word, const std::filesystem::path& file);

/// Reads documents written by to_svg, and plain <path> elements using
/// M/L/H/V/C/Q/Z (absolute or relative); each <path> becomes one glyph.
/// Lines and quadratics are raised to cubics.
WordLayout parse_svg(std::string_view document);

WordLayout import_svg(const std::filesystem::path& file);

}  // namespace khattat
