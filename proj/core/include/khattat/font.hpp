#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "khattat/bezier.hpp"

namespace khattat {

enum class ShapingMode {
    /// Map each codepoint through the font's cmap (isolated forms only).
    simple,
    /// `text` is a list of glyph ids produced by an external shaper,
    /// separated by spaces or commas, in logical order.
    preshaped_ids,
};

/// Outline of one glyph in font units (y up), quadratic pieces already
/// elevated to cubic.
struct FontOutline {
    std::vector<std::vector<BezierSegment>> contours;
};

/// Read-only view of a TrueType (glyf-flavoured) font file.
class FontFace {
public:
    static FontFace load(const std::filesystem::path& path);
    static FontFace from_bytes(std::vector<std::uint8_t> bytes, std::string name = "<memory>");

    unsigned units_per_em() const { return units_per_em_; }
    int ascender() const { return ascender_; }
    int descender() const { return descender_; }
    unsigned glyph_count() const { return num_glyphs_; }
    const std::string& name() const { return name_; }

    /// Glyph index for a codepoint, 0 (.notdef) if unmapped.
    unsigned glyph_index(char32_t codepoint) const;
    unsigned advance_width(unsigned glyph) const;
    FontOutline outline(unsigned glyph) const;

private:
    struct RawPoint {
        double x, y;
        bool on_curve;
    };
    using RawContour = std::vector<RawPoint>;

    std::span<const std::uint8_t> table(std::uint32_t tag) const;
    std::vector<RawContour> raw_outline(unsigned glyph, int depth) const;
    unsigned lookup_format4(std::span<const std::uint8_t> sub, char32_t cp) const;
    unsigned lookup_format12(std::span<const std::uint8_t> sub, char32_t cp) const;

    std::vector<std::uint8_t> data_;
    std::string name_;
    std::size_t font_offset_ = 0;
    unsigned units_per_em_ = 0;
    int ascender_ = 0;
    int descender_ = 0;
    unsigned num_glyphs_ = 0;
    unsigned num_hmetrics_ = 0;
    int index_to_loc_format_ = 0;
    std::size_t cmap_subtable_ = 0;
    int cmap_format_ = 0;
};

/// Decode UTF-8 into codepoints; throws FontError on malformed input.
std::u32string decode_utf8(std::string_view text);

bool is_right_to_left(char32_t codepoint);

/// Load the outlines of `text` and place them on the canvas: one GlyphPath
/// per letter in logical order, scaled so the word spans at most 90% of the
/// canvas and centred. Glyphs without ink are flagged non-morphable.
WordLayout load_glyph_outlines(const std::filesystem::path& font_file, std::string_view text,
                               ShapingMode mode = ShapingMode::simple,
                               std::optional<Script> script = std::nullopt);

WordLayout layout_glyphs(const FontFace& face, std::span<const unsigned> glyph_ids,
                         std::span<const char32_t> codepoints, Script script);

}  // namespace khattat
