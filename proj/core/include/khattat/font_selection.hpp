#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "khattat/scorer.hpp"

namespace khattat {

struct FontEntry {
    std::string id;
    std::filesystem::path path;
    std::vector<float> embedding;  // unit length
};

/// Font embeddings, persisted as FONTDB1: "FONTDB1\n", u32 count, then per
/// entry a u32-length-prefixed id, a u32-length-prefixed path, u32 dim and
/// dim float32 values. All integers and floats little-endian.
class FontEmbeddingDB {
public:
    const std::vector<FontEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    std::size_t dim() const { return entries_.empty() ? 0 : entries_.front().embedding.size(); }

    /// Normalises `embedding`; throws FontError on a dimension mismatch,
    /// a duplicate id or a zero vector.
    void add(std::string id, std::filesystem::path path, std::span<const double> embedding);

    void save(const std::filesystem::path& file) const;
    static FontEmbeddingDB load(const std::filesystem::path& file);
    std::string serialize() const;
    static FontEmbeddingDB deserialize(std::string_view bytes);

private:
    std::vector<FontEntry> entries_;
};

struct FontChoice {
    std::string id;
    std::filesystem::path path;
    double similarity = 0.0;
};

/// Highest cosine similarity; ties go to the lexicographically smallest id.
FontChoice select_font(std::span<const double> prompt_embedding, const FontEmbeddingDB& db);

struct FontDbBuild {
    FontEmbeddingDB db;
    std::vector<std::string> warnings;  // one per skipped font
};

inline constexpr std::string_view kDefaultProbeText = "handgloves";

/// Render `probe_text` in each font at `size` px, embed it with the scorer
/// and normalise. Fonts that fail are skipped with a warning; throws
/// FontError only if none succeed.
FontDbBuild build_font_db(std::span<const std::filesystem::path> fonts, const Scorer& scorer,
                          std::string_view probe_text = kDefaultProbeText, int size = 512);

/// .ttf, .otf and .ttc files under `dir` (recursive), sorted.
std::vector<std::filesystem::path> discover_fonts(const std::filesystem::path& dir);

}  // namespace khattat
