#include "khattat/font_selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "khattat/error.hpp"
#include "khattat/font.hpp"
#include "khattat/raster.hpp"

namespace khattat {
namespace {

constexpr std::string_view kMagic = "FONTDB1\n";

void put_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) v |= std::uint32_t(static_cast<unsigned char>(bytes_[pos_ + std::size_t(b)])) << (8 * b);
        pos_ += 4;
        return v;
    }
    std::string text() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(bytes_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    float f32() {
        const std::uint32_t u = u32();
        float f;
        std::memcpy(&f, &u, 4);
        return f;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw FontError("font database is truncated");
    }
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

void FontEmbeddingDB::add(std::string id, std::filesystem::path path, std::span<const double> embedding) {
    if (embedding.empty()) throw FontError("font '" + id + "' has an empty embedding");
    if (!entries_.empty() && embedding.size() != dim()) {
        throw FontError("font '" + id + "' embedding has dimension " + std::to_string(embedding.size()) + ", expected " +
                        std::to_string(dim()));
    }
    for (const auto& e : entries_) {
        if (e.id == id) throw FontError("duplicate font id '" + id + "'");
    }
    double n2 = 0.0;
    for (double v : embedding) {
        if (!std::isfinite(v)) throw FontError("font '" + id + "' embedding is not finite");
        n2 += v * v;
    }
    if (n2 <= 0.0) throw FontError("font '" + id + "' embedding is zero");
    const double inv = 1.0 / std::sqrt(n2);
    FontEntry entry{std::move(id), std::move(path), {}};
    for (double v : embedding) entry.embedding.push_back(static_cast<float>(v * inv));
    entries_.push_back(std::move(entry));
}

std::string FontEmbeddingDB::serialize() const {
    std::string out(kMagic);
    put_u32(out, std::uint32_t(entries_.size()));
    for (const auto& e : entries_) {
        const std::string path = e.path.string();
        put_u32(out, std::uint32_t(e.id.size()));
        out += e.id;
        put_u32(out, std::uint32_t(path.size()));
        out += path;
        put_u32(out, std::uint32_t(e.embedding.size()));
        for (float f : e.embedding) {
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            put_u32(out, u);
        }
    }
    return out;
}

FontEmbeddingDB FontEmbeddingDB::deserialize(std::string_view bytes) {
    if (!bytes.starts_with(kMagic)) throw FontError("not a font database (missing FONTDB1 header)");
    Reader in(bytes.substr(kMagic.size()));
    FontEmbeddingDB db;
    const std::uint32_t count = in.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        FontEntry e;
        e.id = in.text();
        e.path = in.text();
        const std::uint32_t dim = in.u32();
        if (dim == 0) throw FontError("font database entry '" + e.id + "' has no embedding");
        if (!db.entries_.empty() && dim != db.dim()) throw FontError("font database mixes embedding dimensions");
        double n2 = 0.0;
        for (std::uint32_t k = 0; k < dim; ++k) {
            e.embedding.push_back(in.f32());
            n2 += double(e.embedding.back()) * e.embedding.back();
        }
        if (!(std::abs(std::sqrt(n2) - 1.0) <= 1e-6)) {
            throw FontError("font database entry '" + e.id + "' is not unit length");
        }
        db.entries_.push_back(std::move(e));
    }
    if (!in.done()) throw FontError("font database has trailing bytes");
    return db;
}

void FontEmbeddingDB::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    const std::string bytes = serialize();
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw FontError("cannot write font database " + file.string());
}

FontEmbeddingDB FontEmbeddingDB::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw FontError("cannot read font database " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

FontChoice select_font(std::span<const double> prompt, const FontEmbeddingDB& db) {
    if (db.empty()) throw FontError("font database is empty");
    if (prompt.size() != db.dim()) {
        throw FontError("prompt embedding has dimension " + std::to_string(prompt.size()) + ", database has " +
                        std::to_string(db.dim()));
    }
    double pn = 0.0;
    for (double v : prompt) pn += v * v;
    pn = std::sqrt(pn);
    if (!(pn > 0.0) || !std::isfinite(pn)) throw FontError("prompt embedding is zero or not finite");

    const FontEntry* best = nullptr;
    double best_sim = -2.0;
    for (const FontEntry& e : db.entries()) {
        double d = 0.0;
        for (std::size_t k = 0; k < prompt.size(); ++k) d += prompt[k] * double(e.embedding[k]);
        const double sim = d / pn;
        if (sim > best_sim || (sim == best_sim && e.id < best->id)) {
            best = &e;
            best_sim = sim;
        }
    }
    return {best->id, best->path, best_sim};
}

FontDbBuild build_font_db(std::span<const std::filesystem::path> fonts, const Scorer& scorer,
                          std::string_view probe_text, int size) {
    struct Slot {
        std::vector<double> embedding;
        std::string error;
    };
    std::vector<Slot> slots(fonts.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < fonts.size(); i = next++) {
            try {
                const WordLayout word = load_glyph_outlines(fonts[i], probe_text);
                slots[i].embedding = request_image_embedding(scorer, render(word, size));
            } catch (const std::exception& e) {
                slots[i].error = e.what();
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, fonts.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    FontDbBuild out;
    for (std::size_t i = 0; i < fonts.size(); ++i) {
        std::string id = fonts[i].stem().string();
        for (int n = 2; std::any_of(out.db.entries().begin(), out.db.entries().end(),
                                    [&](const FontEntry& e) { return e.id == id; });
             ++n) {
            id = fonts[i].stem().string() + "-" + std::to_string(n);
        }
        if (slots[i].error.empty()) {
            try {
                out.db.add(id, fonts[i], slots[i].embedding);
                continue;
            } catch (const FontError& e) {
                slots[i].error = e.what();
            }
        }
        out.warnings.push_back("skipped font " + fonts[i].string() + ": " + slots[i].error);
    }
    if (out.db.empty()) {
        std::string detail;
        for (const auto& w : out.warnings) detail += "\n  " + w;
        throw FontError("no usable fonts" + (detail.empty() ? std::string(" (none given)") : detail));
    }
    return out;
}

std::vector<std::filesystem::path> discover_fonts(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw FontError("fonts directory " + dir.string() + " does not exist");
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
        if (ext == ".ttf" || ext == ".otf" || ext == ".ttc") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace khattat
