#include "khattat/font.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "khattat/error.hpp"

namespace khattat {
namespace {

constexpr std::uint32_t make_tag(const char (&s)[5]) {
    return (std::uint32_t(std::uint8_t(s[0])) << 24) | (std::uint32_t(std::uint8_t(s[1])) << 16) |
           (std::uint32_t(std::uint8_t(s[2])) << 8) | std::uint32_t(std::uint8_t(s[3]));
}

class Reader {
public:
    Reader(std::span<const std::uint8_t> data, std::string_view what) : data_(data), what_(what) {}

    std::uint8_t u8(std::size_t off) const {
        check(off, 1);
        return data_[off];
    }
    std::uint16_t u16(std::size_t off) const {
        check(off, 2);
        return std::uint16_t((data_[off] << 8) | data_[off + 1]);
    }
    std::int16_t i16(std::size_t off) const { return static_cast<std::int16_t>(u16(off)); }
    std::uint32_t u32(std::size_t off) const {
        check(off, 4);
        return (std::uint32_t(data_[off]) << 24) | (std::uint32_t(data_[off + 1]) << 16) |
               (std::uint32_t(data_[off + 2]) << 8) | std::uint32_t(data_[off + 3]);
    }
    std::span<const std::uint8_t> sub(std::size_t off, std::size_t len) const {
        check(off, len);
        return data_.subspan(off, len);
    }
    std::size_t size() const { return data_.size(); }

private:
    void check(std::size_t off, std::size_t len) const {
        if (off + len > data_.size() || off + len < off) {
            throw FontError("truncated font data in " + std::string(what_));
        }
    }
    std::span<const std::uint8_t> data_;
    std::string_view what_;
};

std::string hex_codepoint(char32_t cp) {
    std::ostringstream os;
    os << "U+" << std::uppercase << std::hex;
    os.width(4);
    os.fill('0');
    os << static_cast<std::uint32_t>(cp);
    return os.str();
}

BezierSegment elevate_line(Vec2 a, Vec2 b) {
    return {a, a + (b - a) / 3.0, a + (b - a) * (2.0 / 3.0), b};
}

BezierSegment elevate_quad(Vec2 a, Vec2 c, Vec2 b) {
    return {a, a + (c - a) * (2.0 / 3.0), b + (c - b) * (2.0 / 3.0), b};
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        int len = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            len = 1;
            cp = c;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            throw FontError("invalid UTF-8 lead byte at offset " + std::to_string(i));
        }
        if (i + static_cast<std::size_t>(len) > text.size()) throw FontError("truncated UTF-8 sequence");
        for (int k = 1; k < len; ++k) {
            const auto cc = static_cast<unsigned char>(text[i + static_cast<std::size_t>(k)]);
            if ((cc & 0xC0) != 0x80) throw FontError("invalid UTF-8 continuation byte");
            cp = (cp << 6) | (cc & 0x3F);
        }
        out.push_back(cp);
        i += static_cast<std::size_t>(len);
    }
    return out;
}

bool is_right_to_left(char32_t cp) {
    return (cp >= 0x0590 && cp <= 0x08FF) || (cp >= 0xFB1D && cp <= 0xFDFF) ||
           (cp >= 0xFE70 && cp <= 0xFEFF);
}

FontFace FontFace::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FontError("cannot open font file '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_bytes(std::move(bytes), path.string());
}

FontFace FontFace::from_bytes(std::vector<std::uint8_t> bytes, std::string name) {
    FontFace f;
    f.data_ = std::move(bytes);
    f.name_ = std::move(name);
    Reader r(f.data_, f.name_);
    if (r.size() < 12) throw FontError("'" + f.name_ + "' is not a font file (too short)");

    std::uint32_t version = r.u32(0);
    if (version == make_tag("ttcf")) {
        f.font_offset_ = r.u32(12);
        version = r.u32(f.font_offset_);
    }
    if (version == make_tag("OTTO")) {
        throw FontError("'" + f.name_ + "' has CFF outlines; only glyf outlines are supported");
    }
    if (version != 0x00010000u && version != make_tag("true")) {
        throw FontError("'" + f.name_ + "' is not a TrueType/OpenType file");
    }

    auto head = Reader(f.table(make_tag("head")), "head");
    f.units_per_em_ = head.u16(18);
    f.index_to_loc_format_ = head.i16(50);
    if (f.units_per_em_ == 0) throw FontError("'" + f.name_ + "': unitsPerEm is zero");

    f.num_glyphs_ = Reader(f.table(make_tag("maxp")), "maxp").u16(4);
    auto hhea = Reader(f.table(make_tag("hhea")), "hhea");
    f.ascender_ = hhea.i16(4);
    f.descender_ = hhea.i16(6);
    f.num_hmetrics_ = hhea.u16(34);
    // Make sure the outline tables exist up front.
    (void)f.table(make_tag("loca"));
    (void)f.table(make_tag("glyf"));
    (void)f.table(make_tag("hmtx"));

    auto cmap_span = f.table(make_tag("cmap"));
    Reader cmap(cmap_span, "cmap");
    const unsigned n = cmap.u16(2);
    int best_rank = -1;
    for (unsigned i = 0; i < n; ++i) {
        const std::size_t rec = 4 + 8 * i;
        const unsigned platform = cmap.u16(rec);
        const unsigned encoding = cmap.u16(rec + 2);
        const std::uint32_t off = cmap.u32(rec + 4);
        const int format = cmap.u16(off);
        int rank = -1;
        if (format == 12 && (platform == 0 || (platform == 3 && encoding == 10))) rank = 3;
        else if (format == 4 && platform == 3 && encoding == 1) rank = 2;
        else if (format == 4 && platform == 0) rank = 1;
        if (rank > best_rank) {
            best_rank = rank;
            f.cmap_subtable_ = off;
            f.cmap_format_ = format;
        }
    }
    if (best_rank < 0) throw FontError("'" + f.name_ + "' has no usable Unicode cmap subtable");
    return f;
}

std::span<const std::uint8_t> FontFace::table(std::uint32_t tag) const {
    Reader r(data_, name_);
    const unsigned num_tables = r.u16(font_offset_ + 4);
    for (unsigned i = 0; i < num_tables; ++i) {
        const std::size_t rec = font_offset_ + 12 + 16 * i;
        if (r.u32(rec) == tag) return r.sub(r.u32(rec + 8), r.u32(rec + 12));
    }
    std::string t(4, ' ');
    for (int k = 0; k < 4; ++k) t[static_cast<std::size_t>(k)] = static_cast<char>((tag >> (24 - 8 * k)) & 0xFF);
    throw FontError("'" + name_ + "' is missing the '" + t + "' table");
}

unsigned FontFace::lookup_format4(std::span<const std::uint8_t> sub, char32_t cp) const {
    if (cp > 0xFFFF) return 0;
    Reader r(sub, "cmap format 4");
    const unsigned seg_count = r.u16(6) / 2;
    const std::size_t ends = 14;
    const std::size_t starts = ends + 2 * seg_count + 2;
    const std::size_t deltas = starts + 2 * seg_count;
    const std::size_t range_offsets = deltas + 2 * seg_count;
    for (unsigned s = 0; s < seg_count; ++s) {
        const unsigned end = r.u16(ends + 2 * s);
        if (cp > end) continue;
        const unsigned start = r.u16(starts + 2 * s);
        if (cp < start) return 0;
        const unsigned delta = r.u16(deltas + 2 * s);
        const unsigned ro = r.u16(range_offsets + 2 * s);
        if (ro == 0) return (cp + delta) & 0xFFFF;
        const std::size_t addr = range_offsets + 2 * s + ro + 2 * (cp - start);
        const unsigned g = r.u16(addr);
        return g == 0 ? 0 : (g + delta) & 0xFFFF;
    }
    return 0;
}

unsigned FontFace::lookup_format12(std::span<const std::uint8_t> sub, char32_t cp) const {
    Reader r(sub, "cmap format 12");
    const std::uint32_t groups = r.u32(12);
    std::uint32_t lo = 0, hi = groups;
    while (lo < hi) {
        const std::uint32_t mid = (lo + hi) / 2;
        const std::size_t g = 16 + 12 * std::size_t(mid);
        const std::uint32_t start = r.u32(g), end = r.u32(g + 4);
        if (cp < start) hi = mid;
        else if (cp > end) lo = mid + 1;
        else return r.u32(g + 8) + (cp - start);
    }
    return 0;
}

unsigned FontFace::glyph_index(char32_t cp) const {
    auto sub = std::span<const std::uint8_t>(data_).subspan(0);
    const auto cmap = table(make_tag("cmap"));
    const std::size_t base = static_cast<std::size_t>(cmap.data() - data_.data()) + cmap_subtable_;
    sub = std::span<const std::uint8_t>(data_).subspan(base);
    return cmap_format_ == 12 ? lookup_format12(sub, cp) : lookup_format4(sub, cp);
}

unsigned FontFace::advance_width(unsigned glyph) const {
    Reader hmtx(table(make_tag("hmtx")), "hmtx");
    if (num_hmetrics_ == 0) return 0;
    const unsigned idx = std::min(glyph, num_hmetrics_ - 1);
    return hmtx.u16(4 * std::size_t(idx));
}

std::vector<FontFace::RawContour> FontFace::raw_outline(unsigned glyph, int depth) const {
    if (depth > 8) throw FontError("composite glyph nesting too deep");
    if (glyph >= num_glyphs_) throw FontError("glyph id " + std::to_string(glyph) + " out of range");
    Reader loca(table(make_tag("loca")), "loca");
    std::size_t start = 0, end = 0;
    if (index_to_loc_format_ == 0) {
        start = 2 * std::size_t(loca.u16(2 * std::size_t(glyph)));
        end = 2 * std::size_t(loca.u16(2 * std::size_t(glyph) + 2));
    } else {
        start = loca.u32(4 * std::size_t(glyph));
        end = loca.u32(4 * std::size_t(glyph) + 4);
    }
    if (end <= start) return {};
    Reader g(table(make_tag("glyf")).subspan(start, end - start), "glyf");

    const int contours = g.i16(0);
    std::vector<RawContour> out;
    if (contours >= 0) {
        std::vector<unsigned> end_pts(static_cast<std::size_t>(contours));
        for (int c = 0; c < contours; ++c) end_pts[std::size_t(c)] = g.u16(10 + 2 * std::size_t(c));
        const std::size_t npts = contours == 0 ? 0 : end_pts.back() + 1;
        std::size_t off = 10 + 2 * std::size_t(contours);
        off += 2 + g.u16(off);  // skip instructions

        std::vector<std::uint8_t> flags;
        flags.reserve(npts);
        while (flags.size() < npts) {
            const std::uint8_t f = g.u8(off++);
            flags.push_back(f);
            if (f & 0x08) {
                const unsigned repeat = g.u8(off++);
                for (unsigned k = 0; k < repeat && flags.size() < npts; ++k) flags.push_back(f);
            }
        }
        std::vector<double> xs(npts), ys(npts);
        int v = 0;
        for (std::size_t i = 0; i < npts; ++i) {
            const auto f = flags[i];
            if (f & 0x02) {
                const int d = g.u8(off++);
                v += (f & 0x10) ? d : -d;
            } else if (!(f & 0x10)) {
                v += g.i16(off);
                off += 2;
            }
            xs[i] = v;
        }
        v = 0;
        for (std::size_t i = 0; i < npts; ++i) {
            const auto f = flags[i];
            if (f & 0x04) {
                const int d = g.u8(off++);
                v += (f & 0x20) ? d : -d;
            } else if (!(f & 0x20)) {
                v += g.i16(off);
                off += 2;
            }
            ys[i] = v;
        }
        std::size_t first = 0;
        for (int c = 0; c < contours; ++c) {
            RawContour rc;
            for (std::size_t i = first; i <= end_pts[std::size_t(c)]; ++i) {
                rc.push_back({xs[i], ys[i], (flags[i] & 0x01) != 0});
            }
            first = end_pts[std::size_t(c)] + 1;
            if (rc.size() >= 2) out.push_back(std::move(rc));
        }
        return out;
    }

    // Composite glyph.
    std::size_t off = 10;
    for (;;) {
        const unsigned flags = g.u16(off);
        const unsigned child = g.u16(off + 2);
        off += 4;
        double arg1 = 0, arg2 = 0;
        if (flags & 0x0001) {
            arg1 = (flags & 0x0002) ? g.i16(off) : g.u16(off);
            arg2 = (flags & 0x0002) ? g.i16(off + 2) : g.u16(off + 2);
            off += 4;
        } else {
            arg1 = (flags & 0x0002) ? static_cast<std::int8_t>(g.u8(off)) : g.u8(off);
            arg2 = (flags & 0x0002) ? static_cast<std::int8_t>(g.u8(off + 1)) : g.u8(off + 1);
            off += 2;
        }
        double a = 1, b = 0, c = 0, d = 1;
        auto f2dot14 = [&](std::size_t o) { return g.i16(o) / 16384.0; };
        if (flags & 0x0008) {
            a = d = f2dot14(off);
            off += 2;
        } else if (flags & 0x0040) {
            a = f2dot14(off);
            d = f2dot14(off + 2);
            off += 4;
        } else if (flags & 0x0080) {
            a = f2dot14(off);
            b = f2dot14(off + 2);
            c = f2dot14(off + 4);
            d = f2dot14(off + 6);
            off += 8;
        }
        auto parts = raw_outline(child, depth + 1);
        for (auto& rc : parts) {
            for (auto& p : rc) {
                const double x = p.x, y = p.y;
                p.x = a * x + c * y;
                p.y = b * x + d * y;
            }
        }
        double dx = 0, dy = 0;
        if (flags & 0x0002) {
            dx = arg1;
            dy = arg2;
        } else {
            // Point matching: align child point arg2 onto parent point arg1.
            auto nth = [](const std::vector<RawContour>& cs, std::size_t n) -> const RawPoint& {
                for (const auto& rc : cs) {
                    if (n < rc.size()) return rc[n];
                    n -= rc.size();
                }
                throw FontError("composite anchor point out of range");
            };
            const RawPoint& parent = nth(out, static_cast<std::size_t>(arg1));
            const RawPoint& mine = nth(parts, static_cast<std::size_t>(arg2));
            dx = parent.x - mine.x;
            dy = parent.y - mine.y;
        }
        for (auto& rc : parts) {
            for (auto& p : rc) {
                p.x += dx;
                p.y += dy;
            }
            out.push_back(std::move(rc));
        }
        if (!(flags & 0x0020)) break;
    }
    return out;
}

FontOutline FontFace::outline(unsigned glyph) const {
    FontOutline result;
    for (const RawContour& rc : raw_outline(glyph, 0)) {
        const std::size_t n = rc.size();
        // Find an on-curve starting point, or synthesise one between two
        // off-curve points.
        std::size_t s = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (rc[i].on_curve) {
                s = i;
                break;
            }
        }
        Vec2 start;
        std::vector<RawPoint> seq;
        if (s == n) {
            start = Vec2{(rc[0].x + rc[n - 1].x) / 2, (rc[0].y + rc[n - 1].y) / 2};
            seq.assign(rc.begin(), rc.end());
        } else {
            start = Vec2{rc[s].x, rc[s].y};
            for (std::size_t k = 1; k <= n; ++k) seq.push_back(rc[(s + k) % n]);
            seq.back() = {start.x, start.y, true};
        }
        if (s == n) seq.push_back({start.x, start.y, true});

        std::vector<BezierSegment> segs;
        Vec2 cur = start;
        std::optional<Vec2> ctrl;
        for (const RawPoint& p : seq) {
            const Vec2 q{p.x, p.y};
            if (p.on_curve) {
                if (ctrl) {
                    segs.push_back(elevate_quad(cur, *ctrl, q));
                    ctrl.reset();
                } else if (q != cur) {
                    segs.push_back(elevate_line(cur, q));
                }
                cur = q;
            } else {
                if (ctrl) {
                    const Vec2 mid = (*ctrl + q) * 0.5;
                    segs.push_back(elevate_quad(cur, *ctrl, mid));
                    cur = mid;
                }
                ctrl = q;
            }
        }
        if (segs.empty()) continue;
        // Snap the final endpoint so the contour closes exactly.
        segs.back().p3 = segs.front().p0;
        result.contours.push_back(std::move(segs));
    }
    return result;
}

WordLayout layout_glyphs(const FontFace& face, std::span<const unsigned> glyph_ids,
                         std::span<const char32_t> codepoints, Script script) {
    const std::size_t n = glyph_ids.size();
    std::vector<FontOutline> outlines;
    std::vector<double> widths;
    double total = 0.0;
    for (unsigned id : glyph_ids) {
        outlines.push_back(face.outline(id));
        widths.push_back(face.advance_width(id));
        total += widths.back();
    }

    // Pen positions in font units; right-to-left words run from the right.
    std::vector<double> pen(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        pen[i] = script == Script::right_to_left ? total - acc - widths[i] : acc;
        acc += widths[i];
    }

    Box ink;
    ink.expand(Vec2{0.0, 0.0});
    ink.expand(Vec2{total, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& contour : outlines[i].contours) {
            for (const auto& s : contour) {
                for (Vec2 p : {s.p0, s.p1, s.p2, s.p3}) ink.expand(Vec2{p.x + pen[i], p.y});
            }
        }
    }
    const double span = std::max({ink.width(), ink.height(), 1.0});
    const double scale = 0.9 * kCanvasSize / span;
    const Vec2 c = ink.center();
    auto place = [&](Vec2 p, double dx) {
        return Vec2{kCanvasSize / 2 + scale * (p.x + dx - c.x), kCanvasSize / 2 - scale * (p.y - c.y)};
    };

    WordLayout word;
    word.script = script;
    for (std::size_t i = 0; i < n; ++i) {
        GlyphPath gp;
        gp.letter_index = static_cast<int>(i);
        gp.glyph_id = glyph_ids[i];
        gp.codepoint = i < codepoints.size() ? codepoints[i] : 0;
        for (const auto& contour : outlines[i].contours) {
            std::vector<BezierSegment> placed;
            for (const auto& s : contour) {
                placed.push_back({place(s.p0, pen[i]), place(s.p1, pen[i]), place(s.p2, pen[i]),
                                  place(s.p3, pen[i])});
            }
            gp.contours.push_back(Contour::from_segments(placed));
        }
        gp.morphable = !gp.contours.empty() && gp.area() > 1e-9;
        word.advances.push_back(kCanvasSize / 2 + scale * (pen[i] - c.x));
        word.glyphs.push_back(std::move(gp));
    }
    return word;
}

WordLayout load_glyph_outlines(const std::filesystem::path& font_file, std::string_view text,
                               ShapingMode mode, std::optional<Script> script) {
    if (text.empty()) throw FontError("empty text");
    const FontFace face = FontFace::load(font_file);

    std::vector<unsigned> ids;
    std::u32string cps;
    if (mode == ShapingMode::simple) {
        cps = decode_utf8(text);
        for (char32_t cp : cps) {
            const unsigned id = face.glyph_index(cp);
            if (id == 0) {
                throw MissingGlyphError(cp, "font '" + face.name() + "' has no glyph for " + hex_codepoint(cp));
            }
            ids.push_back(id);
        }
        if (!script) {
            const bool rtl = std::any_of(cps.begin(), cps.end(), is_right_to_left);
            script = rtl ? Script::right_to_left : Script::left_to_right;
        }
    } else {
        std::string buf(text);
        std::replace(buf.begin(), buf.end(), ',', ' ');
        std::istringstream is(buf);
        std::string tok;
        while (is >> tok) {
            unsigned id = 0;
            const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), id);
            if (ec != std::errc() || ptr != tok.data() + tok.size()) {
                throw FontError("invalid glyph id '" + tok + "'");
            }
            if (id >= face.glyph_count()) throw FontError("glyph id " + tok + " out of range");
            ids.push_back(id);
        }
        if (ids.empty()) throw FontError("empty text");
        if (!script) script = Script::left_to_right;
    }
    return layout_glyphs(face, ids, cps, *script);
}

}  // namespace khattat
