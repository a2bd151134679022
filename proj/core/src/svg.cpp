#include "khattat/svg.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>

#include "khattat/error.hpp"
#include "khattat/text_format.hpp"

namespace khattat {
namespace {

std::string xy(Vec2 p) { return format_double(p.x) + " " + format_double(p.y); }

std::string path_data(const GlyphPath& glyph) {
    std::string d;
    for (const Contour& c : glyph.contours) {
        if (c.segment_count() == 0) continue;
        if (!d.empty()) d += ' ';
        d += "M" + xy(c.points[0]);
        for (std::size_t k = 0; k < c.segment_count(); ++k) {
            const BezierSegment s = c.segment(k);
            d += " C" + xy(s.p1) + " " + xy(s.p2) + " " + xy(s.p3);
        }
        d += " Z";
    }
    return d;
}

class PathLexer {
public:
    explicit PathLexer(std::string_view s) : s_(s) {}

    void skip() {
        while (pos_ < s_.size() && (std::isspace(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == ',')) ++pos_;
    }
    bool done() {
        skip();
        return pos_ >= s_.size();
    }
    bool at_number() {
        skip();
        if (pos_ >= s_.size()) return false;
        const char c = s_[pos_];
        return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
    }
    char command() {
        skip();
        const char c = s_[pos_++];
        if (!std::isalpha(static_cast<unsigned char>(c))) {
            throw GeometryError(std::string("svg path: expected a command, found '") + c + "'");
        }
        return c;
    }
    double number() {
        if (!at_number()) throw GeometryError("svg path: expected a number at offset " + std::to_string(pos_));
        if (s_[pos_] == '+') ++pos_;
        double v = 0.0;
        const auto r = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (r.ec != std::errc()) throw GeometryError("svg path: bad number at offset " + std::to_string(pos_));
        pos_ = std::size_t(r.ptr - s_.data());
        return v;
    }
    Vec2 point() {
        const double x = number();
        return {x, number()};
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

BezierSegment line(Vec2 a, Vec2 b) { return {a, lerp(a, b, 1.0 / 3.0), lerp(a, b, 2.0 / 3.0), b}; }

std::vector<Contour> parse_path_data(std::string_view d) {
    std::vector<Contour> contours;
    std::vector<BezierSegment> segs;
    Vec2 start, cur;
    auto close = [&] {
        if (segs.empty()) return;
        if (cur != start) segs.push_back(line(cur, start));
        contours.push_back(Contour::from_segments(segs));
        segs.clear();
        cur = start;
    };

    PathLexer lex(d);
    char cmd = 0;
    while (!lex.done()) {
        if (!lex.at_number()) {
            cmd = lex.command();
        } else if (cmd == 0) {
            throw GeometryError("svg path: data must start with a moveto");
        }
        const bool rel = std::islower(static_cast<unsigned char>(cmd));
        const Vec2 base = rel ? cur : Vec2{};
        switch (std::toupper(static_cast<unsigned char>(cmd))) {
            case 'M':
                close();
                start = cur = base + lex.point();
                // Further coordinate pairs are implicit linetos.
                cmd = rel ? 'l' : 'L';
                break;
            case 'L': {
                const Vec2 p = base + lex.point();
                segs.push_back(line(cur, p));
                cur = p;
                break;
            }
            case 'H': {
                const Vec2 p{(rel ? cur.x : 0.0) + lex.number(), cur.y};
                segs.push_back(line(cur, p));
                cur = p;
                break;
            }
            case 'V': {
                const Vec2 p{cur.x, (rel ? cur.y : 0.0) + lex.number()};
                segs.push_back(line(cur, p));
                cur = p;
                break;
            }
            case 'C': {
                const Vec2 p1 = base + lex.point();
                const Vec2 p2 = base + lex.point();
                const Vec2 p3 = base + lex.point();
                segs.push_back({cur, p1, p2, p3});
                cur = p3;
                break;
            }
            case 'Q': {
                const Vec2 q = base + lex.point();
                const Vec2 p = base + lex.point();
                segs.push_back({cur, cur + (q - cur) * (2.0 / 3.0), p + (q - p) * (2.0 / 3.0), p});
                cur = p;
                break;
            }
            case 'Z':
                close();
                cmd = 0;
                break;
            default:
                throw GeometryError(std::string("svg path: unsupported command '") + cmd + "'");
        }
    }
    close();
    return contours;
}

std::map<std::string, std::string> attributes(const std::string& tag) {
    static const std::regex attr(R"re(([A-Za-z_:][-A-Za-z0-9_:.]*)\s*=\s*("([^"]*)"|'([^']*)'))re");
    std::map<std::string, std::string> out;
    for (auto it = std::sregex_iterator(tag.begin(), tag.end(), attr); it != std::sregex_iterator(); ++it) {
        out[(*it)[1].str()] = (*it)[3].matched ? (*it)[3].str() : (*it)[4].str();
    }
    return out;
}

template <typename T>
std::optional<T> integer_attr(const std::map<std::string, std::string>& a, const std::string& key) {
    const auto it = a.find(key);
    if (it == a.end()) return std::nullopt;
    T v{};
    const auto r = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (r.ec != std::errc() || r.ptr != it->second.data() + it->second.size()) {
        throw GeometryError("svg: attribute " + key + " is not an integer: " + it->second);
    }
    return v;
}

}  // namespace

std::string to_svg(const WordLayout& word) {
    if (word.glyphs.empty()) throw GeometryError("cannot export an empty word to SVG");
    const std::string size = format_double(kCanvasSize);
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + size + " " + size + "\" width=\"" +
                      size + "\" height=\"" + size + "\" data-script=\"" +
                      (word.script == Script::right_to_left ? "rtl" : "ltr") + "\">\n";
    out += "  <rect width=\"" + size + "\" height=\"" + size + "\" fill=\"white\"/>\n";
    for (std::size_t g = 0; g < word.glyphs.size(); ++g) {
        const GlyphPath& glyph = word.glyphs[g];
        const double advance = g < word.advances.size() ? word.advances[g] : 0.0;
        out += "  <path data-letter=\"" + std::to_string(glyph.letter_index) + "\" data-codepoint=\"" +
               std::to_string(std::uint32_t(glyph.codepoint)) + "\" data-glyph=\"" + std::to_string(glyph.glyph_id) +
               "\" data-advance=\"" + format_double(advance) + "\" data-morphable=\"" +
               (glyph.morphable ? "true" : "false") + "\" fill=\"black\" fill-rule=\"evenodd\" d=\"" +
               path_data(glyph) + "\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

void export_svg(const WordLayout& word, const std::filesystem::path& file) {
    const std::string doc = to_svg(word);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out.write(doc.data(), std::streamsize(doc.size()));
    if (!out) throw GeometryError("cannot write SVG " + file.string());
}

WordLayout parse_svg(std::string_view document) {
    const std::string doc(document);
    WordLayout word;

    static const std::regex svg_tag(R"(<svg\b[^>]*>)");
    std::smatch root;
    if (!std::regex_search(doc, root, svg_tag)) throw GeometryError("svg: no <svg> element");
    if (attributes(root.str())["data-script"] == "rtl") word.script = Script::right_to_left;

    static const std::regex path_tag(R"(<path\b[^>]*>)");
    for (auto it = std::sregex_iterator(doc.begin(), doc.end(), path_tag); it != std::sregex_iterator(); ++it) {
        const auto a = attributes(it->str());
        GlyphPath glyph;
        const auto d = a.find("d");
        if (d != a.end()) glyph.contours = parse_path_data(d->second);
        glyph.letter_index = integer_attr<int>(a, "data-letter").value_or(int(word.glyphs.size()));
        glyph.codepoint = char32_t(integer_attr<std::uint32_t>(a, "data-codepoint").value_or(0));
        glyph.glyph_id = integer_attr<unsigned>(a, "data-glyph").value_or(0);
        const auto m = a.find("data-morphable");
        glyph.morphable = m != a.end() ? m->second == "true" : !glyph.contours.empty();
        double advance = 0.0;
        if (const auto adv = a.find("data-advance"); adv != a.end()) {
            const auto v = parse_double(adv->second);
            if (!v) throw GeometryError("svg: data-advance is not a number: " + adv->second);
            advance = *v;
        }
        word.glyphs.push_back(std::move(glyph));
        word.advances.push_back(advance);
    }
    if (word.glyphs.empty()) throw GeometryError("svg: document has no <path> elements");
    return word;
}

WordLayout import_svg(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw GeometryError("cannot read SVG " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_svg(ss.str());
}

}  // namespace khattat
