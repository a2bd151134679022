#include "khattat/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "khattat/font.hpp"
#include "khattat/image_io.hpp"
#include "khattat/raster.hpp"
#include "khattat/svg.hpp"
#include "khattat/text_format.hpp"

namespace khattat {
namespace {

/// Run `body`, re-raising anything but a PipelineError as one for `stage`.
template <typename F>
auto stage(const std::string& name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, e.what());
    }
}

std::string file_stem(const std::string& word) {
    std::string s = word;
    for (char& c : s) {
        if (c == '/' || c == '\\' || static_cast<unsigned char>(c) < 0x20) c = '_';
    }
    return s;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error("cannot write " + file.string());
}

}  // namespace

void PipelineConfig::validate() const {
    auto usage = [](const std::string& what) { throw PipelineError("config", what, true); };
    if (word.empty()) usage("--word is required");
    if (concept_word.empty()) usage("--concept is required");
    if (!(lambda >= 0.0 && lambda <= 1.0)) usage("lambda must be within [0, 1], got " + format_double(lambda));
    for (const auto& w : {sds_weight, ocr_weight, acap_weight}) {
        if (w && !(*w >= 0.0 && std::isfinite(*w))) usage("loss weights must be finite and non-negative");
    }
    if (prompt_index < 0 || prompt_index > 2) usage("prompt index must be 0, 1 or 2");
    if (iterations < 1) usage("iterations must be at least 1");
    if (light_iterations < 1) usage("light iterations must be at least 1");
    if (canvas && *canvas < 8) usage("canvas must be at least 8 pixels");
    if (max_region_len && *max_region_len == 0) usage("maximum region length must be at least 1");
    if (fixed_region) {
        const auto [i, j] = *fixed_region;
        if (i < 1 || i > j) usage("fixed region " + std::to_string(i) + ".." + std::to_string(j) + " is not 1 <= i <= j");
    }
    if (font.empty() && !font_db.empty() && !std::filesystem::exists(font_db) && fonts_dir.empty()) {
        usage("font db " + font_db.string() + " does not exist and no --fonts-dir was given to build it");
    }
    if (font.empty() && font_db.empty() && fonts_dir.empty()) usage("no --font, --font-db or --fonts-dir given");
    if (!font.empty() && !std::filesystem::exists(font)) usage("font " + font.string() + " does not exist");
}

PipelineResult run_pipeline(const PipelineConfig& config, const Scorer& scorer, std::ostream& log) {
    config.validate();
    PipelineResult out;
    const std::string stem = file_stem(config.word);
    const auto& dir = config.output_dir;
    stage("output", [&] { std::filesystem::create_directories(dir); });

    int canvas = 512;
    if (config.canvas) {
        canvas = *config.canvas;
    } else if (const auto* mock = dynamic_cast<const MockSdsScorer*>(&scorer)) {
        canvas = mock->target().width;
    }

    out.prompts = stage("prompts", [&] {
        ConceptExpansion e;
        if (config.offline_prompts) {
            e = config.prompt_table.empty() ? expand_concept_offline(config.concept_word)
                                            : expand_concept_offline(config.concept_word, PromptTable::load(config.prompt_table));
        } else {
            e = expand_concept_remote(config.concept_word, scorer);
        }
        PromptSet p = build_prompts(e);
        std::string text;
        for (std::size_t k = 0; k < 3; ++k) text += "morph" + std::to_string(k + 1) + "=" + p.morph[k] + "\n";
        text += "font=" + p.font + "\n";
        write_text(dir / (stem + ".prompts.txt"), text);
        return p;
    });
    const std::string& prompt = out.prompts.morph[std::size_t(config.prompt_index)];
    log << "prompt: " << prompt << "\nfont prompt: " << out.prompts.font << "\n";

    out.font = stage("font", [&] {
        FontChoice choice;
        if (!config.font.empty()) {
            choice.id = config.font.stem().string();
            choice.path = config.font;
            choice.similarity = 1.0;
        } else {
            FontEmbeddingDB db;
            if (!config.font_db.empty() && std::filesystem::exists(config.font_db)) {
                db = FontEmbeddingDB::load(config.font_db);
            } else {
                const FontDbBuild built = build_font_db(discover_fonts(config.fonts_dir), scorer);
                for (const auto& w : built.warnings) log << "warning: " << w << "\n";
                db = built.db;
                if (!config.font_db.empty()) db.save(config.font_db);
            }
            choice = select_font(request_text_embedding(scorer, out.prompts.font), db);
        }
        write_text(dir / (stem + ".font.txt"),
                   "id=" + choice.id + "\npath=" + choice.path.string() + "\nsimilarity=" + format_double(choice.similarity) + "\n");
        return choice;
    });
    log << "font: " << out.font.id << " (" << out.font.path.string() << ")\n";

    const WordLayout word = stage("layout", [&] { return load_glyph_outlines(out.font.path, config.word); });

    RunConfig run_config;
    run_config.iterations = config.iterations;
    run_config.seed = config.seed;
    run_config.canvas = canvas;
    run_config.augment = config.augment;

    out.region = stage("regions", [&] {
        if (config.fixed_region) {
            RegionCandidate c;
            c.start = config.fixed_region->first;
            c.end = config.fixed_region->second;
            if (c.end > word.glyphs.size()) {
                throw PipelineError("regions", "fixed region " + c.label() + " is outside a word of " +
                                                   std::to_string(word.glyphs.size()) + " letters", true);
            }
            return c;
        }
        RegionScoring scoring;
        scoring.lambda = config.lambda;
        scoring.standardize = config.standardize;
        scoring.light_iterations = config.light_iterations;
        scoring.run = run_config;
        scoring.max_len = config.max_region_len;
        out.candidates = score_regions(word, prompt, scorer, scoring);
        write_text(dir / (stem + ".regions.tsv"), region_report_tsv(out.candidates));
        return select_region(out.candidates);
    });
    log << "region: " << out.region.label() << (config.fixed_region ? " (fixed)" : "") << "\n";

    out.morph = stage("morph", [&] {
        RunConfig c = run_config;
        LossWeights w = LossWeights::for_region(out.region.length());
        if (config.sds_weight) w.sds = *config.sds_weight;
        if (config.ocr_weight) w.ocr = *config.ocr_weight;
        if (config.acap_weight) w.acap = *config.acap_weight;
        c.weights = w;
        c.output_dir = dir;
        c.stem = stem;
        return run(prepare_region(word, out.region.range()), out.region.range(), prompt, c, scorer);
    });
    const auto& records = out.morph.trace.records;
    log << "morph: " << records.size() << " iterations, loss " << format_double(records.front().total) << " -> "
        << format_double(records.back().total) << "\n";

    stage("export", [&] {
        out.svg = dir / (stem + ".svg");
        out.png = dir / (stem + ".png");
        export_svg(out.morph.word, out.svg);
        write_png(out.png, render(out.morph.word, canvas));
    });
    log << "wrote " << out.svg.string() << " and " << out.png.string() << "\n";
    return out;
}

RasterImage circle_target(const WordLayout& word, GlyphRange region, int canvas) {
    if (region.first >= region.last || region.last > word.glyphs.size()) {
        throw GeometryError("circle_target: region is outside the word");
    }
    WordLayout others = word;
    for (std::size_t g = region.first; g < region.last; ++g) others.glyphs[g].contours.clear();
    RasterImage target = render(others, canvas);

    const double s = double(canvas) / kCanvasSize;
    for (std::size_t g = region.first; g < region.last; ++g) {
        const GlyphPath& glyph = word.glyphs[g];
        if (glyph.contours.empty()) continue;
        const Box box = glyph.control_box();
        const Vec2 c = box.center() * s;
        const double outer = 0.25 * (box.width() + box.height()) * s;
        const double area = glyph.area() * s * s;
        const double inner = std::sqrt(std::max(0.0, outer * outer - area / M_PI));
        for (int y = 0; y < canvas; ++y) {
            for (int x = 0; x < canvas; ++x) {
                const double r = std::hypot(x + 0.5 - c.x, y + 0.5 - c.y);
                double cov = std::clamp(outer - r + 0.5, 0.0, 1.0);
                if (inner > 0.0) cov -= std::clamp(inner - r + 0.5, 0.0, 1.0);
                double& px = target.at(x, y);
                px = px + cov * (1.0 - px);
            }
        }
    }
    return target;
}

}  // namespace khattat
