// khattat: command-line front end.
//
//   khattat morph   --word BIRD --concept bird --scorer mock:circle.png --offline-prompts --fixed-region 1..1
//   khattat fontdb  build --fonts-dir DIR --output fonts.db | list --db fonts.db
//   khattat regions --word BIRD --concept bird --font F.ttf
//   khattat render  --svg out/BIRD.svg --output BIRD.png
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "khattat/font.hpp"
#include "khattat/font_selection.hpp"
#include "khattat/image_io.hpp"
#include "khattat/pipeline.hpp"
#include "khattat/raster.hpp"
#include "khattat/region_selection.hpp"
#include "khattat/svg.hpp"
#include "khattat/text_format.hpp"

#ifndef KHATTAT_DEFAULT_FONTS_DIR
#define KHATTAT_DEFAULT_FONTS_DIR ""
#endif

namespace {

using namespace khattat;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Runtime failure outside the morph pipeline, labelled with its stage.
struct StageError : std::runtime_error {
    StageError(const std::string& stage, const std::string& what) : std::runtime_error(stage + ": " + what) {}
};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

/// Flat key=value file; keys are long option names without the dashes.
/// Values only fill options not given on the command line.
void apply_config_file(CLI::App& app, const std::string& file) {
    if (file.empty()) return;
    std::ifstream in(file);
    if (!in) throw UsageError("cannot read config file " + file);
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(file + ":" + std::to_string(n) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        CLI::Option* opt = app.get_option_no_throw("--" + key);
        if (!opt || key == "config") throw UsageError(file + ":" + std::to_string(n) + ": unknown key '" + key + "'");
        if (opt->count() > 0) continue;
        opt->add_result(trim(line.substr(eq + 1)));
        opt->run_callback();
    }
}

std::pair<std::size_t, std::size_t> parse_region(const std::string& text) {
    auto number = [&](std::string_view s) {
        std::size_t v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size() || v == 0) {
            throw UsageError("region '" + text + "' must look like i..j with 1-based indices");
        }
        return v;
    };
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        const auto i = number(text);
        return {i, i};
    }
    const auto i = number(std::string_view(text).substr(0, dots));
    const auto j = number(std::string_view(text).substr(dots + 2));
    if (i > j) throw UsageError("region '" + text + "' has start after end");
    return {i, j};
}

std::string resolve_scorer(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("KHATTAT_SCORER_URL"); env && *env) return env;
    return "builtin";
}

struct ScorerFlags {
    std::string spec;
    double timeout = 120.0;
    int retries = 2;

    void add(CLI::App* app) {
        app->add_option("--scorer", spec,
                        "builtin, mock:<target.png> or http://host:port (default: $KHATTAT_SCORER_URL, else builtin)");
        app->add_option("--timeout", timeout, "Scorer request timeout, seconds")->check(CLI::PositiveNumber);
        app->add_option("--retries", retries, "Retries after a transport failure")->check(CLI::NonNegativeNumber);
    }
    std::unique_ptr<Scorer> make() const {
        HttpScorerOptions o;
        o.timeout_seconds = timeout;
        o.retries = retries;
        try {
            return make_scorer(resolve_scorer(spec), o);
        } catch (const std::exception& e) {
            throw StageError("scorer", e.what());
        }
    }
};

// ------------------------------------------------------------------ morph

struct MorphCommand {
    PipelineConfig cfg;
    ScorerFlags scorer;
    std::string fixed_region, config_file;
    std::size_t max_len = 0;
    int canvas = 0;
    double sds = -1, ocr = -1, acap = -1;
    bool no_standardize = false, no_augment = false;

    void add(CLI::App& root) {
        CLI::App* app = root.add_subcommand("morph", "Run the full pipeline: prompts, font, region, morph, export");
        app->add_option("--config", config_file, "key=value file; command-line flags win");
        app->add_option("--word", cfg.word, "Word to morph");
        app->add_option("--concept", cfg.concept_word, "Concept to illustrate");
        app->add_option("--font-db", cfg.font_db, "Font embedding database (built from --fonts-dir if missing)");
        app->add_option("--fonts-dir", cfg.fonts_dir, "Directory of fonts to embed");
        app->add_option("--font", cfg.font, "Use this font and skip font selection");
        scorer.add(app);
        app->add_option("--lambda", cfg.lambda, "Readability weight of the region score")->check(CLI::Range(0.0, 1.0));
        app->add_flag("--no-standardize", no_standardize, "Combine raw rather than z-scored region scores");
        app->add_option("--sds-weight", sds, "Override the guidance weight")->check(CLI::NonNegativeNumber);
        app->add_option("--ocr-weight", ocr, "Override the readability weight (default 0.5 per letter)")->check(CLI::NonNegativeNumber);
        app->add_option("--acap-weight", acap, "Override the conformal weight")->check(CLI::NonNegativeNumber);
        app->add_option("--fixed-region", fixed_region, "Morph letters i..j (1-based) and skip region selection");
        app->add_option("--max-region-len", max_len, "Longest candidate region")->check(CLI::PositiveNumber);
        app->add_flag("--offline-prompts", cfg.offline_prompts, "Expand the concept from the bundled table");
        app->add_option("--prompt-table", cfg.prompt_table, "Replacement offline table");
        app->add_option("--prompt-index", cfg.prompt_index, "Object prompt to morph toward")->check(CLI::Range(0, 2));
        app->add_option("--output-dir", cfg.output_dir, "Where outputs go")->capture_default_str();
        app->add_option("--seed", cfg.seed, "Seed for every random choice")->capture_default_str();
        app->add_option("--iterations", cfg.iterations, "Morph iterations")->check(CLI::PositiveNumber)->capture_default_str();
        app->add_option("--light-iterations", cfg.light_iterations, "Iterations of each region-scoring run")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        app->add_option("--canvas", canvas, "Render size in pixels (default: mock target size, else 512)")
            ->check(CLI::Range(8, 4096));
        app->add_flag("--no-augment", no_augment, "Score the plain render instead of an augmented view");
        app->final_callback([this, app] {
            apply_config_file(*app, config_file);
            run();
        });
    }

    void run() {
        if (cfg.font.empty() && cfg.font_db.empty() && cfg.fonts_dir.empty()) cfg.fonts_dir = KHATTAT_DEFAULT_FONTS_DIR;
        if (!fixed_region.empty()) cfg.fixed_region = parse_region(fixed_region);
        if (max_len > 0) cfg.max_region_len = max_len;
        if (canvas > 0) cfg.canvas = canvas;
        if (sds >= 0) cfg.sds_weight = sds;
        if (ocr >= 0) cfg.ocr_weight = ocr;
        if (acap >= 0) cfg.acap_weight = acap;
        cfg.standardize = !no_standardize;
        cfg.augment = !no_augment;
        cfg.validate();
        const auto s = scorer.make();
        run_pipeline(cfg, *s, std::cout);
    }
};

// ----------------------------------------------------------------- fontdb

struct FontDbCommand {
    std::string fonts_dir = KHATTAT_DEFAULT_FONTS_DIR, output, db, probe{kDefaultProbeText};
    int size = 512;
    ScorerFlags scorer;

    void add(CLI::App& root) {
        CLI::App* app = root.add_subcommand("fontdb", "Build or inspect a font embedding database");
        app->require_subcommand(1);
        CLI::App* build = app->add_subcommand("build", "Embed every font under a directory");
        build->add_option("--fonts-dir", fonts_dir, "Fonts to embed")->capture_default_str();
        build->add_option("--output", output, "Database file to write")->required();
        build->add_option("--probe", probe, "Text rendered for each font")->capture_default_str();
        build->add_option("--size", size, "Probe render size in pixels")->check(CLI::Range(8, 4096))->capture_default_str();
        scorer.add(build);
        build->final_callback([this] { run_build(); });

        CLI::App* list = app->add_subcommand("list", "Print the fonts in a database");
        list->add_option("--db", db, "Database file")->required();
        list->final_callback([this] { run_list(); });
    }

    void run_build() {
        const auto s = scorer.make();
        try {
            const FontDbBuild built = build_font_db(discover_fonts(fonts_dir), *s, probe, size);
            for (const auto& w : built.warnings) std::cerr << "warning: " << w << "\n";
            built.db.save(output);
            std::cout << "wrote " << built.db.size() << " fonts to " << output << "\n";
        } catch (const khattat::Error& e) {
            throw StageError("fontdb", e.what());
        }
    }

    void run_list() {
        try {
            const auto d = FontEmbeddingDB::load(db);
            for (const auto& e : d.entries()) std::cout << e.id << "\t" << e.path.string() << "\t" << e.embedding.size() << "\n";
        } catch (const khattat::Error& e) {
            throw StageError("fontdb", e.what());
        }
    }
};

// ---------------------------------------------------------------- regions

struct RegionsCommand {
    std::string word, concept_word, prompt, font, output_dir = "out", config_file;
    RegionScoring scoring;
    std::size_t max_len = 0;
    int canvas = 0;
    bool no_standardize = false, no_augment = false;
    std::uint64_t seed = 0;
    ScorerFlags scorer;

    void add(CLI::App& root) {
        CLI::App* app = root.add_subcommand("regions", "Score every candidate region and write the report");
        app->add_option("--config", config_file, "key=value file; command-line flags win");
        app->add_option("--word", word, "Word to score");
        app->add_option("--concept", concept_word, "Concept; its first offline object prompt is used");
        app->add_option("--prompt", prompt, "Prompt to score against (overrides --concept)");
        app->add_option("--font", font, "Font file")->capture_default_str();
        scorer.add(app);
        app->add_option("--lambda", scoring.lambda, "Readability weight")->check(CLI::Range(0.0, 1.0));
        app->add_flag("--no-standardize", no_standardize, "Combine raw rather than z-scored scores");
        app->add_option("--max-region-len", max_len, "Longest candidate region")->check(CLI::PositiveNumber);
        app->add_option("--light-iterations", scoring.light_iterations, "Iterations per candidate")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        app->add_option("--canvas", canvas, "Render size in pixels (default: mock target size, else 512)")
            ->check(CLI::Range(8, 4096));
        app->add_option("--seed", seed, "Seed")->capture_default_str();
        app->add_flag("--no-augment", no_augment, "Score the plain render instead of an augmented view");
        app->add_option("--output-dir", output_dir, "Where the report goes")->capture_default_str();
        app->final_callback([this, app] {
            apply_config_file(*app, config_file);
            run();
        });
    }

    void run() {
        if (word.empty()) throw UsageError("regions: --word is required");
        if (font.empty()) font = std::string(KHATTAT_DEFAULT_FONTS_DIR) + "/DejaVuSans.ttf";
        if (prompt.empty()) {
            if (concept_word.empty()) throw UsageError("regions: --prompt or --concept is required");
            prompt = build_prompts(expand_concept_offline(concept_word)).morph[0];
        }
        const auto s = scorer.make();
        scoring.standardize = !no_standardize;
        if (max_len > 0) scoring.max_len = max_len;
        scoring.run.seed = seed;
        scoring.run.augment = !no_augment;
        scoring.run.canvas = canvas > 0 ? canvas : 512;
        if (const auto* mock = dynamic_cast<const MockSdsScorer*>(s.get()); mock && canvas == 0) {
            scoring.run.canvas = mock->target().width;
        }
        WordLayout layout;
        try {
            layout = load_glyph_outlines(font, word);
        } catch (const khattat::Error& e) {
            throw StageError("layout", e.what());
        }
        try {
            const auto scored = score_regions(layout, prompt, *s, scoring);
            fs::create_directories(output_dir);
            const fs::path report = fs::path(output_dir) / (word + ".regions.tsv");
            std::ofstream(report) << region_report_tsv(scored);
            std::cout << region_report_tsv(scored) << "selected " << select_region(scored).label() << "\n";
        } catch (const khattat::Error& e) {
            throw StageError("regions", e.what());
        }
    }
};

// ----------------------------------------------------------------- render

struct RenderCommand {
    std::string svg, word, font, output, svg_out, circle_region;
    int size = 512;

    void add(CLI::App& root) {
        CLI::App* app = root.add_subcommand("render", "Rasterise an SVG or a word; optionally build a mock target");
        auto* from_svg = app->add_option("--svg", svg, "SVG written by morph");
        auto* from_word = app->add_option("--word", word, "Word to lay out");
        from_svg->excludes(from_word);
        app->add_option("--font", font, "Font for --word");
        app->add_option("--size", size, "Output size in pixels")->check(CLI::Range(8, 4096))->capture_default_str();
        app->add_option("--output", output, "PNG to write")->required();
        app->add_option("--svg-out", svg_out, "Also write the outline as SVG");
        app->add_option("--circle-target", circle_region,
                        "Write a mock target instead: letters i..j replaced by equal-area rings");
        app->final_callback([this] { run(); });
    }

    void run() {
        if (svg.empty() && word.empty()) throw UsageError("render: give --svg or --word");
        if (font.empty()) font = std::string(KHATTAT_DEFAULT_FONTS_DIR) + "/DejaVuSans.ttf";
        std::optional<std::pair<std::size_t, std::size_t>> region;
        if (!circle_region.empty()) region = parse_region(circle_region);
        try {
            const WordLayout layout = svg.empty() ? load_glyph_outlines(font, word) : import_svg(svg);
            if (region && region->second > layout.glyphs.size()) {
                throw UsageError("render: region " + circle_region + " is outside a word of " +
                                 std::to_string(layout.glyphs.size()) + " letters");
            }
            const RasterImage image = region ? circle_target(layout, {region->first - 1, region->second}, size)
                                             : render(layout, size);
            write_png(output, image);
            if (!svg_out.empty()) export_svg(layout, svg_out);
        } catch (const khattat::Error& e) {
            throw StageError("render", e.what());
        }
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Morph the letters of a word toward a concept"};
    app.require_subcommand(1);
    MorphCommand morph;
    FontDbCommand fontdb;
    RegionsCommand regions;
    RenderCommand render_cmd;
    morph.add(app);
    fontdb.add(app);
    regions.add(app);
    render_cmd.add(app);

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "khattat: config: " << e.what() << "\nRun with --help for more information.\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "khattat: config: " << e.what() << "\n";
        return 1;
    } catch (const PipelineError& e) {
        std::cerr << "khattat: " << e.what() << "\n";
        return e.usage() ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "khattat: " << e.what() << "\n";
        return 2;
    }
}
