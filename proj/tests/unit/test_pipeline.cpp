#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "khattat/font.hpp"
#include "khattat/pipeline.hpp"
#include "khattat/raster.hpp"
#include "test_support.hpp"

using namespace khattat;
using namespace khattat::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PipelineConfig smoke_config(const fs::path& dir) {
    PipelineConfig c;
    c.word = "BIRD";
    c.concept_word = "bird";
    c.fonts_dir = KHATTAT_TEST_FONTS_DIR;
    c.offline_prompts = true;
    c.fixed_region = {{1, 1}};
    c.iterations = 12;
    c.output_dir = dir;
    c.seed = 4;
    return c;
}

std::string stage_of(const PipelineConfig& c, const Scorer& s) {
    std::ostringstream log;
    try {
        run_pipeline(c, s, log);
    } catch (const PipelineError& e) {
        return e.stage() + (e.usage() ? " (usage)" : "");
    }
    return "none";
}

}  // namespace

TEST_CASE("mock smoke run writes every stage's output") {
    const auto dir = scratch_dir("pipeline_smoke");
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "BIRD");
    const MockSdsScorer scorer(circle_target(w, {0, 1}, 64));
    std::ostringstream log;
    const PipelineResult r = run_pipeline(smoke_config(dir), scorer, log);

    CHECK(r.region.label() == "1..1");
    CHECK(r.candidates.empty());
    CHECK(r.morph.trace.records.size() == 12);
    CHECK(r.prompts.morph[0].starts_with("a bird. "));
    for (const char* f : {"BIRD.svg", "BIRD.png", "BIRD.trace.tsv", "BIRD.prompts.txt", "BIRD.font.txt"}) {
        CHECK_MESSAGE(fs::exists(dir / f), f);
    }
    CHECK(r.svg == dir / "BIRD.svg");
    CHECK(slurp(dir / "BIRD.prompts.txt").find("font=This is a ") != std::string::npos);
    CHECK(log.str().find("region: 1..1 (fixed)") != std::string::npos);
    // Canvas follows the mock target.
    CHECK(r.morph.trace.header_value("canvas") == "64");

    const auto again = scratch_dir("pipeline_smoke_again");
    run_pipeline(smoke_config(again), scorer, log);
    CHECK(slurp(dir / "BIRD.svg") == slurp(again / "BIRD.svg"));
    CHECK(slurp(dir / "BIRD.trace.tsv") == slurp(again / "BIRD.trace.tsv"));
}

TEST_CASE("region selection inside the pipeline") {
    const auto dir = scratch_dir("pipeline_regions");
    PipelineConfig c = smoke_config(dir);
    c.word = "OX";
    c.fixed_region.reset();
    c.light_iterations = 5;
    c.iterations = 5;
    c.font = KHATTAT_TEST_FONT;
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "OX");
    const MockSdsScorer scorer(circle_target(w, {0, 1}, 48));
    std::ostringstream log;
    const PipelineResult r = run_pipeline(c, scorer, log);
    CHECK(r.candidates.size() == 3);
    CHECK(fs::exists(dir / "OX.regions.tsv"));
    CHECK(r.font.id == fs::path(KHATTAT_TEST_FONT).stem().string());
    CHECK(r.morph.trace.header_value("region") == r.region.label());
}

TEST_CASE("font database is built once and reused") {
    const auto dir = scratch_dir("pipeline_fontdb");
    PipelineConfig c = smoke_config(dir);
    c.font_db = dir / "fonts.db";
    c.iterations = 1;
    c.canvas = 32;
    const BuiltinScorer scorer;
    std::ostringstream log;
    const auto first = run_pipeline(c, scorer, log);
    CHECK(fs::exists(c.font_db));
    c.fonts_dir.clear();
    const auto second = run_pipeline(c, scorer, log);
    CHECK(first.font.id == second.font.id);
}

TEST_CASE("configuration errors are usage errors") {
    const auto dir = scratch_dir("pipeline_config");
    const BuiltinScorer scorer;
    PipelineConfig c = smoke_config(dir);
    c.lambda = 1.5;
    CHECK(stage_of(c, scorer) == "config (usage)");
    try {
        c.validate();
    } catch (const PipelineError& e) {
        CHECK(std::string(e.what()).find("[0, 1]") != std::string::npos);
    }

    c = smoke_config(dir);
    c.fonts_dir.clear();
    c.font_db = dir / "missing.db";
    CHECK(stage_of(c, scorer) == "config (usage)");

    c = smoke_config(dir);
    c.word.clear();
    CHECK(stage_of(c, scorer) == "config (usage)");
    c = smoke_config(dir);
    c.fixed_region = {{2, 1}};
    CHECK(stage_of(c, scorer) == "config (usage)");
    c = smoke_config(dir);
    c.acap_weight = -1.0;
    CHECK(stage_of(c, scorer) == "config (usage)");
    c = smoke_config(dir);
    c.fixed_region = {{5, 5}};
    c.canvas = 32;
    CHECK(stage_of(c, scorer) == "regions (usage)");
}

TEST_CASE("runtime errors name their stage") {
    const auto dir = scratch_dir("pipeline_runtime");
    const BuiltinScorer scorer;
    PipelineConfig c = smoke_config(dir);
    c.offline_prompts = false;  // the builtin scorer has no language model
    CHECK(stage_of(c, scorer) == "prompts");

    c = smoke_config(dir);
    c.fonts_dir = dir;  // no fonts there
    CHECK(stage_of(c, scorer) == "font");

    c = smoke_config(dir);
    c.word = "B\xff";
    c.canvas = 32;
    CHECK(stage_of(c, scorer) == "layout");

    c = smoke_config(dir);
    c.canvas = 32;
    const MockSdsScorer wrong_size(RasterImage(16, 16));
    CHECK(stage_of(c, wrong_size) == "morph");
}

TEST_CASE("circle target") {
    const WordLayout w = load_glyph_outlines(KHATTAT_TEST_FONT, "BOLD");
    const RasterImage t = circle_target(w, {1, 2}, 200);
    WordLayout without = w;
    without.glyphs[1].contours.clear();
    const RasterImage others = render(without, 200);

    double ink = 0.0, ring = 0.0;
    for (double v : t.pixels) ink += v;
    for (double v : others.pixels) ring -= v;
    ring += ink;
    const double s = 200.0 / kCanvasSize;
    CHECK(ring == doctest::Approx(w.glyphs[1].area() * s * s).epsilon(0.02));

    const Vec2 c = w.glyphs[1].control_box().center() * s;
    CHECK(t.at(int(c.x), int(c.y)) == 0.0);  // the O keeps its hole
    // Letters outside the region are untouched far from the ring.
    CHECK(t.at(5, 5) == others.at(5, 5));
    CHECK_THROWS_AS(circle_target(w, {3, 5}, 64), GeometryError);
}
