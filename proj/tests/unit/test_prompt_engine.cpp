#include <doctest.h>

#include <deque>
#include <mutex>

#include "khattat/error.hpp"
#include "khattat/prompt_engine.hpp"

using namespace khattat;

namespace {

/// Language model double that replays canned answers and records prompts.
class ScriptedModel final : public Scorer {
public:
    explicit ScriptedModel(std::deque<std::vector<std::string>> answers) : answers_(std::move(answers)) {}

    ScorerResponse exchange(const ScorerRequest& request) const override {
        std::lock_guard lock(mutex_);
        prompts.push_back(*request.prompt);
        ScorerResponse r;
        r.id = request.id;
        r.strings = answers_.front();
        if (answers_.size() > 1) answers_.pop_front();
        return r;
    }
    std::string name() const override { return "scripted"; }

    mutable std::vector<std::string> prompts;

private:
    mutable std::mutex mutex_;
    mutable std::deque<std::vector<std::string>> answers_;
};

using Triple = std::array<std::string, 3>;

}  // namespace

TEST_CASE("attribute vocabulary") {
    CHECK(font_attribute_vocabulary().size() == 37);
    CHECK(is_font_attribute("attention-grabbing"));
    CHECK_FALSE(is_font_attribute("Playful"));
}

TEST_CASE("offline expansion uses the bundled table") {
    const auto freedom = expand_concept_offline("freedom");
    CHECK(freedom.objects == Triple{"wings", "open book", "flying birds"});
    CHECK(freedom.font_attributes == Triple{"playful", "fresh", "modern"});
    CHECK(expand_concept_offline("Egypt").objects == Triple{"Pyramids", "Ankh", "Sphinx"});
    CHECK(expand_concept_offline("  KNOWLEDGE ").objects == Triple{"open book", "lightbulb", "owl"});
    CHECK(expand_concept_offline("elegance").font_attributes == Triple{"graceful", "delicate", "formal"});

    const auto unknown = expand_concept_offline("zzzz-unknown");
    CHECK(unknown.objects == Triple{"zzzz-unknown", "zzzz-unknown", "zzzz-unknown"});
    CHECK(unknown.font_attributes == Triple{"legible", "strong", "modern"});
    CHECK_THROWS_AS(expand_concept_offline("   "), PromptError);
}

TEST_CASE("prompt table parsing") {
    const auto t = PromptTable::parse("# c\nSea.objects = wave ; shell; boat\n\nsea.attributes=calm;soft;wide\n");
    CHECK(t.objects("sea") == Triple{"wave", "shell", "boat"});
    CHECK(t.attributes("SEA") == Triple{"calm", "soft", "wide"});
    CHECK_THROWS_AS(PromptTable::parse("sea.objects = a; b"), PromptError);
    CHECK_THROWS_AS(PromptTable::parse("sea.attributes = calm; soft; loud"), PromptError);
    CHECK_THROWS_AS(PromptTable::parse("sea.colour = a; b; c"), PromptError);
    CHECK_THROWS_AS(PromptTable::parse("just words"), PromptError);
    CHECK_THROWS_AS(PromptTable::load("/nonexistent/prompts.txt"), PromptError);
    const auto bundled = PromptTable::load(KHATTAT_SOURCE_DIR "/data/prompts.txt");
    CHECK(bundled.objects("freedom") == PromptTable::builtin().objects("freedom"));
}

TEST_CASE("language model prompts embed the concept") {
    const std::string c = concept_prompt("ocean");
    CHECK(c.starts_with("You will be given a concept word"));
    CHECK(c.find("Concept word: 'ocean'") != std::string::npos);
    CHECK(c.find("convey ocean, listing exactly three key symbols") != std::string::npos);
    CHECK(c.find("[semantic concept]") == std::string::npos);
    CHECK(c.ends_with("Response:"));
    const std::string a = font_attribute_prompt("ocean");
    CHECK(a.starts_with("Given the following font attributes"));
    CHECK(a.find("\"wide\")") != std::string::npos);
    CHECK(a.ends_with("Concept: ocean\nAnswer:"));
}

TEST_CASE("object answers in both styles") {
    CHECK(parse_objects("Wings or open book or flying birds.") == Triple{"Wings", "open book", "flying birds"});
    CHECK(parse_objects("wave, shell, or boat") == Triple{"wave", "shell", "boat"});
    CHECK(parse_objects("\nResponse: Pyramids or Ankh or Sphinx.\nExtra chatter") == Triple{"Pyramids", "Ankh", "Sphinx"});
    CHECK(parse_objects("wave, shell") == std::nullopt);
    CHECK(parse_objects("a, b, c, or d") == std::nullopt);
    CHECK(parse_objects("") == std::nullopt);
}

TEST_CASE("attribute answers") {
    CHECK(parse_attributes("[\n  \"playful\",\n  \"fresh\",\n  \"modern\"\n]") == Triple{"playful", "fresh", "modern"});
    CHECK(parse_attributes("Answer: [\"Graceful\", \"delicate\", \"formal\"]") == Triple{"graceful", "delicate", "formal"});
    CHECK(parse_attributes("calm, soft, wide") == Triple{"calm", "soft", "wide"});
    CHECK(parse_attributes("[\"calm\", \"soft\", \"loud\"]") == std::nullopt);
    CHECK(parse_attributes("[\"calm\", \"soft\"]") == std::nullopt);
    CHECK(parse_attributes("[calm, soft") == std::nullopt);
}

TEST_CASE("remote expansion re-asks then gives up with the raw answer") {
    SUBCASE("success after one re-ask") {
        const ScriptedModel model({{"I think waves"}, {"Waves or shells or boats."}, {"[\"calm\", \"soft\", \"wide\"]"}});
        const auto e = expand_concept_remote("sea", model);
        CHECK(e.objects == Triple{"Waves", "shells", "boats"});
        CHECK(e.font_attributes == Triple{"calm", "soft", "wide"});
        REQUIRE(model.prompts.size() == 3);
        CHECK(model.prompts[0] == concept_prompt("sea"));
        CHECK(model.prompts[2] == font_attribute_prompt("sea"));
    }
    SUBCASE("unparseable after two re-asks") {
        const ScriptedModel model({{"no idea"}});
        try {
            expand_concept_remote("sea", model);
            FAIL("expected a prompt error");
        } catch (const PromptError& e) {
            CHECK(e.raw_response() == "no idea");
        }
        CHECK(model.prompts.size() == 3);
    }
    SUBCASE("list answers are accepted") {
        const ScriptedModel model({{"wave", "shell", "boat"}, {"calm", "soft", "wide"}});
        CHECK(expand_concept_remote("sea", model).objects == Triple{"wave", "shell", "boat"});
    }
}

TEST_CASE("prompt assembly") {
    const PromptSet p = build_prompts(expand_concept_offline("freedom"));
    CHECK(p.font == "This is a playful, fresh, modern font");
    CHECK(p.morph[0].starts_with("a wings."));
    CHECK(p.morph[0] == "a wings. minimal flat 2d vector icon. lineal color. on a white background. trending on artstation");
    CHECK(p.morph[2] == std::string("a flying birds. ") + std::string(kDefaultPromptSuffix));
    const PromptSet custom = build_prompts(expand_concept_offline("freedom"), "pencil sketch");
    CHECK(custom.morph[1] == "a open book. pencil sketch");
}
