#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "khattat/scorer.hpp"

namespace khattat {

inline constexpr std::string_view kDefaultPromptSuffix =
    "minimal flat 2d vector icon. lineal color. on a white background. trending on artstation";

/// The 37 font attributes a concept may map to.
std::span<const std::string_view> font_attribute_vocabulary();
bool is_font_attribute(std::string_view word);

struct ConceptExpansion {
    std::string concept_word;
    std::array<std::string, 3> objects;
    std::array<std::string, 3> font_attributes;
};

/// key = value lines, '#' comments. Values list three items split by ';'.
class PromptTable {
public:
    /// The table bundled with the library.
    static PromptTable builtin();
    static PromptTable parse(std::string_view text);
    static PromptTable load(const std::filesystem::path& path);

    std::optional<std::array<std::string, 3>> objects(std::string_view concept_word) const;
    std::optional<std::array<std::string, 3>> attributes(std::string_view concept_word) const;

private:
    std::map<std::string, std::array<std::string, 3>> objects_, attributes_;
};

/// Language-model prompt asking for three symbols for the concept.
std::string concept_prompt(std::string_view concept_word);
/// Language-model prompt asking for three font attributes for the concept.
std::string font_attribute_prompt(std::string_view concept_word);

/// Accepts "a, b, or c" and "A or b or c." styles.
std::optional<std::array<std::string, 3>> parse_objects(std::string_view response);
/// Accepts a bracketed JSON list or a plain comma list; every entry must be
/// in the vocabulary.
std::optional<std::array<std::string, 3>> parse_attributes(std::string_view response);

/// Total and deterministic.
ConceptExpansion expand_concept_offline(std::string_view concept_word, const PromptTable& table = PromptTable::builtin());
/// Asks the scorer's language model, re-asking up to `reasks` times on an
/// unparseable answer. Throws PromptError carrying the last raw answer.
ConceptExpansion expand_concept_remote(std::string_view concept_word, const Scorer& scorer, int reasks = 2);

struct PromptSet {
    std::array<std::string, 3> morph;  // "a {object}. {suffix}"
    std::string font;                  // "This is a {a1}, {a2}, {a3} font"
};

PromptSet build_prompts(const ConceptExpansion& expansion, std::string_view suffix = kDefaultPromptSuffix);

}  // namespace khattat
