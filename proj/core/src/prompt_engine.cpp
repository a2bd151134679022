#include "khattat/prompt_engine.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "khattat/error.hpp"
#include "khattat_prompt_table.hpp"

namespace khattat {
namespace {

constexpr std::array<std::string_view, 37> kAttributes = {
    "angular", "artistic", "attention-grabbing", "attractive", "bad", "boring", "calm", "capitals",
    "charming", "clumsy", "complex", "cursive", "delicate", "disorderly", "display", "dramatic",
    "formal", "fresh", "friendly", "gentle", "graceful", "happy", "italic", "legible",
    "modern", "monospace", "playful", "pretentious", "serif", "sharp", "sloppy", "soft",
    "strong", "technical", "thin", "warm", "wide"};

constexpr std::array<std::string_view, 3> kFallbackAttributes = {"legible", "strong", "modern"};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string template_with(std::string_view text, std::string_view concept_word) {
    std::string out;
    constexpr std::string_view slot = "[semantic concept]";
    std::size_t pos = 0;
    while (true) {
        const std::size_t hit = text.find(slot, pos);
        out.append(text.substr(pos, hit - pos));
        if (hit == std::string_view::npos) break;
        out.append(concept_word);
        pos = hit + slot.size();
    }
    return out;
}

constexpr std::string_view kConceptTemplate =
    "You will be given a concept word, and your task is to imagine this word as an art element. Describe the "
    "elements you would include to convey the essence of the concept word. Your description should list exactly "
    "three key symbols in a single line, formatted like this: symbol1, symbol2, or symbol3.\n"
    "\n"
    "Examples:\n"
    "Concept word: 'freedom'\n"
    "Task: Imagine 'freedom' as an art element. Describe the elements you would include to convey freedom, "
    "listing exactly three key symbols in a single line.\n"
    "Response: Wings or open book or flying birds.\n"
    "\n"
    "Concept word: 'Knowledge'\n"
    "Task: Imagine 'Knowledge' as an art element. Describe the elements you would include to convey Knowledge, "
    "listing exactly three key symbols in a single line.\n"
    "Response: Open book or lightbulb or owl.\n"
    "\n"
    "Concept word: 'Egypt'\n"
    "Task: Imagine 'Egypt' as an art element. Describe the elements you would include to convey Egypt, listing "
    "exactly three key symbols in a single line.\n"
    "Response: Pyramids or Ankh or Sphinx.\n"
    "\n"
    "Your task:\n"
    "Concept word: '[semantic concept]'\n"
    "Task: Imagine '[semantic concept]' as an art element. Describe the elements you would include to convey "
    "[semantic concept], listing exactly three key symbols in a single line.\n"
    "Response:";

constexpr std::string_view kAttributeTemplate =
    "Given the following font attributes\n"
    "(\"angular\", \"artistic\", \"attention-grabbing\", \"attractive\", \"bad\", \"boring\", \"calm\", "
    "\"capitals\", \"charming\", \"clumsy\", \"complex\", \"cursive\", \"delicate\", \"disorderly\", \"display\", "
    "\"dramatic\", \"formal\", \"fresh\", \"friendly\", \"gentle\", \"graceful\", \"happy\", \"italic\", "
    "\"legible\", \"modern\", \"monospace\", \"playful\", \"pretentious\", \"serif\", \"sharp\", \"sloppy\", "
    "\"soft\", \"strong\", \"technical\", \"thin\", \"warm\", \"wide\")\n"
    "Your task is to choose the top 3 attributes that align with an input concept and output them as a list.\n"
    "Examples:\n"
    "Concept:  freedom\n"
    "Answer: [\n"
    "    \"playful\",\n"
    "    \"fresh\",\n"
    "    \"modern\"\n"
    "]\n"
    "\n"
    "Concept: Elegance\n"
    "Answer: [\n"
    "    \"graceful\",\n"
    "    \"delicate\",\n"
    "    \"formal\"\n"
    "]\n"
    "\n"
    "Concept: [semantic concept]\n"
    "Answer:";

std::optional<std::array<std::string, 3>> three(std::vector<std::string> items) {
    if (items.size() != 3) return std::nullopt;
    return std::array<std::string, 3>{items[0], items[1], items[2]};
}

std::string join_response(const std::vector<std::string>& strings) {
    std::string out;
    for (std::size_t i = 0; i < strings.size(); ++i) out += (i ? ", " : "") + strings[i];
    return out;
}

}  // namespace

std::span<const std::string_view> font_attribute_vocabulary() { return kAttributes; }

bool is_font_attribute(std::string_view word) {
    return std::find(kAttributes.begin(), kAttributes.end(), word) != kAttributes.end();
}

PromptTable PromptTable::builtin() { return parse(kBundledPromptTable); }

PromptTable PromptTable::parse(std::string_view text) {
    PromptTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        const auto dot = t.rfind('.', eq);
        if (eq == std::string::npos || dot == std::string::npos) {
            throw PromptError("prompt table line " + std::to_string(number) + ": expected <concept>.<field> = a; b; c", t);
        }
        const std::string key = lower(trim(t.substr(0, dot)));
        const std::string field = lower(trim(t.substr(dot + 1, eq - dot - 1)));
        std::vector<std::string> items;
        std::istringstream values(t.substr(eq + 1));
        for (std::string item; std::getline(values, item, ';');) items.push_back(trim(item));
        const auto triple = three(items);
        if (!triple || key.empty()) {
            throw PromptError("prompt table line " + std::to_string(number) + ": expected exactly three items", t);
        }
        if (field == "objects") {
            table.objects_[key] = *triple;
        } else if (field == "attributes") {
            for (const std::string& a : *triple) {
                if (!is_font_attribute(a)) {
                    throw PromptError("prompt table line " + std::to_string(number) + ": '" + a + "' is not a font attribute", t);
                }
            }
            table.attributes_[key] = *triple;
        } else {
            throw PromptError("prompt table line " + std::to_string(number) + ": unknown field '" + field + "'", t);
        }
    }
    return table;
}

PromptTable PromptTable::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PromptError("cannot read prompt table " + path.string(), "");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::optional<std::array<std::string, 3>> PromptTable::objects(std::string_view concept_word) const {
    const auto it = objects_.find(lower(trim(concept_word)));
    if (it == objects_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::array<std::string, 3>> PromptTable::attributes(std::string_view concept_word) const {
    const auto it = attributes_.find(lower(trim(concept_word)));
    if (it == attributes_.end()) return std::nullopt;
    return it->second;
}

std::string concept_prompt(std::string_view concept_word) { return template_with(kConceptTemplate, concept_word); }

std::string font_attribute_prompt(std::string_view concept_word) {
    return template_with(kAttributeTemplate, concept_word);
}

std::optional<std::array<std::string, 3>> parse_objects(std::string_view response) {
    // First non-empty line, without a leading "Response:".
    std::istringstream in{std::string(response)};
    std::string line;
    while (std::getline(in, line) && trim(line).empty()) {
    }
    line = trim(line);
    if (lower(line).starts_with("response:")) line = trim(line.substr(9));
    while (!line.empty() && (line.back() == '.' || line.back() == '!')) line.pop_back();

    // Split on commas and on the word "or".
    std::vector<std::string> items;
    std::string current;
    std::istringstream words(line);
    auto flush = [&] {
        std::string t = trim(current);
        while (!t.empty() && (t.front() == '"' || t.front() == '\'')) t.erase(t.begin());
        while (!t.empty() && (t.back() == '"' || t.back() == '\'')) t.pop_back();
        if (!t.empty()) items.push_back(t);
        current.clear();
    };
    for (std::string word; words >> word;) {
        if (lower(word) == "or") {
            flush();
            continue;
        }
        const bool comma = word.back() == ',';
        if (comma) word.pop_back();
        current += (current.empty() ? "" : " ") + word;
        if (comma) flush();
    }
    flush();
    return three(items);
}

std::optional<std::array<std::string, 3>> parse_attributes(std::string_view response) {
    std::vector<std::string> items;
    const auto open = response.find('['), close = response.rfind(']');
    if (open != std::string_view::npos && close != std::string_view::npos && close > open) {
        const auto parsed = nlohmann::json::parse(response.substr(open, close - open + 1), nullptr, false);
        if (parsed.is_discarded() || !parsed.is_array()) return std::nullopt;
        for (const auto& v : parsed) {
            if (!v.is_string()) return std::nullopt;
            items.push_back(lower(trim(v.get<std::string>())));
        }
    } else {
        std::istringstream in{std::string(response)};
        for (std::string item; std::getline(in, item, ',');) {
            std::string t = lower(trim(item));
            if (t.starts_with("answer:")) t = trim(t.substr(7));
            while (!t.empty() && (t.front() == '"' || t.front() == '\'')) t.erase(t.begin());
            while (!t.empty() && (t.back() == '"' || t.back() == '\'' || t.back() == '.')) t.pop_back();
            items.push_back(t);
        }
    }
    for (const std::string& a : items) {
        if (!is_font_attribute(a)) return std::nullopt;
    }
    return three(items);
}

ConceptExpansion expand_concept_offline(std::string_view concept_word, const PromptTable& table) {
    ConceptExpansion e;
    e.concept_word = trim(concept_word);
    if (e.concept_word.empty()) throw PromptError("concept must not be empty", "");
    e.objects = table.objects(e.concept_word).value_or(std::array{e.concept_word, e.concept_word, e.concept_word});
    e.font_attributes = table.attributes(e.concept_word)
                            .value_or(std::array<std::string, 3>{std::string(kFallbackAttributes[0]),
                                                                 std::string(kFallbackAttributes[1]),
                                                                 std::string(kFallbackAttributes[2])});
    return e;
}

ConceptExpansion expand_concept_remote(std::string_view concept_word, const Scorer& scorer, int reasks) {
    ConceptExpansion e;
    e.concept_word = trim(concept_word);
    if (e.concept_word.empty()) throw PromptError("concept must not be empty", "");

    auto ask = [&](RequestKind kind, const std::string& prompt, auto parser, const char* what) {
        std::string raw;
        for (int attempt = 0; attempt <= reasks; ++attempt) {
            raw = join_response(request_strings(scorer, kind, prompt));
            if (auto parsed = parser(raw)) return *parsed;
        }
        throw PromptError(std::string("could not parse the ") + what + " answer after " + std::to_string(reasks + 1) +
                              " attempts: " + raw,
                          raw);
    };
    e.objects = ask(RequestKind::concepts, concept_prompt(e.concept_word), parse_objects, "concept");
    e.font_attributes = ask(RequestKind::font_attrs, font_attribute_prompt(e.concept_word), parse_attributes, "font attribute");
    return e;
}

PromptSet build_prompts(const ConceptExpansion& expansion, std::string_view suffix) {
    PromptSet p;
    for (std::size_t i = 0; i < 3; ++i) p.morph[i] = "a " + expansion.objects[i] + ". " + std::string(suffix);
    const auto& a = expansion.font_attributes;
    p.font = "This is a " + a[0] + ", " + a[1] + ", " + a[2] + " font";
    return p;
}

}  // namespace khattat
