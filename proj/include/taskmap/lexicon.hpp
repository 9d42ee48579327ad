#pragma once

#include "taskmap/model.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace taskmap::lexicon {

// Word-category dictionary. A pattern is an exact lowercase word or a
// lowercase prefix written as "stem*". Categories may share patterns.
struct Lexicon {
    struct PatternSet {
        std::vector<std::string> exact;    // sorted, unique
        std::vector<std::string> prefixes; // '*' stripped; sorted, unique
    };
    std::vector<std::string> categories; // ordered as declared
    std::vector<PatternSet> patterns;    // parallel to categories

    std::size_t category_index(std::string_view name) const; // npos if absent
    bool matches(std::size_t category, std::string_view token) const;
};

Lexicon compile_lexicon_text(const std::string& text);
Lexicon compile_lexicon_file(const std::string& path);

// Small dictionary bundled with the toolkit: six categories
// (social, posemo, negemo, cogmech, work, achieve).
const std::string& demo_lexicon_text();
const Lexicon& demo_lexicon();

struct TokenList {
    std::vector<std::string> tokens; // lowercased
    int word_count = 0;              // tokens containing at least one letter
};

// Tokens are maximal runs of letters, digits and apostrophes, lowercased.
// A token counts as a word iff it contains a letter.
TokenList tokenize(std::string_view text);

struct TextScore {
    int word_count = 0;
    std::vector<long long> hits;     // per category
    std::vector<double> percentages; // per category, 100 * hits / word_count
};

// Throws EmptyText when the text contains no words.
TextScore score_text(std::string_view text, const Lexicon& lex);

struct BehaviorProfile {
    std::string work_item_id;
    long long word_count = 0;
    std::vector<double> percentages; // parallel to lex.categories
};

// Pools counts across all messages of one item before dividing; this is not
// the mean of per-message percentages. Throws NoScorableText when the item
// has no words at all.
BehaviorProfile score_work_item(const std::string& work_item_id,
                                const std::vector<const model::Message*>& messages,
                                const Lexicon& lex);

} // namespace taskmap::lexicon
