#include "taskmap/lexicon.hpp"

#include "taskmap/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace taskmap::lexicon {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_token_char(unsigned char c) {
    return std::isalpha(c) || std::isdigit(c) || c == '\'';
}

std::string_view trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

std::size_t Lexicon::category_index(std::string_view name) const {
    for (std::size_t i = 0; i < categories.size(); ++i)
        if (categories[i] == name) return i;
    return static_cast<std::size_t>(-1);
}

bool Lexicon::matches(std::size_t category, std::string_view token) const {
    const PatternSet& ps = patterns.at(category);
    if (std::binary_search(ps.exact.begin(), ps.exact.end(), token)) return true;
    for (const auto& prefix : ps.prefixes)
        if (token.size() >= prefix.size() && token.compare(0, prefix.size(), prefix) == 0)
            return true;
    return false;
}

Lexicon compile_lexicon_text(const std::string& text) {
    Lexicon lex;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::ptrdiff_t current = -1;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                fail("ParseError", "line " + std::to_string(line_no) + ": malformed section header '" +
                                       std::string(line) + "'");
            std::string name = lowercase(trim(line.substr(1, line.size() - 2)));
            if (name.empty())
                fail("ParseError", "line " + std::to_string(line_no) + ": empty category name");
            if (lex.category_index(name) != static_cast<std::size_t>(-1))
                fail("ParseError", "line " + std::to_string(line_no) + ": duplicate category '" + name + "'");
            lex.categories.push_back(name);
            lex.patterns.emplace_back();
            current = static_cast<std::ptrdiff_t>(lex.categories.size()) - 1;
            continue;
        }
        if (current < 0)
            fail("ParseError", "line " + std::to_string(line_no) + ": pattern before any [category] header");
        std::string pat = lowercase(line);
        const auto star = pat.find('*');
        if (star != std::string::npos && star != pat.size() - 1)
            fail("BadWildcard", "'" + pat + "': '*' may only appear as the final character");
        auto& ps = lex.patterns[static_cast<std::size_t>(current)];
        if (star != std::string::npos) {
            pat.pop_back();
            if (pat.empty()) fail("BadWildcard", "'*': wildcard needs a non-empty stem");
            ps.prefixes.push_back(std::move(pat));
        } else {
            ps.exact.push_back(std::move(pat));
        }
    }

    for (std::size_t i = 0; i < lex.categories.size(); ++i) {
        auto& ps = lex.patterns[i];
        std::sort(ps.exact.begin(), ps.exact.end());
        ps.exact.erase(std::unique(ps.exact.begin(), ps.exact.end()), ps.exact.end());
        std::sort(ps.prefixes.begin(), ps.prefixes.end());
        ps.prefixes.erase(std::unique(ps.prefixes.begin(), ps.prefixes.end()), ps.prefixes.end());
        if (ps.exact.empty() && ps.prefixes.empty())
            fail("EmptyCategory", "category '" + lex.categories[i] + "' has no patterns");
    }
    return lex;
}

Lexicon compile_lexicon_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("MissingFile", "cannot open lexicon file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return compile_lexicon_text(buf.str());
}

const std::string& demo_lexicon_text() {
    static const std::string text = R"(# Demo word-category dictionary.
# Six behavior categories; a pattern is an exact word or a prefix ending
# in '*'. Categories may overlap.

[social]
give
buddy
love
talk*
share*
friend*
team*
meet*
discuss*
thank*
together
everyone
neighbor*
family

[posemo]
love
great*
good
nice*
happy*
excellent*
awesome
perfect*
glad
improve*
win*
best

[negemo]
bad
hate*
annoy*
fail*
wrong*
broke*
break*
worry*
frustrat*
ugly
nasty
terrible*
worse
worst

[cogmech]
think
consider*
determin*
because
reason*
understand*
analyz*
logic*
idea*
wonder*
figure*
assume*

[work]
work*
task*
project*
deadline*
review*
plan*
manag*
report*
schedul*
code*
build*
job*

[achieve]
achiev*
complet*
finish*
done
succe*
accomplish*
goal*
deliver*
solve*
resolv*
win*
master*
)";
    return text;
}

const Lexicon& demo_lexicon() {
    static const Lexicon lex = compile_lexicon_text(demo_lexicon_text());
    return lex;
}

TokenList tokenize(std::string_view text) {
    TokenList out;
    std::string token;
    bool has_letter = false;
    auto flush = [&] {
        if (token.empty()) return;
        if (has_letter) ++out.word_count;
        out.tokens.push_back(std::move(token));
        token.clear();
        has_letter = false;
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_token_char(c)) {
            if (std::isalpha(c)) has_letter = true;
            token.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

TextScore score_text(std::string_view text, const Lexicon& lex) {
    const TokenList toks = tokenize(text);
    if (toks.word_count == 0)
        fail("EmptyText", "no scorable words in text");
    TextScore score;
    score.word_count = toks.word_count;
    score.hits.assign(lex.categories.size(), 0);
    for (const auto& token : toks.tokens) {
        if (token.find_first_of("abcdefghijklmnopqrstuvwxyz") == std::string::npos)
            continue; // only word tokens are matched
        for (std::size_t c = 0; c < lex.categories.size(); ++c)
            if (lex.matches(c, token)) ++score.hits[c];
    }
    score.percentages.resize(lex.categories.size());
    for (std::size_t c = 0; c < lex.categories.size(); ++c)
        score.percentages[c] =
            100.0 * static_cast<double>(score.hits[c]) / static_cast<double>(score.word_count);
    return score;
}

BehaviorProfile score_work_item(const std::string& work_item_id,
                                const std::vector<const model::Message*>& messages,
                                const Lexicon& lex) {
    long long total_words = 0;
    std::vector<long long> hits(lex.categories.size(), 0);
    for (const auto* msg : messages) {
        const TokenList toks = tokenize(msg->text);
        total_words += toks.word_count;
        for (const auto& token : toks.tokens) {
            if (token.find_first_of("abcdefghijklmnopqrstuvwxyz") == std::string::npos) continue;
            for (std::size_t c = 0; c < lex.categories.size(); ++c)
                if (lex.matches(c, token)) ++hits[c];
        }
    }
    if (total_words == 0)
        fail("NoScorableText", "work item '" + work_item_id + "' has no scorable words");
    BehaviorProfile profile;
    profile.work_item_id = work_item_id;
    profile.word_count = total_words;
    profile.percentages.resize(lex.categories.size());
    for (std::size_t c = 0; c < lex.categories.size(); ++c)
        profile.percentages[c] =
            100.0 * static_cast<double>(hits[c]) / static_cast<double>(total_words);
    return profile;
}

} // namespace taskmap::lexicon
