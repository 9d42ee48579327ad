#include <doctest.h>

#include "taskmap/errors.hpp"
#include "taskmap/lexicon.hpp"
#include "taskmap/rng.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <string>

using namespace taskmap;

TEST_CASE("compile: section with three words") {
    const auto lex = lexicon::compile_lexicon_text("[social]\ngive\nbuddy\nlove\n");
    REQUIRE(lex.categories == std::vector<std::string>{"social"});
    CHECK(lex.patterns[0].exact == std::vector<std::string>{"buddy", "give", "love"});
    CHECK(lex.patterns[0].prefixes.empty());
}

TEST_CASE("compile: interior wildcard is rejected") {
    try {
        lexicon::compile_lexicon_text("[x]\nde*term\n");
        FAIL("expected BadWildcard");
    } catch (const DataError& e) {
        CHECK(e.kind() == "BadWildcard");
    }
    try {
        lexicon::compile_lexicon_text("[x]\n*\n");
        FAIL("expected BadWildcard");
    } catch (const DataError& e) {
        CHECK(e.kind() == "BadWildcard");
    }
}

TEST_CASE("compile: a word may live in several categories") {
    const auto lex = lexicon::compile_lexicon_text("[a]\nlove\n[b]\nlove\nother\n");
    CHECK(lex.matches(0, "love"));
    CHECK(lex.matches(1, "love"));
}

TEST_CASE("compile: empty category, stray pattern, duplicates") {
    try {
        lexicon::compile_lexicon_text("[a]\nword\n[empty]\n");
        FAIL("expected EmptyCategory");
    } catch (const DataError& e) {
        CHECK(e.kind() == "EmptyCategory");
        CHECK(std::string(e.what()).find("empty") != std::string::npos);
    }
    try {
        lexicon::compile_lexicon_text("word-before-header\n");
        FAIL("expected ParseError");
    } catch (const DataError& e) {
        CHECK(e.kind() == "ParseError");
    }
    const auto lex = lexicon::compile_lexicon_text("[a]\nword\nWORD\nword\n");
    CHECK(lex.patterns[0].exact.size() == 1);
}

TEST_CASE("compile: comments and blank lines are ignored") {
    const auto lex = lexicon::compile_lexicon_text("# header comment\n\n[a]\n# note\nword\n\n");
    CHECK(lex.patterns[0].exact == std::vector<std::string>{"word"});
}

TEST_CASE("tokenize: stated rule cases") {
    const auto t1 = lexicon::tokenize("Don't panic!");
    CHECK(t1.tokens == std::vector<std::string>{"don't", "panic"});
    CHECK(t1.word_count == 2);

    const auto t2 = lexicon::tokenize("");
    CHECK(t2.tokens.empty());
    CHECK(t2.word_count == 0);

    const auto t3 = lexicon::tokenize("C1 to C11");
    CHECK(t3.tokens == std::vector<std::string>{"c1", "to", "c11"});
    CHECK(t3.word_count == 3);

    // pure numbers are tokens but not words
    const auto t4 = lexicon::tokenize("42 files in 2008");
    CHECK(t4.tokens == std::vector<std::string>{"42", "files", "in", "2008"});
    CHECK(t4.word_count == 2);
}

TEST_CASE("score_text: the 10-in-200 social example is exact") {
    std::string text;
    for (int i = 0; i < 10; ++i) text += "Buddy ";
    for (int i = 0; i < 190; ++i) text += "the ";
    const auto s = lexicon::score_text(text, lexicon::demo_lexicon());
    CHECK(s.word_count == 200);
    const auto social = lexicon::demo_lexicon().category_index("social");
    CHECK(s.percentages[social] == 5.0);
}

TEST_CASE("score_text: hand-counted cogmech sentence") {
    const auto& lex = lexicon::demo_lexicon();
    const auto s = lexicon::score_text("i think we should consider this and determine the fix", lex);
    CHECK(s.word_count == 10);
    CHECK(s.percentages[lex.category_index("cogmech")] == 30.0);
}

TEST_CASE("score_text: no matching pattern means all zeros") {
    const auto lex = lexicon::compile_lexicon_text("[a]\nzzz\n[b]\nqqq*\n");
    const auto s = lexicon::score_text("nothing here matches at all", lex);
    for (double p : s.percentages) CHECK(p == 0.0);
}

TEST_CASE("score_text: empty text is an error the caller handles") {
    try {
        lexicon::score_text("12 434 99", lexicon::demo_lexicon());
        FAIL("expected EmptyText");
    } catch (const DataError& e) {
        CHECK(e.kind() == "EmptyText");
    }
}

TEST_CASE("score_work_item pools counts before dividing") {
    const auto& lex = lexicon::demo_lexicon();
    const auto social = lex.category_index("social");

    // 2 hits / 50 words and 3 hits / 50 words -> 5 / 100 = 5.0
    auto make_msg = [](std::string id, int hits, int words) {
        model::Message m;
        m.id = std::move(id);
        m.work_item_id = "w";
        std::string text;
        for (int i = 0; i < hits; ++i) text += "buddy ";
        for (int i = 0; i < words - hits; ++i) text += "the ";
        m.text = text;
        return m;
    };
    const auto m1 = make_msg("m1", 2, 50);
    const auto m2 = make_msg("m2", 3, 50);
    const auto p = lexicon::score_work_item("w", {&m1, &m2}, lex);
    CHECK(p.word_count == 100);
    CHECK(p.percentages[social] == 5.0);

    // pooled 1/100 = 1.0, not the mean of percentages (5.5)
    const auto m3 = make_msg("m3", 1, 10);
    const auto m4 = make_msg("m4", 0, 90);
    const auto q = lexicon::score_work_item("w", {&m3, &m4}, lex);
    CHECK(q.percentages[social] == 1.0);
}

TEST_CASE("score_work_item of a single message equals score_text") {
    const auto& lex = lexicon::demo_lexicon();
    model::Message m;
    m.id = "m1";
    m.work_item_id = "w";
    m.text = "we love to give thanks and review the build together";
    const auto p = lexicon::score_work_item("w", {&m}, lex);
    const auto s = lexicon::score_text(m.text, lex);
    CHECK(p.word_count == s.word_count);
    for (std::size_t c = 0; c < lex.categories.size(); ++c)
        CHECK(p.percentages[c] == s.percentages[c]);
}

TEST_CASE("score_work_item: no scorable text raises NoScorableText") {
    const auto& lex = lexicon::demo_lexicon();
    model::Message m;
    m.id = "m1";
    m.work_item_id = "w9";
    m.text = "1234 5678";
    try {
        lexicon::score_work_item("w9", {&m}, lex);
        FAIL("expected NoScorableText");
    } catch (const DataError& e) {
        CHECK(e.kind() == "NoScorableText");
        CHECK(std::string(e.what()).find("w9") != std::string::npos);
    }
}

TEST_CASE("prefix semantics: determin* matches inflections, not predetermine") {
    const auto& lex = lexicon::demo_lexicon();
    const auto cog = lex.category_index("cogmech");
    CHECK(lex.matches(cog, "determine"));
    CHECK(lex.matches(cog, "determining"));
    CHECK(lex.matches(cog, "determined"));
    CHECK_FALSE(lex.matches(cog, "predetermine"));
}

TEST_CASE("property: percentages stay in [0,100] and duplication is invariant") {
    const auto& lex = lexicon::demo_lexicon();
    Rng rng(123);
    const std::vector<std::string> vocab = {"buddy", "the",   "think", "bad",   "great",
                                            "work",  "done",  "x9",    "of",    "love",
                                            "fail",  "plan",  "give",  "to",    "42"};
    for (int trial = 0; trial < 50; ++trial) {
        std::string text;
        const int len = 1 + rng.uniform_int(0, 60);
        for (int i = 0; i < len; ++i)
            text += vocab[static_cast<std::size_t>(
                        rng.uniform_int(0, static_cast<int>(vocab.size()) - 1))] + " ";
        model::Message m;
        m.id = "m";
        m.work_item_id = "w";
        m.text = text;
        lexicon::BehaviorProfile p;
        try {
            p = lexicon::score_work_item("w", {&m}, lex);
        } catch (const DataError&) {
            continue; // all-number draw
        }
        for (double pct : p.percentages) {
            CHECK(pct >= 0.0);
            CHECK(pct <= 100.0);
        }
        const auto doubled = lexicon::score_work_item("w", {&m, &m}, lex);
        for (std::size_t c = 0; c < lex.categories.size(); ++c)
            CHECK(doubled.percentages[c] == p.percentages[c]);
    }
}

TEST_CASE("property: production scorer agrees with the brute-force oracle") {
    const auto& lex = lexicon::demo_lexicon();
    Rng rng(321);
    const std::vector<std::string> vocab = {
        "buddy",    "the",  "thinking", "bad",  "greatest", "working", "done", "x9",
        "of",       "love", "failing",  "plan", "give",     "to",      "42",   "predetermine",
        "determin", "wins", "codee",    "jobs"};
    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        const int len = rng.uniform_int(0, 30);
        for (int i = 0; i < len; ++i)
            text += vocab[static_cast<std::size_t>(
                        rng.uniform_int(0, static_cast<int>(vocab.size()) - 1))] + " ";
        const auto brute = oracle::lexicon_hits_brute(text, lex);
        lexicon::TextScore prod;
        try {
            prod = lexicon::score_text(text, lex);
        } catch (const DataError&) {
            for (long long h : brute) CHECK(h == 0);
            continue;
        }
        for (std::size_t c = 0; c < lex.categories.size(); ++c)
            CHECK(prod.hits[c] == brute[c]);
    }
}

TEST_CASE("bundled demo lexicon file parses and matches the embedded copy") {
    const std::string path = std::string(TASKMAP_SOURCE_DIR) + "/data/demo.lex";
    const auto from_file = lexicon::compile_lexicon_file(path);
    const auto& embedded = lexicon::demo_lexicon();
    REQUIRE(from_file.categories == embedded.categories);
    CHECK(from_file.categories ==
          std::vector<std::string>{"social", "posemo", "negemo", "cogmech", "work", "achieve"});
    for (std::size_t c = 0; c < embedded.categories.size(); ++c) {
        CHECK(from_file.patterns[c].exact == embedded.patterns[c].exact);
        CHECK(from_file.patterns[c].prefixes == embedded.patterns[c].prefixes);
    }
}
