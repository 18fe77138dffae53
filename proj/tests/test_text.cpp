#include <cmath>

#include "bridge/text.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bridge;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
    TokenizedText t = tokenize("Why does my SERVICE fail?");
    CHECK(t.tokens == std::vector<std::string>{"why", "does", "my", "service", "fail"});
    REQUIRE(t.source_spans.size() == 5);
    CHECK(t.source_spans[0] == std::pair<std::size_t, std::size_t>{0, 3});
    CHECK(t.source_spans[3] == std::pair<std::size_t, std::size_t>{12, 19});
}

TEST_CASE("tokenize of empty input is empty") {
    CHECK(tokenize("").tokens.empty());
    CHECK(tokenize("  ,.!?  ").tokens.empty());
}

TEST_CASE("tokenize splits mixed alphanumeric punctuation") {
    TokenizedText t = tokenize("nDCG@10 = 29.7");
    CHECK(t.tokens == std::vector<std::string>{"ndcg", "10", "29", "7"});
}

TEST_CASE("tokenize spans are increasing and non-overlapping") {
    TokenizedText t = tokenize("alpha beta-gamma  delta42");
    REQUIRE(t.tokens.size() == t.source_spans.size());
    for (std::size_t i = 0; i < t.source_spans.size(); ++i) {
        CHECK(t.source_spans[i].first < t.source_spans[i].second);
        if (i > 0) CHECK(t.source_spans[i].first >= t.source_spans[i - 1].second);
    }
}

TEST_CASE("tokenize is idempotent on its own joined output") {
    const std::vector<std::string> inputs = {
        "Why does my SERVICE fail?", "nDCG@10 = 29.7", "hello,   world!!", "a-b_c d",
        "unicode caf\xC3\xA9 touch\xC3\xA9"};
    for (const std::string& s : inputs) {
        TokenizedText first = tokenize(s);
        TokenizedText second = tokenize(first.joined());
        CHECK(first.tokens == second.tokens);
    }
}

TEST_CASE("stopword filtering drops configured terms") {
    TokenizerConfig config;
    config.stopwords = {"the", "a"};
    TokenizedText t = tokenize("The cat saw a dog", config);
    CHECK(t.tokens == std::vector<std::string>{"cat", "saw", "dog"});
    CHECK(config.config_hash() != TokenizerConfig{}.config_hash());
}

TEST_CASE("stopword file loads one term per line") {
    testutil::TempDir dir("stopwords");
    testutil::write_file(dir.file("stop.txt"), "the\nand\n\nof\n");
    TokenizerConfig config = load_stopword_file(dir.file("stop.txt"));
    CHECK(config.stopwords == std::set<std::string>{"the", "and", "of"});
}

TEST_CASE("vocabulary counts document frequency over distinct docs") {
    Corpus corpus = testutil::make_corpus({{"d1", "a b"}, {"d2", "b c"}});
    Vocabulary vocab = build_vocabulary(corpus);
    CHECK(vocab.size() == 3);
    CHECK(vocab.total_docs() == 2);
    CHECK(vocab.find("a")->doc_frequency == 1);
    CHECK(vocab.find("b")->doc_frequency == 2);
    CHECK(vocab.find("c")->doc_frequency == 1);
}

TEST_CASE("vocabulary of empty corpus is empty") {
    Corpus corpus;
    Vocabulary vocab = build_vocabulary(corpus);
    CHECK(vocab.size() == 0);
    CHECK(vocab.total_docs() == 0);
}

TEST_CASE("term repeated within one doc counts df once") {
    Corpus corpus = testutil::make_corpus({{"d1", "x x x"}});
    Vocabulary vocab = build_vocabulary(corpus);
    CHECK(vocab.find("x")->doc_frequency == 1);
}

TEST_CASE("term ids are dense and assigned in first-seen order") {
    Corpus corpus = testutil::make_corpus({{"d1", "zeta alpha"}, {"d2", "alpha beta"}});
    Vocabulary vocab = build_vocabulary(corpus);
    CHECK(vocab.find("zeta")->term_id == 0);
    CHECK(vocab.find("alpha")->term_id == 1);
    CHECK(vocab.find("beta")->term_id == 2);
}

TEST_CASE("idf matches the smoothed formula") {
    Corpus corpus = testutil::make_corpus({{"d1", "a b"}, {"d2", "b c"}});
    Vocabulary vocab = build_vocabulary(corpus);
    // N=2, df=1 -> ln 2; df=2 -> ln 1.2; unseen -> ln 6.
    CHECK(vocab.idf("a") == doctest::Approx(0.6931471805599453).epsilon(1e-12));
    CHECK(vocab.idf("b") == doctest::Approx(0.1823215567939546).epsilon(1e-12));
    CHECK(vocab.idf("never-seen") == doctest::Approx(1.791759469228055).epsilon(1e-12));
}

TEST_CASE("idf is non-increasing in df and never negative") {
    const std::uint64_t n = 50;
    double previous = idf_from_df(0, n);
    for (std::uint64_t df = 1; df <= n; ++df) {
        const double current = idf_from_df(df, n);
        CHECK(current <= previous);
        CHECK(current >= 0.0);
        previous = current;
    }
}

TEST_CASE("vocabulary rebuild from serialized parts matches the original") {
    Corpus corpus = testutil::make_corpus({{"d1", "a b"}, {"d2", "b c"}});
    Vocabulary vocab = build_vocabulary(corpus);
    std::vector<std::tuple<std::string, std::uint32_t, std::uint32_t>> parts;
    for (const auto& [term, entry] : vocab.terms()) {
        parts.emplace_back(term, entry.term_id, entry.doc_frequency);
    }
    Vocabulary rebuilt = Vocabulary::from_parts(parts, vocab.total_docs(), TokenizerConfig{});
    CHECK(rebuilt.size() == vocab.size());
    CHECK(rebuilt.idf("b") == vocab.idf("b"));
    CHECK(rebuilt.find("c")->term_id == vocab.find("c")->term_id);
}
