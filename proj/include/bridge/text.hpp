#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace bridge {

class Corpus;

// Token stream with byte spans back into the original text.
struct TokenizedText {
    std::vector<std::string> tokens;
    std::vector<std::pair<std::size_t, std::size_t>> source_spans;  // [start, end)

    std::size_t size() const { return tokens.size(); }
    bool empty() const { return tokens.empty(); }
    std::string joined() const;
};

// Shared tokenizer settings. The lexical index, the dense encoder and the
// alignment policy must all tokenize identically, so anything that changes
// token output is carried here and folded into config_hash().
struct TokenizerConfig {
    std::set<std::string> stopwords;  // off by default; loaded from a file of one term per line

    std::uint64_t config_hash() const;
};

TokenizerConfig load_stopword_file(const std::string& path);

// Lowercased maximal runs of word characters; everything else separates.
// ASCII is classified exactly; non-ASCII codepoints count as word
// characters unless they fall in common Unicode space/punctuation blocks.
// Case folding is ASCII-only.
TokenizedText tokenize(std::string_view text);
TokenizedText tokenize(std::string_view text, const TokenizerConfig& config);

// Smoothed BM25 idf: ln((N - df + 0.5) / (df + 0.5) + 1). The +1 keeps the
// value non-negative for terms present in most documents.
double idf_from_df(std::uint64_t doc_frequency, std::uint64_t total_docs);

class Vocabulary {
public:
    struct Entry {
        std::uint32_t term_id = 0;
        std::uint32_t doc_frequency = 0;
    };

    Vocabulary() = default;

    const Entry* find(std::string_view term) const;
    std::size_t size() const { return terms_.size(); }
    std::uint64_t total_docs() const { return total_docs_; }
    const TokenizerConfig& tokenizer_config() const { return tokenizer_config_; }
    const std::map<std::string, Entry, std::less<>>& terms() const { return terms_; }

    // Unseen terms score with df = 0 (the smoothed maximum).
    double idf(std::string_view term) const;

    // Reconstruction from serialized parts (checkpoint loading).
    static Vocabulary from_parts(const std::vector<std::tuple<std::string, std::uint32_t, std::uint32_t>>& terms,
                                 std::uint64_t total_docs, TokenizerConfig config);

    friend Vocabulary build_vocabulary(const Corpus& corpus, const TokenizerConfig& config);

private:
    std::map<std::string, Entry, std::less<>> terms_;
    std::uint64_t total_docs_ = 0;
    TokenizerConfig tokenizer_config_;
};

// Term ids are assigned in order of first appearance over the corpus, so a
// rebuild on the same corpus is identical.
Vocabulary build_vocabulary(const Corpus& corpus, const TokenizerConfig& config = {});

}  // namespace bridge
