#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bridge/corpus.hpp"
#include "bridge/text.hpp"

namespace bridge {

// Okapi BM25 inverted index. Immutable after build; idf is frozen at build
// time, so adding documents means rebuilding. Rebuilding on an identical
// corpus serializes byte-identically.
class InvertedIndex {
public:
    struct Posting {
        std::uint32_t doc_index = 0;  // position in corpus order
        std::uint32_t term_frequency = 0;
    };

    static constexpr double kDefaultK1 = 1.2;
    static constexpr double kDefaultB = 0.75;

    InvertedIndex() = default;

    static InvertedIndex build(const Corpus& corpus, const TokenizerConfig& config = {},
                               double k1 = kDefaultK1, double b = kDefaultB);

    // Score of one document against a token list. A query term repeated n
    // times contributes n times. Unknown doc_id is an error.
    double score(const std::vector<std::string>& query_tokens, std::string_view doc_id) const;

    // Top-k by score, ties broken by ascending doc_id. Documents matching
    // no query term participate with score 0.
    RankedList search(const std::vector<std::string>& query_tokens, int k) const;

    std::size_t num_docs() const { return doc_ids_.size(); }
    double average_doc_length() const { return average_doc_length_; }
    double k1() const { return k1_; }
    double b() const { return b_; }
    std::uint64_t tokenizer_hash() const { return tokenizer_hash_; }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
    std::uint32_t doc_length(std::size_t doc_index) const { return doc_lengths_.at(doc_index); }

    void save(const std::string& path) const;
    // expected_tokenizer_hash guards against mixing indexes across
    // tokenizer configurations; pass 0 to skip the check explicitly.
    static InvertedIndex load(const std::string& path, std::uint64_t expected_tokenizer_hash);

private:
    double term_doc_score(double idf, std::uint32_t tf, std::uint32_t doc_len) const;

    std::map<std::string, std::vector<Posting>> postings_;  // postings sorted by doc_id
    std::vector<std::string> doc_ids_;                      // corpus order
    std::vector<std::uint32_t> doc_lengths_;                // corpus order
    std::map<std::string, std::uint32_t, std::less<>> doc_index_by_id_;
    double average_doc_length_ = 0.0;
    double k1_ = kDefaultK1;
    double b_ = kDefaultB;
    std::uint64_t tokenizer_hash_ = 0;
};

}  // namespace bridge
