#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace bridge {

// One text-only document of the corpus.
struct Document {
    std::string doc_id;
    std::string domain;
    std::string text;
    // Unknown record fields, preserved verbatim across load/save.
    nlohmann::json extra = nlohmann::json::object();
};

class Corpus {
public:
    Corpus() = default;

    // Validates invariants: unique non-empty doc_id, non-blank text.
    void add(Document doc);

    std::size_t size() const { return docs_.size(); }
    bool empty() const { return docs_.empty(); }
    const std::vector<Document>& docs() const { return docs_; }
    const Document& at(std::size_t i) const { return docs_.at(i); }

    const Document* find(std::string_view doc_id) const;
    bool contains(std::string_view doc_id) const { return find(doc_id) != nullptr; }
    // Position of doc_id in insertion order; -1 if absent.
    std::ptrdiff_t index_of(std::string_view doc_id) const;

private:
    std::vector<Document> docs_;
    std::map<std::string, std::size_t, std::less<>> by_id_;
};

// A text question plus zero or more image references.
struct MultimodalQuery {
    std::string query_id;
    std::string domain;
    std::string question_text;
    std::vector<std::string> image_refs;
    std::optional<std::string> cached_caption;
    nlohmann::json extra = nlohmann::json::object();
};

struct Judgment {
    std::string doc_id;
    int gain = 0;  // non-negative graded relevance
};

// Graded relevance judgments. Queries with no positive judgment are dropped
// at load time (with a warning) instead of silently deflating metrics.
class RelevanceJudgments {
public:
    RelevanceJudgments() = default;

    void set(const std::string& query_id, std::vector<Judgment> judgments);

    bool has_query(std::string_view query_id) const;
    // All judgments for a query, sorted by doc_id. Empty if unknown query.
    const std::vector<Judgment>& judgments(std::string_view query_id) const;
    // Doc ids with gain > 0, sorted by doc_id.
    std::vector<std::string> positives(std::string_view query_id) const;
    // The gain of doc_id under query_id, 0 when unjudged.
    int gain(std::string_view query_id, std::string_view doc_id) const;
    // The single d+ used for rewards: highest gain, ties by ascending doc_id.
    std::optional<std::string> primary_positive(std::string_view query_id) const;

    std::size_t size() const { return entries_.size(); }
    const std::map<std::string, std::vector<Judgment>, std::less<>>& entries() const {
        return entries_;
    }
    const std::vector<std::string>& excluded_no_positive() const { return excluded_; }

    friend RelevanceJudgments load_qrels(const std::string& path, const Corpus* corpus);

private:
    std::map<std::string, std::vector<Judgment>, std::less<>> entries_;
    std::vector<std::string> excluded_;
};

struct RankedItem {
    std::string doc_id;
    double score = 0.0;
};

// Ordered retrieval output: scores non-increasing, doc ids distinct,
// length at most the requested k.
struct RankedList {
    std::string query_id;
    std::vector<RankedItem> items;
};

// JSONL, one record per line: {"doc_id", "domain", "text"}.
Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);

// JSONL: {"query_id", "domain", "question", "images", "caption"?}.
std::vector<MultimodalQuery> load_queries(const std::string& path);
void save_queries(const std::vector<MultimodalQuery>& queries, const std::string& path);

// TSV: query_id <TAB> doc_id <TAB> gain. When a corpus is given, every
// judged doc_id must resolve in it.
RelevanceJudgments load_qrels(const std::string& path, const Corpus* corpus = nullptr);
void save_qrels(const RelevanceJudgments& qrels, const std::string& path);

}  // namespace bridge
