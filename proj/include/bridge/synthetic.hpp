#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bridge/corpus.hpp"

namespace bridge {

// Controlled noisy-query benchmark. Documents come in small groups sharing
// ambiguous topic terms; each document additionally carries its own unique
// key terms. Questions mix conversational filler with topic terms only, so
// the raw question cannot separate a document from its group. The pseudo
// caption carries the disambiguating unique terms, one repeated topic term,
// distractor key terms from other documents, and more filler. Rewriting
// that keeps key terms and sheds filler is measurably rewarded.
struct SyntheticSpec {
    int num_docs = 200;
    int num_queries = 50;
    std::uint64_t seed = 7;

    int group_size = 5;
    int topic_terms_per_group = 3;
    int unique_terms_per_doc = 3;
    int filler_per_doc = 6;
    int question_filler = 7;
    int question_topic_terms = 2;
    int caption_unique_terms = 2;
    int caption_distractors = 2;
    int caption_filler = 3;
};

struct SyntheticDataset {
    Corpus corpus;
    std::vector<MultimodalQuery> queries;
    RelevanceJudgments qrels;
};

SyntheticDataset gen_synthetic(const SyntheticSpec& spec);

// Writes corpus.jsonl, queries.jsonl and qrels.tsv under dir.
void write_synthetic(const SyntheticDataset& dataset, const std::string& dir);

}  // namespace bridge
