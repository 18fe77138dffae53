#include "bridge/bm25.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "bridge/error.hpp"
#include "json.hpp"

namespace bridge {

InvertedIndex InvertedIndex::build(const Corpus& corpus, const TokenizerConfig& config, double k1,
                                   double b) {
    if (k1 <= 0.0) throw Error(ErrorKind::config, "bm25: k1 must be > 0");
    if (b < 0.0 || b > 1.0) throw Error(ErrorKind::config, "bm25: b must be in [0, 1]");

    InvertedIndex index;
    index.k1_ = k1;
    index.b_ = b;
    index.tokenizer_hash_ = config.config_hash();

    std::uint64_t total_len = 0;
    std::unordered_map<std::string, std::uint32_t> tf;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const Document& doc = corpus.at(i);
        TokenizedText toks = tokenize(doc.text, config);
        index.doc_ids_.push_back(doc.doc_id);
        index.doc_index_by_id_.emplace(doc.doc_id, static_cast<std::uint32_t>(i));
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(toks.size()));
        total_len += toks.size();

        tf.clear();
        for (const std::string& t : toks.tokens) ++tf[t];
        for (const auto& [term, count] : tf) {
            index.postings_[term].push_back(
                Posting{static_cast<std::uint32_t>(i), count});
        }
    }
    // Postings are kept sorted by doc_id (the external, stable key), not by
    // insertion position.
    for (auto& [term, plist] : index.postings_) {
        std::sort(plist.begin(), plist.end(), [&](const Posting& a, const Posting& p) {
            return index.doc_ids_[a.doc_index] < index.doc_ids_[p.doc_index];
        });
    }
    index.average_doc_length_ =
        corpus.empty() ? 0.0 : static_cast<double>(total_len) / static_cast<double>(corpus.size());
    return index;
}

double InvertedIndex::term_doc_score(double idf, std::uint32_t tf, std::uint32_t doc_len) const {
    const double len_norm =
        average_doc_length_ > 0.0
            ? 1.0 - b_ + b_ * static_cast<double>(doc_len) / average_doc_length_
            : 1.0;
    const double t = static_cast<double>(tf);
    return idf * t * (k1_ + 1.0) / (t + k1_ * len_norm);
}

double InvertedIndex::score(const std::vector<std::string>& query_tokens,
                            std::string_view doc_id) const {
    auto doc_it = doc_index_by_id_.find(doc_id);
    if (doc_it == doc_index_by_id_.end()) {
        throw Error(ErrorKind::data, "bm25: unknown doc_id \"" + std::string(doc_id) + "\"");
    }
    const std::uint32_t doc_index = doc_it->second;
    const std::uint32_t doc_len = doc_lengths_[doc_index];

    std::map<std::string, std::uint32_t> counts;
    for (const std::string& t : query_tokens) ++counts[t];

    double total = 0.0;
    for (const auto& [term, multiplicity] : counts) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& plist = it->second;
        const double idf = idf_from_df(plist.size(), doc_ids_.size());
        auto pit = std::lower_bound(
            plist.begin(), plist.end(), doc_id, [&](const Posting& p, std::string_view id) {
                return std::string_view(doc_ids_[p.doc_index]) < id;
            });
        if (pit == plist.end() || doc_ids_[pit->doc_index] != doc_id) continue;
        total += multiplicity * term_doc_score(idf, pit->term_frequency, doc_len);
    }
    return total;
}

RankedList InvertedIndex::search(const std::vector<std::string>& query_tokens, int k) const {
    if (k < 1) throw Error(ErrorKind::usage, "bm25: k must be >= 1");
    RankedList result;
    const std::size_t n = doc_ids_.size();
    if (n == 0) return result;

    std::map<std::string, std::uint32_t> counts;
    for (const std::string& t : query_tokens) ++counts[t];

    std::vector<double> scores(n, 0.0);
    for (const auto& [term, multiplicity] : counts) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double idf = idf_from_df(it->second.size(), n);
        for (const Posting& p : it->second) {
            scores[p.doc_index] +=
                multiplicity * term_doc_score(idf, p.term_frequency, doc_lengths_[p.doc_index]);
        }
    }

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), n);
    auto better = [&](std::uint32_t a, std::uint32_t b2) {
        if (scores[a] != scores[b2]) return scores[a] > scores[b2];
        return doc_ids_[a] < doc_ids_[b2];
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                      better);
    result.items.reserve(top);
    for (std::size_t i = 0; i < top; ++i) {
        result.items.push_back(RankedItem{doc_ids_[order[i]], scores[order[i]]});
    }
    return result;
}

void InvertedIndex::save(const std::string& path) const {
    nlohmann::json j;
    j["kind"] = "bm25_index";
    j["format_version"] = 1;
    j["k1"] = k1_;
    j["b"] = b_;
    j["tokenizer_hash"] = tokenizer_hash_;
    j["average_doc_length"] = average_doc_length_;
    j["doc_ids"] = doc_ids_;
    j["doc_lengths"] = doc_lengths_;
    nlohmann::json postings = nlohmann::json::object();
    for (const auto& [term, plist] : postings_) {
        nlohmann::json arr = nlohmann::json::array();
        for (const Posting& p : plist) arr.push_back({p.doc_index, p.term_frequency});
        postings[term] = std::move(arr);
    }
    j["postings"] = std::move(postings);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write bm25 index: " + path);
    out << j.dump() << "\n";
}

InvertedIndex InvertedIndex::load(const std::string& path,
                                  std::uint64_t expected_tokenizer_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open bm25 index: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || j.value("kind", "") != std::string("bm25_index")) {
        throw Error(ErrorKind::data, "not a bm25 index file: " + path);
    }
    InvertedIndex index;
    index.k1_ = j.at("k1").get<double>();
    index.b_ = j.at("b").get<double>();
    index.tokenizer_hash_ = j.at("tokenizer_hash").get<std::uint64_t>();
    if (expected_tokenizer_hash != 0 && index.tokenizer_hash_ != expected_tokenizer_hash) {
        throw Error(ErrorKind::config,
                    "bm25 index was built with a different tokenizer configuration: " + path);
    }
    index.average_doc_length_ = j.at("average_doc_length").get<double>();
    index.doc_ids_ = j.at("doc_ids").get<std::vector<std::string>>();
    index.doc_lengths_ = j.at("doc_lengths").get<std::vector<std::uint32_t>>();
    for (std::size_t i = 0; i < index.doc_ids_.size(); ++i) {
        index.doc_index_by_id_.emplace(index.doc_ids_[i], static_cast<std::uint32_t>(i));
    }
    for (const auto& [term, arr] : j.at("postings").items()) {
        auto& plist = index.postings_[term];
        for (const auto& pair : arr) {
            plist.push_back(Posting{pair.at(0).get<std::uint32_t>(), pair.at(1).get<std::uint32_t>()});
        }
    }
    return index;
}

}  // namespace bridge
