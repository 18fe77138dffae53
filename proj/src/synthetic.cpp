#include "bridge/synthetic.hpp"

#include <filesystem>
#include <set>
#include <sstream>

#include "bridge/error.hpp"
#include "bridge/rng.hpp"

namespace bridge {

namespace {

const std::vector<std::string>& filler_pool() {
    static const std::vector<std::string> kPool = {
        "please", "help",    "why",     "does",      "my",      "keep",  "failing", "anyone",
        "know",   "how",     "can",     "fix",       "this",    "when",  "trying",  "understand",
        "issue",  "problem", "really",  "stuck",     "been",    "hours", "tried",   "everything",
        "thanks", "advance", "wondering", "what",    "best",    "way",   "should",  "would",
        "could",  "also",    "just",    "still",     "need",    "some",  "advice",  "about"};
    return kPool;
}

const std::vector<std::string>& domain_pool() {
    static const std::vector<std::string> kDomains = {"systems", "biology", "law", "mathematics",
                                                      "applications"};
    return kDomains;
}

// Pronounceable deterministic nonsense words, disjoint from the filler pool.
class WordForge {
public:
    explicit WordForge(std::mt19937_64& rng) : rng_(rng) {
        for (const std::string& w : filler_pool()) used_.insert(w);
    }

    std::string fresh() {
        static const std::vector<std::string> kSyllables = {
            "ba", "be", "bi", "bo", "bu", "da", "de", "di", "do", "du", "ka", "ke", "ki",
            "ko", "ku", "la", "le", "li", "lo", "lu", "ma", "me", "mi", "mo", "mu", "na",
            "ne", "ni", "no", "nu", "ra", "re", "ri", "ro", "ru", "sa", "se", "si", "so",
            "su", "ta", "te", "ti", "to", "tu", "va", "ve", "vi", "vo", "vu", "za", "ze",
            "zi", "zo", "zu"};
        while (true) {
            std::string word;
            const std::size_t syllables = 3 + next_index(rng_, 2);
            for (std::size_t s = 0; s < syllables; ++s) {
                word += kSyllables[next_index(rng_, kSyllables.size())];
            }
            if (used_.insert(word).second) return word;
        }
    }

private:
    std::mt19937_64& rng_;
    std::set<std::string> used_;
};

std::vector<std::string> sample_without_replacement(const std::vector<std::string>& pool,
                                                    std::size_t count, std::mt19937_64& rng) {
    std::vector<std::size_t> indices(pool.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    shuffle_in_place(indices, rng);
    count = std::min(count, pool.size());
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(pool[indices[i]]);
    return out;
}

std::string zero_pad(int value, int width) {
    std::ostringstream out;
    out << value;
    std::string digits = out.str();
    while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
    return digits;
}

std::string join(const std::vector<std::string>& words) {
    std::string out;
    for (const std::string& w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

}  // namespace

SyntheticDataset gen_synthetic(const SyntheticSpec& spec) {
    if (spec.num_docs < 1) throw Error(ErrorKind::usage, "gen-synthetic: need at least 1 doc");
    if (spec.num_queries < 0) throw Error(ErrorKind::usage, "gen-synthetic: queries must be >= 0");
    if (spec.group_size < 1) throw Error(ErrorKind::usage, "gen-synthetic: group size must be >= 1");

    auto rng = substream(spec.seed, "data-gen");
    WordForge words(rng);

    const int num_groups = (spec.num_docs + spec.group_size - 1) / spec.group_size;
    std::vector<std::vector<std::string>> topic_terms(num_groups);
    for (int g = 0; g < num_groups; ++g) {
        for (int t = 0; t < spec.topic_terms_per_group; ++t) topic_terms[g].push_back(words.fresh());
    }
    std::vector<std::vector<std::string>> unique_terms(spec.num_docs);
    for (int i = 0; i < spec.num_docs; ++i) {
        for (int t = 0; t < spec.unique_terms_per_doc; ++t) unique_terms[i].push_back(words.fresh());
    }

    SyntheticDataset dataset;
    const int id_width = static_cast<int>(std::to_string(spec.num_docs).size());
    for (int i = 0; i < spec.num_docs; ++i) {
        const int group = i / spec.group_size;
        Document doc;
        doc.doc_id = "d" + zero_pad(i + 1, id_width);
        doc.domain = domain_pool()[group % domain_pool().size()];

        std::vector<std::string> body;
        for (const std::string& t : topic_terms[group]) {
            body.push_back(t);
            body.push_back(t);
        }
        for (const std::string& u : unique_terms[i]) {
            body.push_back(u);
            body.push_back(u);
        }
        for (std::string& f : sample_without_replacement(filler_pool(), spec.filler_per_doc, rng)) {
            body.push_back(std::move(f));
        }
        shuffle_in_place(body, rng);
        doc.text = join(body);
        dataset.corpus.add(std::move(doc));
    }

    // Gold docs: distinct while possible, with replacement after that.
    std::vector<std::size_t> gold_indices;
    if (spec.num_queries <= spec.num_docs) {
        std::vector<std::size_t> all(spec.num_docs);
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        shuffle_in_place(all, rng);
        gold_indices.assign(all.begin(), all.begin() + spec.num_queries);
    } else {
        for (int i = 0; i < spec.num_queries; ++i) {
            gold_indices.push_back(next_index(rng, static_cast<std::uint64_t>(spec.num_docs)));
        }
    }

    const int query_width = static_cast<int>(std::to_string(std::max(1, spec.num_queries)).size());
    for (int qi = 0; qi < spec.num_queries; ++qi) {
        const std::size_t gold = gold_indices[static_cast<std::size_t>(qi)];
        const int group = static_cast<int>(gold) / spec.group_size;
        const Document& gold_doc = dataset.corpus.at(gold);

        MultimodalQuery query;
        query.query_id = "q" + zero_pad(qi + 1, query_width);
        query.domain = gold_doc.domain;

        // Question: conversational filler around ambiguous topic terms.
        std::vector<std::string> asked_topics = sample_without_replacement(
            topic_terms[group], static_cast<std::size_t>(spec.question_topic_terms), rng);
        std::vector<std::string> question_words = sample_without_replacement(
            filler_pool(), static_cast<std::size_t>(spec.question_filler), rng);
        for (const std::string& t : asked_topics) question_words.push_back(t);
        shuffle_in_place(question_words, rng);
        query.question_text = join(question_words);

        // Caption: disambiguating unique terms, one repeated topic term,
        // distractor key terms from other documents, and more filler.
        std::vector<std::string> caption_words = sample_without_replacement(
            unique_terms[gold], static_cast<std::size_t>(spec.caption_unique_terms), rng);
        if (!asked_topics.empty()) caption_words.push_back(asked_topics[0]);
        for (int d = 0; d < spec.caption_distractors && spec.num_docs > 1; ++d) {
            std::size_t other;
            do {
                other = next_index(rng, static_cast<std::uint64_t>(spec.num_docs));
            } while (other == gold);
            const auto& pool = unique_terms[other];
            caption_words.push_back(pool[next_index(rng, pool.size())]);
        }
        for (std::string& f :
             sample_without_replacement(filler_pool(), spec.caption_filler, rng)) {
            caption_words.push_back(std::move(f));
        }
        shuffle_in_place(caption_words, rng);
        query.image_refs.push_back("synthetic://img/" + query.query_id);
        query.cached_caption = join(caption_words);

        dataset.qrels.set(query.query_id, {Judgment{gold_doc.doc_id, 1}});
        dataset.queries.push_back(std::move(query));
    }
    return dataset;
}

void write_synthetic(const SyntheticDataset& dataset, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    save_corpus(dataset.corpus, (base / "corpus.jsonl").string());
    save_queries(dataset.queries, (base / "queries.jsonl").string());
    save_qrels(dataset.qrels, (base / "qrels.tsv").string());
}

}  // namespace bridge
