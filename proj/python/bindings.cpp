#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bridge/bm25.hpp"
#include "bridge/corpus.hpp"
#include "bridge/dense.hpp"
#include "bridge/error.hpp"
#include "bridge/forge.hpp"
#include "bridge/lens_trainer.hpp"
#include "bridge/metrics.hpp"
#include "bridge/pipeline.hpp"
#include "bridge/rng.hpp"
#include "bridge/synthetic.hpp"
#include "bridge/text.hpp"

namespace py = pybind11;
using namespace bridge;

namespace {

RankedList ranked_from_pairs(const std::vector<std::pair<std::string, double>>& items,
                             const std::string& query_id) {
    RankedList ranked;
    ranked.query_id = query_id;
    for (const auto& [doc_id, score] : items) ranked.items.push_back(RankedItem{doc_id, score});
    return ranked;
}

std::vector<std::pair<std::string, double>> ranked_to_pairs(const RankedList& ranked) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(ranked.items.size());
    for (const RankedItem& item : ranked.items) out.emplace_back(item.doc_id, item.score);
    return out;
}

RelevanceJudgments qrels_from_dict(const std::map<std::string, std::map<std::string, int>>& data) {
    RelevanceJudgments qrels;
    for (const auto& [query_id, docs] : data) {
        std::vector<Judgment> judgments;
        for (const auto& [doc_id, gain] : docs) judgments.push_back(Judgment{doc_id, gain});
        qrels.set(query_id, std::move(judgments));
    }
    return qrels;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "BRIDGE retrieval toolkit: query alignment (FORGE) and dense retrieval (LENS)";

    py::register_exception<Error>(m, "BridgeError");

    // --- text ---------------------------------------------------------
    m.def(
        "tokenize",
        [](const std::string& text) { return tokenize(text).tokens; },
        py::arg("text"), "Lowercased alphanumeric tokens of the input text.");
    m.def("idf_from_df", &idf_from_df, py::arg("doc_frequency"), py::arg("total_docs"));

    // --- corpus -------------------------------------------------------
    py::class_<Document>(m, "Document")
        .def(py::init([](std::string doc_id, std::string domain, std::string text) {
                 Document d;
                 d.doc_id = std::move(doc_id);
                 d.domain = std::move(domain);
                 d.text = std::move(text);
                 return d;
             }),
             py::arg("doc_id"), py::arg("domain"), py::arg("text"))
        .def_readonly("doc_id", &Document::doc_id)
        .def_readonly("domain", &Document::domain)
        .def_readonly("text", &Document::text);

    py::class_<Corpus>(m, "Corpus")
        .def(py::init<>())
        .def("add", &Corpus::add, py::arg("doc"))
        .def("__len__", &Corpus::size)
        .def("doc_ids",
             [](const Corpus& c) {
                 std::vector<std::string> ids;
                 for (const Document& d : c.docs()) ids.push_back(d.doc_id);
                 return ids;
             })
        .def("text_of", [](const Corpus& c, const std::string& doc_id) {
            const Document* doc = c.find(doc_id);
            if (!doc) throw Error(ErrorKind::data, "unknown doc_id " + doc_id);
            return doc->text;
        });

    m.def("load_corpus", &load_corpus, py::arg("path"));
    m.def("save_corpus", &save_corpus, py::arg("corpus"), py::arg("path"));

    // --- metrics ------------------------------------------------------
    m.def(
        "ndcg_at_k",
        [](const std::vector<std::pair<std::string, double>>& ranked,
           const std::map<std::string, int>& gains, int k) {
            RankedList list = ranked_from_pairs(ranked, "q");
            return ndcg_at_k(list, qrels_from_dict({{"q", gains}}), k);
        },
        py::arg("ranked"), py::arg("gains"), py::arg("k"),
        "nDCG@k of a ranked (doc_id, score) list against {doc_id: gain}.");
    m.def(
        "recall_at_k",
        [](const std::vector<std::pair<std::string, double>>& ranked,
           const std::map<std::string, int>& gains, int k) {
            RankedList list = ranked_from_pairs(ranked, "q");
            return recall_at_k(list, qrels_from_dict({{"q", gains}}), k);
        },
        py::arg("ranked"), py::arg("gains"), py::arg("k"));

    // --- bm25 ---------------------------------------------------------
    py::class_<InvertedIndex>(m, "InvertedIndex")
        .def_static(
            "build",
            [](const Corpus& corpus, double k1, double b) {
                return InvertedIndex::build(corpus, TokenizerConfig{}, k1, b);
            },
            py::arg("corpus"), py::arg("k1") = InvertedIndex::kDefaultK1,
            py::arg("b") = InvertedIndex::kDefaultB)
        .def("score",
             [](const InvertedIndex& index, const std::vector<std::string>& tokens,
                const std::string& doc_id) { return index.score(tokens, doc_id); })
        .def("search",
             [](const InvertedIndex& index, const std::vector<std::string>& tokens, int k) {
                 return ranked_to_pairs(index.search(tokens, k));
             })
        .def("num_docs", &InvertedIndex::num_docs)
        .def("save", &InvertedIndex::save)
        .def_static("load", &InvertedIndex::load, py::arg("path"),
                    py::arg("expected_tokenizer_hash") = 0);

    // --- dense --------------------------------------------------------
    py::class_<EncoderParameters>(m, "EncoderParameters")
        .def_readonly("dim", &EncoderParameters::dim)
        .def_readonly("idf_weighting", &EncoderParameters::idf_weighting)
        .def_readonly("parameter_version", &EncoderParameters::parameter_version);

    py::class_<VectorIndex>(m, "VectorIndex")
        .def("num_docs", &VectorIndex::num_docs)
        .def("dim", &VectorIndex::dim)
        .def("save", &VectorIndex::save)
        .def_static("load", &VectorIndex::load, py::arg("path"));

    m.def(
        "init_encoder",
        [](const Corpus& corpus, std::size_t dim, std::uint64_t seed, bool idf_weighting) {
            auto vocab = std::make_shared<Vocabulary>(build_vocabulary(corpus, TokenizerConfig{}));
            return init_encoder(std::move(vocab), dim, seed, idf_weighting);
        },
        py::arg("corpus"), py::arg("dim") = 64, py::arg("seed") = 0,
        py::arg("idf_weighting") = true,
        "Seeded random encoder over the corpus vocabulary.");
    m.def("build_vector_index", &VectorIndex::build, py::arg("params"), py::arg("corpus"));
    m.def(
        "dense_search",
        [](const EncoderParameters& params, const VectorIndex& index, const std::string& text,
           int k) { return ranked_to_pairs(dense_search(params, index, text, k)); },
        py::arg("params"), py::arg("index"), py::arg("query_text"), py::arg("k"));
    m.def(
        "encode_text",
        [](const EncoderParameters& params, const std::vector<std::string>& tokens) {
            return encode_text(params, tokens).values;
        },
        py::arg("params"), py::arg("tokens"));
    m.def(
        "cosine",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            EmbeddingVector va, vb;
            va.values = a;
            vb.values = b;
            return cosine(va, vb);
        },
        py::arg("a"), py::arg("b"));

    m.def("save_encoder", &save_encoder, py::arg("params"), py::arg("path"));
    m.def("load_encoder", &load_encoder, py::arg("path"));

    // --- lens trainer ---------------------------------------------------
    py::class_<LensTrainConfig>(m, "LensTrainConfig")
        .def(py::init<>())
        .def_readwrite("temperature", &LensTrainConfig::temperature)
        .def_readwrite("hard_negatives", &LensTrainConfig::hard_negatives)
        .def_readwrite("batch_size", &LensTrainConfig::batch_size)
        .def_readwrite("learning_rate", &LensTrainConfig::learning_rate)
        .def_readwrite("epochs", &LensTrainConfig::epochs)
        .def_readwrite("seed", &LensTrainConfig::seed)
        .def_readwrite("use_in_batch_negatives", &LensTrainConfig::use_in_batch_negatives)
        .def_readwrite("shuffle_each_epoch", &LensTrainConfig::shuffle_each_epoch)
        .def_readwrite("dim", &LensTrainConfig::dim)
        .def_readwrite("idf_weighting", &LensTrainConfig::idf_weighting);

    py::class_<ContrastiveInstance>(m, "ContrastiveInstance")
        .def(py::init([](std::string query_text, std::string positive,
                         std::vector<std::string> negatives) {
                 ContrastiveInstance inst;
                 inst.query_text = std::move(query_text);
                 inst.positive_doc_id = std::move(positive);
                 inst.hard_negative_doc_ids = std::move(negatives);
                 return inst;
             }),
             py::arg("query_text"), py::arg("positive_doc_id"),
             py::arg("hard_negative_doc_ids") = std::vector<std::string>{});

    m.def("infonce_loss", &infonce_loss, py::arg("params"), py::arg("corpus"), py::arg("batch"),
          py::arg("config"));
    m.def("gradient_check", &gradient_check, py::arg("params"), py::arg("corpus"),
          py::arg("batch"), py::arg("config"), py::arg("epsilon") = 1e-5);

    // --- forge ----------------------------------------------------------
    py::class_<PolicyParameters>(m, "PolicyParameters")
        .def(py::init<>())
        .def_readwrite("weights", &PolicyParameters::weights)
        .def_readwrite("bias", &PolicyParameters::bias);

    py::class_<AlignedQuery>(m, "AlignedQuery")
        .def_readonly("text", &AlignedQuery::text)
        .def_readonly("word_count", &AlignedQuery::word_count)
        .def_readonly("backend", &AlignedQuery::backend);

    m.def(
        "compose_and_rewrite",
        [](const PolicyParameters& policy, const Corpus& corpus, const std::string& question,
           const std::string& caption) {
            auto vocab = std::make_shared<Vocabulary>(build_vocabulary(corpus, TokenizerConfig{}));
            AlignmentInput input = compose_input(question, caption);
            return greedy_rewrite(policy, input, token_features(input, *vocab));
        },
        py::arg("policy"), py::arg("corpus"), py::arg("question"), py::arg("caption") = "",
        "Greedy token-selection rewrite of question (+caption) under the policy.");
    m.def("grpo_advantages", &grpo_advantages, py::arg("rewards"),
          py::arg("std_normalize") = false);
    m.def("save_policy", &save_policy, py::arg("policy"), py::arg("path"));
    m.def("load_policy", &load_policy, py::arg("path"));

    // --- synthetic + harness ---------------------------------------------
    m.def(
        "gen_synthetic",
        [](int docs, int queries, std::uint64_t seed, const std::string& out_dir) {
            SyntheticSpec spec;
            spec.num_docs = docs;
            spec.num_queries = queries;
            spec.seed = seed;
            write_synthetic(gen_synthetic(spec), out_dir);
        },
        py::arg("docs") = 200, py::arg("queries") = 50, py::arg("seed") = 7, py::arg("out_dir"),
        "Writes corpus.jsonl / queries.jsonl / qrels.tsv of the seeded benchmark.");
    m.def(
        "evaluate_config",
        [](const std::string& config_path) {
            PipelineConfig config = PipelineConfig::from_file(config_path);
            PipelineContext ctx = PipelineContext::build(config);
            return evaluate(ctx).to_json().dump(2);
        },
        py::arg("config_path"), "Runs `eval` for a config file and returns the report JSON.");

    m.attr("MAX_ALIGNED_WORDS") = kMaxAlignedWords;
}
