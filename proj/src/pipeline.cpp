#include "bridge/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "bridge/error.hpp"
#include "bridge/rng.hpp"

namespace bridge {

namespace {

bool file_exists(const std::string& path) {
    return !path.empty() && std::filesystem::exists(path);
}

RemoteConfig remote_from_json(const nlohmann::json& j, const std::string& default_key_env) {
    RemoteConfig config;
    config.endpoint = j.value("endpoint", "");
    config.model = j.value("model", "");
    config.api_key_env = j.value("api_key_env", default_key_env);
    config.timeout_seconds = j.value("timeout_seconds", 60);
    return config;
}

nlohmann::json remote_to_json(const RemoteConfig& config) {
    return {{"endpoint", config.endpoint},
            {"model", config.model},
            {"api_key_env", config.api_key_env},
            {"timeout_seconds", config.timeout_seconds}};
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig config;
    if (auto paths = j.find("paths"); paths != j.end()) {
        config.paths.corpus = paths->value("corpus", "");
        config.paths.queries = paths->value("queries", "");
        config.paths.qrels = paths->value("qrels", "");
        config.paths.caption_cache = paths->value("caption_cache", "");
        config.paths.rewrite_cache = paths->value("rewrite_cache", "");
        config.paths.stopword_file = paths->value("stopword_file", "");
        config.paths.bm25_index = paths->value("bm25_index", "");
        config.paths.vector_index = paths->value("vector_index", "");
        config.paths.encoder_checkpoint = paths->value("encoder_checkpoint", "");
        config.paths.policy_checkpoint = paths->value("policy_checkpoint", "");
    }
    config.rewriter = j.value("rewriter", "identity");
    config.retriever = j.value("retriever", "bm25");
    config.k = j.value("k", 10);
    config.seed = j.value("seed", static_cast<std::uint64_t>(0));
    config.offline = j.value("offline", true);
    if (auto bm = j.find("bm25"); bm != j.end()) {
        config.bm25.k1 = bm->value("k1", InvertedIndex::kDefaultK1);
        config.bm25.b = bm->value("b", InvertedIndex::kDefaultB);
    }
    if (auto enc = j.find("encoder"); enc != j.end()) {
        config.encoder.dim = enc->value("dim", static_cast<std::size_t>(64));
        config.encoder.idf_weighting = enc->value("idf_weighting", true);
    }
    if (auto lens = j.find("lens_train"); lens != j.end()) {
        config.lens_train.temperature = lens->value("temperature", 0.02);
        config.lens_train.hard_negatives = lens->value("hard_negatives", 7);
        config.lens_train.batch_size = lens->value("batch_size", 32);
        config.lens_train.learning_rate = lens->value("learning_rate", 1e-5);
        config.lens_train.epochs = lens->value("epochs", 3);
        config.lens_train.use_in_batch_negatives = lens->value("use_in_batch_negatives", true);
        config.lens_train.shuffle_each_epoch = lens->value("shuffle_each_epoch", true);
    }
    if (auto forge = j.find("forge_train"); forge != j.end()) {
        config.forge_train.group_size = forge->value("group_size", 8);
        config.forge_train.learning_rate = forge->value("learning_rate", 1e-2);
        config.forge_train.epochs = forge->value("epochs", 3);
        config.forge_train.std_normalize_advantages =
            forge->value("std_normalize_advantages", false);
    }
    if (auto remote = j.find("remote"); remote != j.end()) {
        if (auto chat = remote->find("chat"); chat != remote->end()) {
            config.chat_api = remote_from_json(*chat, "BRIDGE_CHAT_API_KEY");
        }
        if (auto emb = remote->find("embeddings"); emb != remote->end()) {
            config.embedding_api = remote_from_json(*emb, "BRIDGE_EMBED_API_KEY");
        }
    }
    return config;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open config: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorKind::config, "config is not a JSON object: " + path);
    }
    PipelineConfig config = from_json(j);
    config.validate();
    return config;
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json j;
    j["paths"] = {{"corpus", paths.corpus},
                  {"queries", paths.queries},
                  {"qrels", paths.qrels},
                  {"caption_cache", paths.caption_cache},
                  {"rewrite_cache", paths.rewrite_cache},
                  {"stopword_file", paths.stopword_file},
                  {"bm25_index", paths.bm25_index},
                  {"vector_index", paths.vector_index},
                  {"encoder_checkpoint", paths.encoder_checkpoint},
                  {"policy_checkpoint", paths.policy_checkpoint}};
    j["rewriter"] = rewriter;
    j["retriever"] = retriever;
    j["k"] = k;
    j["seed"] = seed;
    j["offline"] = offline;
    j["bm25"] = {{"k1", bm25.k1}, {"b", bm25.b}};
    j["encoder"] = {{"dim", encoder.dim}, {"idf_weighting", encoder.idf_weighting}};
    j["lens_train"] = {{"temperature", lens_train.temperature},
                       {"hard_negatives", lens_train.hard_negatives},
                       {"batch_size", lens_train.batch_size},
                       {"learning_rate", lens_train.learning_rate},
                       {"epochs", lens_train.epochs},
                       {"use_in_batch_negatives", lens_train.use_in_batch_negatives},
                       {"shuffle_each_epoch", lens_train.shuffle_each_epoch}};
    j["forge_train"] = {{"group_size", forge_train.group_size},
                        {"learning_rate", forge_train.learning_rate},
                        {"epochs", forge_train.epochs},
                        {"std_normalize_advantages", forge_train.std_normalize_advantages}};
    j["remote"] = {{"chat", remote_to_json(chat_api)}, {"embeddings", remote_to_json(embedding_api)}};
    return j;
}

std::uint64_t PipelineConfig::config_hash() const { return fnv1a64(to_json().dump()); }

void PipelineConfig::validate() const {
    static const std::set<std::string, std::less<>> kRewriters = {"identity", "caption-concat",
                                                                  "policy", "remote"};
    static const std::set<std::string, std::less<>> kRetrievers = {"bm25", "dense", "remote"};
    if (!kRewriters.count(rewriter)) {
        throw Error(ErrorKind::config, "unknown rewriter backend: " + rewriter);
    }
    if (!kRetrievers.count(retriever)) {
        throw Error(ErrorKind::config, "unknown retriever backend: " + retriever);
    }
    if (k < 1) throw Error(ErrorKind::config, "k must be >= 1");
    if (offline) {
        if (rewriter == "remote") {
            throw Error(ErrorKind::config, "rewriter \"remote\" requires remote mode (--remote)");
        }
        if (retriever == "remote") {
            throw Error(ErrorKind::config, "retriever \"remote\" requires remote mode (--remote)");
        }
    }
    for (const std::string* p : {&paths.corpus, &paths.queries, &paths.qrels}) {
        if (!p->empty() && !file_exists(*p)) {
            throw Error(ErrorKind::config, "configured path does not exist: " + *p);
        }
    }
}

PipelineContext PipelineContext::build(const PipelineConfig& config) {
    config.validate();
    PipelineContext ctx;
    ctx.config = config;

    if (config.paths.corpus.empty()) {
        throw Error(ErrorKind::config, "config requires paths.corpus");
    }
    ctx.corpus = load_corpus(config.paths.corpus);
    if (!config.paths.queries.empty()) ctx.queries = load_queries(config.paths.queries);
    if (!config.paths.qrels.empty()) ctx.qrels = load_qrels(config.paths.qrels, &ctx.corpus);

    TokenizerConfig tokenizer;
    if (!config.paths.stopword_file.empty()) {
        tokenizer = load_stopword_file(config.paths.stopword_file);
    }
    ctx.vocab = std::make_shared<Vocabulary>(build_vocabulary(ctx.corpus, tokenizer));

    if (!config.paths.caption_cache.empty()) {
        ctx.caption_cache = std::make_shared<CaptionCache>(config.paths.caption_cache);
    }
    if (!config.offline && config.chat_api.configured()) {
        ctx.chat_client = std::make_shared<OpenAiClient>(config.chat_api);
    }

    // BM25 index: loaded when the configured file exists, else built.
    if (file_exists(config.paths.bm25_index)) {
        ctx.bm25_index = std::make_shared<InvertedIndex>(
            InvertedIndex::load(config.paths.bm25_index, tokenizer.config_hash()));
    } else {
        ctx.bm25_index = std::make_shared<InvertedIndex>(
            InvertedIndex::build(ctx.corpus, tokenizer, config.bm25.k1, config.bm25.b));
    }

    // Encoder + vector index for the dense backend.
    if (file_exists(config.paths.encoder_checkpoint)) {
        ctx.encoder =
            std::make_shared<EncoderParameters>(load_encoder(config.paths.encoder_checkpoint));
    } else {
        ctx.encoder = std::make_shared<EncoderParameters>(
            init_encoder(ctx.vocab, config.encoder.dim, config.seed, config.encoder.idf_weighting));
    }
    if (config.retriever == "remote") {
        if (!file_exists(config.paths.vector_index)) {
            throw Error(ErrorKind::config,
                        "retriever \"remote\" requires a vector index built with `index-dense`");
        }
        ctx.vector_index =
            std::make_shared<VectorIndex>(VectorIndex::load(config.paths.vector_index));
    } else if (file_exists(config.paths.vector_index)) {
        auto index = std::make_shared<VectorIndex>(VectorIndex::load(config.paths.vector_index));
        if (index->parameter_version() != ctx.encoder->parameter_version) {
            throw Error(ErrorKind::config,
                        "vector index version does not match encoder checkpoint; rebuild with "
                        "`index-dense`");
        }
        ctx.vector_index = std::move(index);
    } else {
        ctx.vector_index = std::make_shared<VectorIndex>(VectorIndex::build(*ctx.encoder, ctx.corpus));
    }

    ctx.retriever = ctx.make_retriever(config.retriever);
    ctx.rewriter = ctx.make_rewriter(config.rewriter);
    return ctx;
}

std::shared_ptr<Retriever> PipelineContext::make_retriever(const std::string& backend) const {
    if (backend == "bm25") {
        return std::make_shared<Bm25Retriever>(bm25_index, vocab->tokenizer_config());
    }
    if (backend == "dense") {
        return std::make_shared<DenseRetriever>(encoder, vector_index);
    }
    if (backend == "remote") {
        if (config.offline || !config.embedding_api.configured()) {
            throw Error(ErrorKind::config,
                        "retriever \"remote\" requires remote mode and remote.embeddings config");
        }
        auto client = std::make_shared<OpenAiClient>(config.embedding_api);
        return std::make_shared<RemoteRetriever>(std::move(client), vector_index);
    }
    throw Error(ErrorKind::config, "unknown retriever backend: " + backend);
}

std::shared_ptr<Rewriter> PipelineContext::make_rewriter(const std::string& backend) const {
    if (backend == "identity") return std::make_shared<IdentityRewriter>();
    if (backend == "caption-concat") return std::make_shared<CaptionConcatRewriter>();
    if (backend == "policy") {
        if (!file_exists(config.paths.policy_checkpoint)) {
            throw Error(ErrorKind::config,
                        "rewriter \"policy\" requires paths.policy_checkpoint (train with "
                        "`train-forge`)");
        }
        return std::make_shared<PolicyRewriter>(load_policy(config.paths.policy_checkpoint), vocab);
    }
    if (backend == "remote") {
        if (config.offline || !config.chat_api.configured()) {
            throw Error(ErrorKind::config,
                        "rewriter \"remote\" requires remote mode and remote.chat config");
        }
        auto client = std::make_shared<OpenAiClient>(config.chat_api);
        auto cache = std::make_shared<RewriteCache>(config.paths.rewrite_cache.empty()
                                                        ? std::string("rewrite_cache.jsonl")
                                                        : config.paths.rewrite_cache);
        return std::make_shared<RemoteRewriter>(std::move(client), std::move(cache));
    }
    throw Error(ErrorKind::config, "unknown rewriter backend: " + backend);
}

CaptionSource PipelineContext::caption_source() const {
    CaptionCache* cache = caption_cache.get();
    const OpenAiClient* client = chat_client.get();
    const CaptionMode mode =
        config.offline ? CaptionMode::offline : CaptionMode::remote_allowed;
    return [cache, client, mode](const MultimodalQuery& query) {
        return get_caption(query, cache, client, mode);
    };
}

namespace {

[[noreturn]] void rethrow_with_stage(const char* stage, const Error& e) {
    throw Error(e.kind(), std::string(stage) + ": " + e.what());
}

}  // namespace

PipelineRun run_pipeline_detailed(const MultimodalQuery& query, const PipelineContext& ctx) {
    std::string caption;
    try {
        caption = ctx.caption_source()(query);
    } catch (const Error& e) {
        rethrow_with_stage("caption", e);
    }

    PipelineRun run;
    try {
        AlignmentInput input =
            compose_input(query.question_text, caption, ctx.vocab->tokenizer_config());
        run.aligned = ctx.rewriter->rewrite(input);
    } catch (const Error& e) {
        rethrow_with_stage("rewrite", e);
    }

    try {
        run.ranked = ctx.retriever->search(run.aligned.text, ctx.config.k);
        run.ranked.query_id = query.query_id;
    } catch (const Error& e) {
        rethrow_with_stage("retrieve", e);
    }
    return run;
}

RankedList run_pipeline(const MultimodalQuery& query, const PipelineContext& ctx) {
    return run_pipeline_detailed(query, ctx).ranked;
}

namespace {

ExperimentReport evaluate_with(const PipelineContext& ctx, const Rewriter& rewriter,
                               const Retriever& retriever, const std::string& system_name) {
    const auto start = std::chrono::steady_clock::now();

    // A scratch context that reuses the loaded data but swaps backends.
    ExperimentReport report;
    report.config_echo = ctx.config.to_json();
    report.config_hash = ctx.config.config_hash();
    report.system_name = system_name;

    CaptionSource captions = ctx.caption_source();
    std::map<std::string, double> ndcg_values;
    std::map<std::string, double> recall_values;

    // Queries evaluated in ascending query_id order for reproducible output.
    std::vector<const MultimodalQuery*> ordered;
    for (const MultimodalQuery& q : ctx.queries) {
        if (ctx.qrels.has_query(q.query_id)) ordered.push_back(&q);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const MultimodalQuery* a, const MultimodalQuery* b) {
                  return a->query_id < b->query_id;
              });

    for (const MultimodalQuery* query : ordered) {
        try {
            std::string caption = captions(*query);
            AlignmentInput input =
                compose_input(query->question_text, caption, ctx.vocab->tokenizer_config());
            AlignedQuery aligned = rewriter.rewrite(input);
            RankedList ranked = retriever.search(aligned.text, ctx.config.k);
            ranked.query_id = query->query_id;

            PerQueryRow row;
            row.query_id = query->query_id;
            row.domain = query->domain;
            row.aligned_text = aligned.text;
            row.rank_of_positive = 0;
            for (std::size_t i = 0; i < ranked.items.size(); ++i) {
                if (ctx.qrels.gain(query->query_id, ranked.items[i].doc_id) > 0) {
                    row.rank_of_positive = static_cast<int>(i + 1);
                    break;
                }
            }
            row.ndcg = ndcg_at_k(ranked, ctx.qrels, ctx.config.k);
            ndcg_values[query->query_id] = row.ndcg;
            recall_values[query->query_id] = recall_at_k(ranked, ctx.qrels, ctx.config.k);
            report.rows.push_back(std::move(row));
        } catch (const Error& e) {
            report.failures.push_back(query->query_id + ": " + e.what());
        }
    }

    if (!ndcg_values.empty()) {
        report.ndcg = aggregate("ndcg", ctx.config.k, ndcg_values, ctx.queries);
        report.recall = aggregate("recall", ctx.config.k, recall_values, ctx.queries);
    } else {
        report.ndcg.metric_name = "ndcg";
        report.ndcg.k = ctx.config.k;
        report.recall.metric_name = "recall";
        report.recall.k = ctx.config.k;
    }
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace

ExperimentReport evaluate(const PipelineContext& ctx) {
    return evaluate_with(ctx, *ctx.rewriter, *ctx.retriever,
                         ctx.config.rewriter + "+" + ctx.config.retriever);
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const PerQueryRow& row : rows) {
        rows_json.push_back({{"query_id", row.query_id},
                             {"domain", row.domain},
                             {"aligned_query", row.aligned_text},
                             {"rank_of_positive", row.rank_of_positive},
                             {"ndcg", row.ndcg}});
    }
    nlohmann::json j;
    j["config"] = config_echo;
    j["config_hash"] = config_hash;
    j["system"] = system_name;
    j["rows"] = std::move(rows_json);
    j["metrics"] = {{"ndcg", ndcg.to_json()}, {"recall", recall.to_json()}};
    j["failures"] = failures;
    return j;
}

std::string ExperimentReport::to_table() const {
    std::ostringstream out;
    out << "system: " << system_name << "\n";
    out << "queries evaluated: " << rows.size() << ", failures: " << failures.size() << "\n\n";
    out << render_metric_table({system_name}, {ndcg});
    out << "\nndcg@" << ndcg.k << " micro average: " << std::fixed << std::setprecision(4)
        << ndcg.overall_mean << "\n";
    out << "recall@" << recall.k << " micro average: " << std::fixed << std::setprecision(4)
        << recall.overall_mean << "\n";
    return out.str();
}

void write_report(const ExperimentReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path base(out_dir);
    {
        std::ofstream out(base / "report.json", std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, "cannot write report.json under " + out_dir);
        out << report.to_json().dump(2) << "\n";
    }
    {
        std::ofstream out(base / "report.txt", std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, "cannot write report.txt under " + out_dir);
        out << report.to_table();
    }
    {
        // Wall-clock lives outside the canonical report so a fixed seed
        // reproduces report.json byte-identically.
        std::ofstream out(base / "timing.json", std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, "cannot write timing.json under " + out_dir);
        nlohmann::json j = {{"wall_clock_seconds", report.wall_clock_seconds}};
        out << j.dump(2) << "\n";
    }
}

AblationResult run_ablation(const PipelineContext& ctx, const AblationOptions& options) {
    AblationResult result;
    result.row_names = {"identity", "caption-concat", "policy-sft", "policy-rl"};

    auto dense = ctx.make_retriever("dense");
    CaptionSource captions = ctx.caption_source();

    std::vector<const MultimodalQuery*> judged;
    for (const MultimodalQuery& q : ctx.queries) {
        if (ctx.qrels.has_query(q.query_id)) judged.push_back(&q);
    }
    std::vector<MultimodalQuery> train_queries;
    for (const MultimodalQuery* q : judged) train_queries.push_back(*q);

    auto evaluate_rewriter = [&](const Rewriter& rewriter,
                                 const std::string& row) -> ExperimentReport {
        return evaluate_with(ctx, rewriter, *dense, row + "+dense");
    };

    result.reports.resize(result.row_names.size());
    result.reports[0] = evaluate_rewriter(IdentityRewriter{}, "identity");
    result.reports[1] = evaluate_rewriter(CaptionConcatRewriter{}, "caption-concat");

    // SFT row.
    std::optional<PolicyParameters> sft_policy;
    if (!options.sft_checkpoint.empty()) {
        sft_policy = load_policy(options.sft_checkpoint);
    } else if (options.train_in_run) {
        ForgeTrainConfig sft_config = ctx.config.forge_train;
        sft_config.seed = ctx.config.seed;
        sft_policy = train_forge_sft(train_queries, ctx.qrels, captions, ctx.corpus, *ctx.vocab,
                                     sft_config)
                         .policy;
    }
    if (sft_policy) {
        PolicyRewriter rewriter(*sft_policy, ctx.vocab, "policy-sft");
        result.reports[2] = evaluate_rewriter(rewriter, "policy-sft");
    } else {
        result.notices.push_back("policy-sft row skipped: no checkpoint and in-run training off");
    }

    // RL row.
    std::optional<PolicyParameters> rl_policy;
    if (!options.rl_checkpoint.empty()) {
        rl_policy = load_policy(options.rl_checkpoint);
    } else if (options.train_in_run) {
        ForgeTrainConfig rl_config = ctx.config.forge_train;
        rl_config.seed = ctx.config.seed;
        rl_policy =
            train_forge(train_queries, ctx.qrels, captions, *dense, *ctx.vocab, rl_config).policy;
    }
    if (rl_policy) {
        PolicyRewriter rewriter(*rl_policy, ctx.vocab, "policy-rl");
        result.reports[3] = evaluate_rewriter(rewriter, "policy-rl");
    } else {
        result.notices.push_back("policy-rl row skipped: no checkpoint and in-run training off");
    }

    std::vector<std::optional<double>> values;
    for (const auto& report : result.reports) {
        if (report) {
            values.push_back(report->ndcg.overall_mean);
        } else {
            values.push_back(std::nullopt);
        }
    }
    result.table_text = render_ablation_table(result.row_names, values);
    return result;
}

std::string render_ablation_table(const std::vector<std::string>& row_names,
                                  const std::vector<std::optional<double>>& ndcg_values) {
    std::size_t width = std::string("configuration").size();
    for (const auto& name : row_names) width = std::max(width, name.size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width + 2)) << "configuration"
        << std::right << std::setw(10) << "ndcg@10" << std::setw(10) << "delta" << "\n";
    out << std::string(width + 22, '-') << "\n";
    std::optional<double> previous;
    for (std::size_t i = 0; i < row_names.size(); ++i) {
        out << std::left << std::setw(static_cast<int>(width + 2)) << row_names[i];
        if (i < ndcg_values.size() && ndcg_values[i]) {
            out << std::right << std::setw(10) << std::fixed << std::setprecision(4)
                << *ndcg_values[i];
            if (previous) {
                out << std::setw(10) << std::showpos << std::fixed << std::setprecision(4)
                    << (*ndcg_values[i] - *previous) << std::noshowpos;
            } else {
                out << std::setw(10) << "-";
            }
            previous = ndcg_values[i];
        } else {
            out << std::right << std::setw(10) << "skipped" << std::setw(10) << "-";
        }
        out << "\n";
    }
    return out.str();
}

PluginSweepResult run_plugin_sweep(const PipelineContext& ctx,
                                   const std::vector<std::string>& retriever_backends,
                                   const Rewriter& aligner) {
    PluginSweepResult result;
    IdentityRewriter identity;
    for (const std::string& backend : retriever_backends) {
        try {
            auto retriever = ctx.make_retriever(backend);
            ExperimentReport base = evaluate_with(ctx, identity, *retriever, backend);
            ExperimentReport aligned =
                evaluate_with(ctx, aligner, *retriever, backend + "+" + aligner.name());
            PluginSweepRow row;
            row.retriever = backend;
            row.base_ndcg = base.ndcg.overall_mean;
            row.aligned_ndcg = aligned.ndcg.overall_mean;
            row.delta = row.aligned_ndcg - row.base_ndcg;
            result.rows.push_back(row);
        } catch (const Error& e) {
            result.failures.push_back(backend + ": " + e.what());
        }
    }
    result.table_text = render_plugin_table(result.rows);
    return result;
}

std::string render_plugin_table(const std::vector<PluginSweepRow>& rows) {
    std::size_t width = std::string("base retriever").size();
    for (const auto& row : rows) width = std::max(width, row.retriever.size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width + 2)) << "base retriever" << std::right
        << std::setw(10) << "base" << std::setw(10) << "+aligned" << std::setw(10) << "delta"
        << "\n";
    out << std::string(width + 32, '-') << "\n";
    for (const auto& row : rows) {
        out << std::left << std::setw(static_cast<int>(width + 2)) << row.retriever << std::right
            << std::fixed << std::setprecision(4) << std::setw(10) << row.base_ndcg
            << std::setw(10) << row.aligned_ndcg << std::setw(10) << std::showpos << row.delta
            << std::noshowpos << "\n";
    }
    return out.str();
}

}  // namespace bridge
