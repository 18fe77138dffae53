#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "bridge/caption.hpp"
#include "bridge/error.hpp"
#include "bridge/pipeline.hpp"
#include "bridge/synthetic.hpp"

namespace {

using namespace bridge;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<bool> offline;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* config = cmd->add_option("--config", args.config_path, "pipeline config JSON");
    if (config_required) config->required();
    cmd->add_option("--seed", args.seed, "override config seed");
    auto* offline = cmd->add_flag("--offline", "force offline mode (no remote calls)");
    auto* remote = cmd->add_flag("--remote", "allow remote API calls");
    offline->excludes(remote);
    cmd->parse_complete_callback([&args, offline, remote]() {
        if (offline->count()) args.offline = true;
        if (remote->count()) args.offline = false;
    });
    cmd->add_option("--out", args.out_dir, "output directory");
}

PipelineConfig load_config(const CommonArgs& args) {
    PipelineConfig config = PipelineConfig::from_file(args.config_path);
    if (args.seed) config.seed = *args.seed;
    if (args.offline) config.offline = *args.offline;
    config.validate();
    return config;
}

std::filesystem::path out_path(const CommonArgs& args, const std::string& fallback) {
    std::filesystem::path dir = args.out_dir.empty() ? std::filesystem::path(fallback)
                                                     : std::filesystem::path(args.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

int cmd_ingest_validate(const CommonArgs& args) {
    PipelineConfig config = load_config(args);
    Corpus corpus = load_corpus(config.paths.corpus);
    std::cout << "corpus: " << corpus.size() << " documents\n";
    if (!config.paths.queries.empty()) {
        auto queries = load_queries(config.paths.queries);
        std::cout << "queries: " << queries.size() << "\n";
    }
    if (!config.paths.qrels.empty()) {
        RelevanceJudgments qrels = load_qrels(config.paths.qrels, &corpus);
        std::cout << "qrels: " << qrels.size() << " judged queries";
        if (!qrels.excluded_no_positive().empty()) {
            std::cout << " (" << qrels.excluded_no_positive().size()
                      << " excluded: no positive judgment)";
        }
        std::cout << "\n";
    }
    std::cout << "ok\n";
    return 0;
}

int cmd_index_bm25(const CommonArgs& args) {
    PipelineConfig config = load_config(args);
    Corpus corpus = load_corpus(config.paths.corpus);
    TokenizerConfig tokenizer;
    if (!config.paths.stopword_file.empty()) {
        tokenizer = load_stopword_file(config.paths.stopword_file);
    }
    InvertedIndex index = InvertedIndex::build(corpus, tokenizer, config.bm25.k1, config.bm25.b);
    std::string path = config.paths.bm25_index;
    if (path.empty()) path = (out_path(args, ".") / "bm25_index.json").string();
    index.save(path);
    std::cout << "bm25 index: " << index.num_docs() << " docs -> " << path << "\n";
    return 0;
}

int cmd_index_dense(const CommonArgs& args, bool use_remote_embeddings) {
    PipelineConfig config = load_config(args);
    Corpus corpus = load_corpus(config.paths.corpus);
    std::string path = config.paths.vector_index;
    if (path.empty()) path = (out_path(args, ".") / "vector_index.bin").string();

    if (use_remote_embeddings) {
        if (config.offline) {
            throw Error(ErrorKind::config, "--remote-embeddings requires --remote mode");
        }
        OpenAiClient client(config.embedding_api);
        VectorIndex index = build_remote_vector_index(client, corpus);
        index.save(path);
        std::cout << "remote vector index: " << index.num_docs() << " docs, dim " << index.dim()
                  << " -> " << path << "\n";
        return 0;
    }

    TokenizerConfig tokenizer;
    if (!config.paths.stopword_file.empty()) {
        tokenizer = load_stopword_file(config.paths.stopword_file);
    }
    auto vocab = std::make_shared<Vocabulary>(build_vocabulary(corpus, tokenizer));
    EncoderParameters params =
        std::filesystem::exists(config.paths.encoder_checkpoint)
            ? load_encoder(config.paths.encoder_checkpoint)
            : init_encoder(vocab, config.encoder.dim, config.seed, config.encoder.idf_weighting);
    VectorIndex index = VectorIndex::build(params, corpus);
    index.save(path);
    std::cout << "vector index: " << index.num_docs() << " docs, dim " << index.dim() << " -> "
              << path << "\n";
    if (!index.degenerate_doc_ids().empty()) {
        std::cout << "warning: " << index.degenerate_doc_ids().size()
                  << " documents produced degenerate (zero) embeddings\n";
    }
    return 0;
}

int cmd_caption(const CommonArgs& args) {
    PipelineConfig config = load_config(args);
    PipelineContext ctx = PipelineContext::build(config);
    CaptionSource source = ctx.caption_source();
    std::size_t resolved = 0;
    std::vector<std::string> missing;
    for (const MultimodalQuery& query : ctx.queries) {
        try {
            source(query);
            ++resolved;
        } catch (const Error&) {
            missing.push_back(query.query_id);
        }
    }
    std::cout << "captions resolved: " << resolved << "/" << ctx.queries.size() << "\n";
    if (!missing.empty()) {
        std::cout << "missing captions for:";
        for (const std::string& id : missing) std::cout << " " << id;
        std::cout << "\n";
        throw Error(ErrorKind::data, "caption: " + std::to_string(missing.size()) +
                                         " queries lack captions (offline mode?)");
    }
    return 0;
}

int cmd_train_lens(const CommonArgs& args) {
    PipelineConfig config = load_config(args);
    PipelineContext ctx = PipelineContext::build(config);
    LensTrainConfig train = config.lens_train;
    train.seed = config.seed;
    train.dim = config.encoder.dim;
    train.idf_weighting = config.encoder.idf_weighting;

    std::vector<MultimodalQuery> judged;
    for (const MultimodalQuery& q : ctx.queries) {
        if (ctx.qrels.has_query(q.query_id)) judged.push_back(q);
    }
    LensTrainResult result = train_lens(ctx.corpus, ctx.qrels, judged, train, ctx.encoder.get());

    auto dir = out_path(args, "lens_out");
    std::string checkpoint = config.paths.encoder_checkpoint;
    if (checkpoint.empty()) checkpoint = (dir / "encoder.ckpt").string();
    save_encoder(result.params, checkpoint);
    save_loss_curve(result.loss_curve, (dir / "loss_curve.csv").string());
    std::cout << "trained encoder -> " << checkpoint << "\n";
    std::cout << "loss: first " << result.loss_curve.front().second << ", last "
              << result.loss_curve.back().second << " over " << result.loss_curve.size()
              << " steps\n";
    for (const std::string& w : result.warnings) std::cout << "warning: " << w << "\n";
    return 0;
}

int cmd_train_forge(const CommonArgs& args) {
    PipelineConfig config = load_config(args);
    PipelineContext ctx = PipelineContext::build(config);
    ForgeTrainConfig train = config.forge_train;
    train.seed = config.seed;
    train.k = config.k;

    std::vector<MultimodalQuery> judged;
    for (const MultimodalQuery& q : ctx.queries) {
        if (ctx.qrels.has_query(q.query_id)) judged.push_back(q);
    }
    ForgeTrainResult result =
        train_forge(judged, ctx.qrels, ctx.caption_source(), *ctx.retriever, *ctx.vocab, train);

    auto dir = out_path(args, "forge_out");
    std::string checkpoint = config.paths.policy_checkpoint;
    if (checkpoint.empty()) checkpoint = (dir / "policy.json").string();
    save_policy(result.policy, checkpoint);
    {
        std::ofstream curve(dir / "reward_curve.csv", std::ios::trunc);
        curve << "epoch,mean_reward\n";
        for (std::size_t e = 0; e < result.epoch_mean_reward.size(); ++e) {
            curve << e << "," << result.epoch_mean_reward[e] << "\n";
        }
    }
    std::cout << "trained policy -> " << checkpoint << "\n";
    std::cout << "mean reward: first epoch " << result.epoch_mean_reward.front() << ", last epoch "
              << result.epoch_mean_reward.back() << "\n";
    return 0;
}

int cmd_rewrite(const CommonArgs& args, const std::string& query_id) {
    PipelineConfig config = load_config(args);
    PipelineContext ctx = PipelineContext::build(config);
    for (const MultimodalQuery& query : ctx.queries) {
        if (query.query_id != query_id) continue;
        PipelineRun run = run_pipeline_detailed(query, ctx);
        std::cout << run.aligned.text << "\n";
        return 0;
    }
    throw Error(ErrorKind::data, "rewrite: unknown query_id \"" + query_id + "\"");
}

int cmd_search(const CommonArgs& args, const std::string& query_text, int k_override) {
    PipelineConfig config = load_config(args);
    if (k_override > 0) config.k = k_override;
    PipelineContext ctx = PipelineContext::build(config);
    RankedList ranked = ctx.retriever->search(query_text, config.k);
    for (std::size_t i = 0; i < ranked.items.size(); ++i) {
        std::cout << (i + 1) << "\t" << ranked.items[i].doc_id << "\t" << ranked.items[i].score
                  << "\n";
    }
    return 0;
}

int cmd_eval(const CommonArgs& args) {
    PipelineConfig config = load_config(args);
    PipelineContext ctx = PipelineContext::build(config);
    ExperimentReport report = evaluate(ctx);
    auto dir = out_path(args, "eval_out");
    write_report(report, dir.string());
    std::cout << report.to_table();
    std::cout << "report -> " << (dir / "report.json").string() << "\n";
    if (!report.failures.empty()) {
        std::cout << "failures: " << report.failures.size() << " (see report.json)\n";
    }
    return 0;
}

int cmd_ablate(const CommonArgs& args, bool no_train) {
    PipelineConfig config = load_config(args);
    PipelineContext ctx = PipelineContext::build(config);
    AblationOptions options;
    options.train_in_run = !no_train;
    AblationResult result = run_ablation(ctx, options);
    auto dir = out_path(args, "ablation_out");
    for (std::size_t i = 0; i < result.row_names.size(); ++i) {
        if (result.reports[i]) {
            write_report(*result.reports[i], (dir / result.row_names[i]).string());
        }
    }
    {
        std::ofstream table(dir / "ablation.txt", std::ios::trunc);
        table << result.table_text;
    }
    std::cout << result.table_text;
    for (const std::string& notice : result.notices) std::cout << "notice: " << notice << "\n";
    return 0;
}

int cmd_plugin_sweep(const CommonArgs& args, std::vector<std::string> retrievers) {
    PipelineConfig config = load_config(args);
    PipelineContext ctx = PipelineContext::build(config);
    if (retrievers.empty()) retrievers = {"bm25", "dense"};

    std::shared_ptr<Rewriter> aligner = ctx.make_rewriter(
        config.rewriter == "identity" && !config.paths.policy_checkpoint.empty() ? "policy"
                                                                                 : config.rewriter);
    PluginSweepResult result = run_plugin_sweep(ctx, retrievers, *aligner);
    auto dir = out_path(args, "sweep_out");
    {
        std::ofstream table(dir / "plugin_sweep.txt", std::ios::trunc);
        table << result.table_text;
    }
    std::cout << result.table_text;
    for (const std::string& failure : result.failures) {
        std::cout << "failed: " << failure << "\n";
    }
    return result.failures.empty() ? 0 : static_cast<int>(ErrorKind::internal);
}

int cmd_gen_synthetic(int docs, int queries, std::uint64_t seed, const std::string& out_dir) {
    SyntheticSpec spec;
    spec.num_docs = docs;
    spec.num_queries = queries;
    spec.seed = seed;
    SyntheticDataset dataset = gen_synthetic(spec);
    write_synthetic(dataset, out_dir);
    std::cout << "synthetic dataset: " << dataset.corpus.size() << " docs, "
              << dataset.queries.size() << " queries -> " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BRIDGE retrieval toolkit: query alignment and dense retrieval experiments"};
    app.require_subcommand(1);

    CommonArgs ingest_args, bm25_args, dense_args, caption_args, lens_args, forge_args,
        rewrite_args, search_args, eval_args, ablate_args, sweep_args;

    auto* ingest = app.add_subcommand("ingest-validate", "load and validate corpus/queries/qrels");
    add_common(ingest, ingest_args);

    auto* bm25 = app.add_subcommand("index-bm25", "build and save the BM25 index");
    add_common(bm25, bm25_args);

    auto* dense = app.add_subcommand("index-dense", "build and save the dense vector index");
    add_common(dense, dense_args);
    bool remote_embeddings = false;
    dense->add_flag("--remote-embeddings", remote_embeddings,
                    "embed documents via the configured remote endpoint");

    auto* caption = app.add_subcommand("caption", "resolve captions for all queries");
    add_common(caption, caption_args);

    auto* lens = app.add_subcommand("train-lens", "contrastive-train the dense encoder");
    add_common(lens, lens_args);

    auto* forge = app.add_subcommand("train-forge", "GRPO-train the query alignment policy");
    add_common(forge, forge_args);

    auto* rewrite = app.add_subcommand("rewrite", "print the aligned query for one query id");
    add_common(rewrite, rewrite_args);
    std::string rewrite_query_id;
    rewrite->add_option("--query-id", rewrite_query_id, "query id to rewrite")->required();

    auto* search = app.add_subcommand("search", "run the configured retriever on a raw query");
    add_common(search, search_args);
    std::string search_text;
    int search_k = 0;
    search->add_option("--query", search_text, "query text")->required();
    search->add_option("--k", search_k, "override result depth");

    auto* eval = app.add_subcommand("eval", "run the full pipeline and write a report");
    add_common(eval, eval_args);

    auto* ablate = app.add_subcommand("ablate", "component ablation over the dense retriever");
    add_common(ablate, ablate_args);
    bool ablate_no_train = false;
    ablate->add_flag("--no-train", ablate_no_train,
                     "skip rows whose policy checkpoints are missing instead of training");

    auto* sweep = app.add_subcommand("plugin-sweep", "base vs +aligner across retrievers");
    add_common(sweep, sweep_args);
    std::vector<std::string> sweep_retrievers;
    sweep->add_option("--retrievers", sweep_retrievers, "retriever backends (default: bm25 dense)");

    auto* synth = app.add_subcommand("gen-synthetic", "generate the seeded synthetic benchmark");
    int synth_docs = 200, synth_queries = 50;
    std::uint64_t synth_seed = 7;
    std::string synth_out = "synthetic_out";
    synth->add_option("--docs", synth_docs, "number of documents");
    synth->add_option("--queries", synth_queries, "number of queries");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", synth_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest_validate(ingest_args);
        if (bm25->parsed()) return cmd_index_bm25(bm25_args);
        if (dense->parsed()) return cmd_index_dense(dense_args, remote_embeddings);
        if (caption->parsed()) return cmd_caption(caption_args);
        if (lens->parsed()) return cmd_train_lens(lens_args);
        if (forge->parsed()) return cmd_train_forge(forge_args);
        if (rewrite->parsed()) return cmd_rewrite(rewrite_args, rewrite_query_id);
        if (search->parsed()) return cmd_search(search_args, search_text, search_k);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (ablate->parsed()) return cmd_ablate(ablate_args, ablate_no_train);
        if (sweep->parsed()) return cmd_plugin_sweep(sweep_args, sweep_retrievers);
        if (synth->parsed()) {
            return cmd_gen_synthetic(synth_docs, synth_queries, synth_seed, synth_out);
        }
    } catch (const bridge::Error& e) {
        std::cerr << "error (" << bridge::error_kind_name(e.kind()) << "): " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error (internal): " << e.what() << "\n";
        return static_cast<int>(bridge::ErrorKind::internal);
    }
    return 0;
}
