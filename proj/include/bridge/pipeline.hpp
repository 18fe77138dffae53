#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bridge/caption.hpp"
#include "bridge/corpus.hpp"
#include "bridge/forge.hpp"
#include "bridge/lens_trainer.hpp"
#include "bridge/metrics.hpp"
#include "bridge/remote.hpp"
#include "bridge/retriever.hpp"
#include "json.hpp"

namespace bridge {

struct PipelinePaths {
    std::string corpus;
    std::string queries;
    std::string qrels;
    std::string caption_cache;
    std::string rewrite_cache;
    std::string stopword_file;
    std::string bm25_index;
    std::string vector_index;
    std::string encoder_checkpoint;
    std::string policy_checkpoint;
};

struct Bm25Config {
    double k1 = InvertedIndex::kDefaultK1;
    double b = InvertedIndex::kDefaultB;
};

struct EncoderConfig {
    std::size_t dim = 64;
    bool idf_weighting = true;
};

// One JSON document drives every subcommand; environment variables override
// secrets only (API keys, via api_key_env names).
struct PipelineConfig {
    PipelinePaths paths;
    std::string rewriter = "identity";   // identity | caption-concat | policy | remote
    std::string retriever = "bm25";      // bm25 | dense | remote
    int k = 10;
    std::uint64_t seed = 0;
    bool offline = true;
    Bm25Config bm25;
    EncoderConfig encoder;
    LensTrainConfig lens_train;
    ForgeTrainConfig forge_train;
    RemoteConfig chat_api;
    RemoteConfig embedding_api;

    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig from_file(const std::string& path);
    nlohmann::json to_json() const;
    std::uint64_t config_hash() const;
    void validate() const;
};

// Everything loaded/built once per run: dataset, vocabulary, indexes and
// the selected rewriter/retriever backends.
struct PipelineContext {
    PipelineConfig config;
    Corpus corpus;
    std::vector<MultimodalQuery> queries;
    RelevanceJudgments qrels;
    std::shared_ptr<const Vocabulary> vocab;
    std::shared_ptr<const EncoderParameters> encoder;
    std::shared_ptr<const InvertedIndex> bm25_index;
    std::shared_ptr<const VectorIndex> vector_index;
    std::shared_ptr<Retriever> retriever;
    std::shared_ptr<Rewriter> rewriter;
    std::shared_ptr<CaptionCache> caption_cache;
    std::shared_ptr<OpenAiClient> chat_client;

    static PipelineContext build(const PipelineConfig& config);

    // Retriever construction for an explicit backend name (plug-and-play sweep).
    std::shared_ptr<Retriever> make_retriever(const std::string& backend) const;
    std::shared_ptr<Rewriter> make_rewriter(const std::string& backend) const;
    CaptionSource caption_source() const;
};

struct PipelineRun {
    AlignedQuery aligned;
    RankedList ranked;
};

// caption -> compose -> rewrite -> retrieve. Stage failures carry a stage tag.
PipelineRun run_pipeline_detailed(const MultimodalQuery& query, const PipelineContext& ctx);
RankedList run_pipeline(const MultimodalQuery& query, const PipelineContext& ctx);

struct PerQueryRow {
    std::string query_id;
    std::string domain;
    std::string aligned_text;
    int rank_of_positive = 0;  // 1-based within top k; 0 = not retrieved
    double ndcg = 0.0;
};

struct ExperimentReport {
    nlohmann::json config_echo;
    std::uint64_t config_hash = 0;
    std::string system_name;
    std::vector<PerQueryRow> rows;
    MetricReport ndcg;
    MetricReport recall;
    std::vector<std::string> failures;
    double wall_clock_seconds = 0.0;  // reported separately; never serialized
                                      // into the canonical report

    // Canonical, byte-reproducible serialization (excludes wall clock).
    nlohmann::json to_json() const;
    std::string to_table() const;
};

// Runs the pipeline over every judged query and aggregates.
ExperimentReport evaluate(const PipelineContext& ctx);

// report.json + report.txt (+ timing.json) under out_dir.
void write_report(const ExperimentReport& report, const std::string& out_dir);

struct AblationOptions {
    bool train_in_run = true;
    std::string sft_checkpoint;  // optional pre-trained policies
    std::string rl_checkpoint;
};

struct AblationResult {
    std::vector<std::string> row_names;
    std::vector<std::optional<ExperimentReport>> reports;  // nullopt = skipped
    std::vector<std::string> notices;
    std::string table_text;
};

// Table-2-shaped component ablation over the dense retriever:
// identity -> caption-concat -> SFT policy -> RL policy.
AblationResult run_ablation(const PipelineContext& ctx, const AblationOptions& options);

// Renders the ablation table for a given row ordering and values.
std::string render_ablation_table(const std::vector<std::string>& row_names,
                                  const std::vector<std::optional<double>>& ndcg_values);

struct PluginSweepRow {
    std::string retriever;
    double base_ndcg = 0.0;
    double aligned_ndcg = 0.0;
    double delta = 0.0;
};

struct PluginSweepResult {
    std::vector<PluginSweepRow> rows;
    std::vector<std::string> failures;
    std::string table_text;
};

// Base vs +aligner evaluation for each retriever backend name.
PluginSweepResult run_plugin_sweep(const PipelineContext& ctx,
                                   const std::vector<std::string>& retriever_backends,
                                   const Rewriter& aligner);

std::string render_plugin_table(const std::vector<PluginSweepRow>& rows);

}  // namespace bridge
