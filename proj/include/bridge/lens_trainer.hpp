#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bridge/bm25.hpp"
#include "bridge/corpus.hpp"
#include "bridge/dense.hpp"

namespace bridge {

// One contrastive training example: an anchor query, its relevant document
// and M mined hard negatives.
struct ContrastiveInstance {
    std::string query_text;
    std::string positive_doc_id;
    std::vector<std::string> hard_negative_doc_ids;
};

struct LensTrainConfig {
    double temperature = 0.02;
    int hard_negatives = 7;  // M
    int batch_size = 32;
    double learning_rate = 1e-5;
    int epochs = 3;
    std::uint64_t seed = 0;
    bool use_in_batch_negatives = true;
    bool shuffle_each_epoch = true;

    // Fresh-encoder settings, used only when no initial checkpoint is given.
    std::size_t dim = 64;
    bool idf_weighting = true;

    void validate() const;
};

// Sparse gradient over the embedding table: rows absent from the batch stay
// implicitly zero.
struct EmbeddingGradient {
    std::map<std::uint32_t, std::vector<double>> rows;

    double max_abs() const;
};

// Merge rule for mined negatives: BM25 candidates fill first, dense
// candidates backfill, skipping the positive and duplicates until M are
// collected.
std::vector<std::string> merge_negative_candidates(const std::vector<std::string>& bm25_ids,
                                                   const std::vector<std::string>& dense_ids,
                                                   const std::string& positive_doc_id, int m);

// Mines from the top-(M+1) of each retriever with the merge rule above.
// Returns fewer than M (with a warning on stderr) when the corpus is too
// small to supply them.
std::vector<std::string> mine_hard_negatives(const std::string& query_text,
                                             const std::string& positive_doc_id,
                                             const InvertedIndex& bm25_index,
                                             const EncoderParameters& params,
                                             const VectorIndex& vector_index, int m);

// Mean InfoNCE over the batch. Negatives per instance are its hard
// negatives plus, when enabled, the other instances' positives (deduped,
// never the instance's own positive). Instances whose query or positive
// embedding is degenerate are skipped with a warning.
double infonce_loss(const EncoderParameters& params, const Corpus& corpus,
                    const std::vector<ContrastiveInstance>& batch, const LensTrainConfig& config);

EmbeddingGradient infonce_gradient(const EncoderParameters& params, const Corpus& corpus,
                                   const std::vector<ContrastiveInstance>& batch,
                                   const LensTrainConfig& config);

// Central-difference verification of infonce_gradient over every row the
// analytic gradient touches. Returns the maximum relative error.
double gradient_check(const EncoderParameters& params, const Corpus& corpus,
                      const std::vector<ContrastiveInstance>& batch,
                      const LensTrainConfig& config, double epsilon);

struct LensTrainResult {
    EncoderParameters params;
    std::vector<std::pair<int, double>> loss_curve;  // (step, batch loss before update)
    std::vector<std::string> warnings;
};

// Plain seeded SGD over epochs x batches. Hard negatives are mined once
// from the initial parameters. `query_text_fn` lets the caller substitute
// aligned queries; the default trains on raw question text.
LensTrainResult train_lens(const Corpus& corpus, const RelevanceJudgments& qrels,
                           const std::vector<MultimodalQuery>& queries,
                           const LensTrainConfig& config,
                           const EncoderParameters* initial = nullptr,
                           const std::function<std::string(const MultimodalQuery&)>&
                               query_text_fn = {});

void save_loss_curve(const std::vector<std::pair<int, double>>& curve, const std::string& path);

}  // namespace bridge
