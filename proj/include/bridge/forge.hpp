#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bridge/corpus.hpp"
#include "bridge/retriever.hpp"
#include "bridge/text.hpp"

namespace bridge {

class OpenAiClient;

// Hard cap on rewritten queries, counted in whitespace-delimited words.
inline constexpr int kMaxAlignedWords = 200;
// When sampling drops every token, the rewrite falls back to the highest-
// probability tokens instead of emitting an empty query.
inline constexpr int kFallbackTopTokens = 10;

enum class TokenSource : std::uint8_t { question = 0, caption = 1 };

// The composed rewriter input: question text, image caption, and a token
// view over the concatenation with per-token source tags.
struct AlignmentInput {
    std::string question_text;
    std::string caption_text;
    std::string composed;
    TokenizedText tokens;               // spans index into `composed`
    std::vector<TokenSource> sources;   // parallel to tokens
};

// A rewritten query from any backend.
struct AlignedQuery {
    std::string text;
    int word_count = 0;
    std::string backend;
    // Policy backends record which input tokens were kept; output text is
    // always a subsequence of the input tokens for those backends.
    std::optional<std::vector<std::uint8_t>> kept_mask;
};

// Per-token features feeding the token-selection policy:
//   [idf, position within its field (0..1), source (question=1),
//    is-numeric, term frequency within the composed input]
inline constexpr std::size_t kNumTokenFeatures = 5;
using TokenFeatures = std::array<double, kNumTokenFeatures>;

extern const std::array<const char*, kNumTokenFeatures> kTokenFeatureNames;

// Logistic token-selection policy: p(keep token) = sigmoid(w . f + bias).
struct PolicyParameters {
    std::array<double, kNumTokenFeatures> weights{};
    double bias = 0.0;
};

// Gradient of a scalar objective w.r.t. the policy parameters.
struct PolicyGradient {
    std::array<double, kNumTokenFeatures> weights{};
    double bias = 0.0;
};

// One GRPO group: G sampled rewrites for the same input, their rewards,
// the group-mean baseline, and mean-subtracted advantages.
struct RolloutGroup {
    AlignmentInput input;
    std::vector<TokenFeatures> features;   // per input token
    std::vector<AlignedQuery> candidates;  // size G, kept_mask populated
    std::vector<double> rewards;           // size G, each in [0, 1]
    double baseline = 0.0;
    std::vector<double> advantages;        // rewards - baseline
};

// question + " Image Description: " + caption; the caption half (and the
// separator) is omitted entirely when the caption is empty. The token view
// covers the question and caption content, not the separator literal.
AlignmentInput compose_input(const std::string& question_text, const std::string& caption_text,
                             const TokenizerConfig& config = {});

std::vector<TokenFeatures> token_features(const AlignmentInput& input, const Vocabulary& vocab);

std::vector<double> keep_probabilities(const PolicyParameters& policy,
                                       const std::vector<TokenFeatures>& features);

// log pi(mask) = sum kept log p + sum dropped log(1 - p).
double mask_log_prob(const std::vector<double>& probabilities,
                     const std::vector<std::uint8_t>& mask);

// d log pi / d theta, via the logistic-Bernoulli identity (m - p) f.
PolicyGradient mask_log_prob_gradient(const std::vector<double>& probabilities,
                                      const std::vector<TokenFeatures>& features,
                                      const std::vector<std::uint8_t>& mask);

// Independent Bernoulli(p_t) keep/drop per token. Kept tokens are joined in
// input order; above the word cap the lowest-probability kept tokens are
// dropped; an all-dropped sample falls back to the top tokens by p.
AlignedQuery sample_rewrite(const PolicyParameters& policy, const AlignmentInput& input,
                            const std::vector<TokenFeatures>& features, std::mt19937_64& rng);

// Deterministic variant: keep exactly the tokens with p >= 0.5, so the
// zero-initialized policy is the identity rewriter (up to the cap).
AlignedQuery greedy_rewrite(const PolicyParameters& policy, const AlignmentInput& input,
                            const std::vector<TokenFeatures>& features);

// Retrieval reward: nDCG@k of the retriever run on the aligned query with
// {positive_doc_id} as the only relevant document.
double reward(const AlignedQuery& aligned, const std::string& positive_doc_id,
              const Retriever& retriever, int k);

// Mean-baseline advantages. No variance normalization by default; the
// std-normalized variant exists for comparison runs.
std::pair<double, std::vector<double>> grpo_advantages(const std::vector<double>& rewards,
                                                       bool std_normalize = false);

// One ascent step on sum_g A_g * grad log pi(mask_g), evaluated at `policy`.
// All-zero advantages return the policy bit-identically unchanged.
PolicyParameters grpo_update(const PolicyParameters& policy, const RolloutGroup& group,
                             double learning_rate);

// One descent step on the mean per-token binary cross-entropy against a
// reference keep mask.
PolicyParameters sft_update(const PolicyParameters& policy,
                            const std::vector<TokenFeatures>& features,
                            const std::vector<std::uint8_t>& reference_mask,
                            double learning_rate);

struct ForgeTrainConfig {
    int group_size = 8;  // G
    double learning_rate = 1e-2;
    int epochs = 3;
    int k = 10;
    std::uint64_t seed = 0;
    bool std_normalize_advantages = false;

    void validate() const;
};

struct ForgeTrainResult {
    PolicyParameters policy;
    std::vector<double> epoch_mean_reward;
};

using CaptionSource = std::function<std::string(const MultimodalQuery&)>;

// GRPO training loop: per query and epoch, sample G rewrites, score each
// against the retriever, apply one group update. Deterministic under seed.
ForgeTrainResult train_forge(const std::vector<MultimodalQuery>& queries,
                             const RelevanceJudgments& qrels, const CaptionSource& captions,
                             const Retriever& retriever, const Vocabulary& vocab,
                             const ForgeTrainConfig& config);

// Supervised variant: per-token BCE against the oracle mask of tokens that
// occur in the positive document.
ForgeTrainResult train_forge_sft(const std::vector<MultimodalQuery>& queries,
                                 const RelevanceJudgments& qrels, const CaptionSource& captions,
                                 const Corpus& corpus, const Vocabulary& vocab,
                                 const ForgeTrainConfig& config);

std::vector<std::uint8_t> oracle_keep_mask(const AlignmentInput& input, const Document& positive,
                                           const TokenizerConfig& config);

void save_policy(const PolicyParameters& policy, const std::string& path);
PolicyParameters load_policy(const std::string& path);

int word_count(std::string_view text);
std::string truncate_words(std::string_view text, int max_words);

// ---------------------------------------------------------------------------
// Rewriter backends. The ablation rows are backend choices, not separate
// systems.

class Rewriter {
public:
    virtual ~Rewriter() = default;
    virtual std::string name() const = 0;
    virtual AlignedQuery rewrite(const AlignmentInput& input) const = 0;
};

// Passes the raw question through (the ablation origin). Text is verbatim
// unless the word cap forces truncation.
class IdentityRewriter : public Rewriter {
public:
    std::string name() const override { return "identity"; }
    AlignedQuery rewrite(const AlignmentInput& input) const override;
};

// Raw question + caption concatenation, capped.
class CaptionConcatRewriter : public Rewriter {
public:
    std::string name() const override { return "caption-concat"; }
    AlignedQuery rewrite(const AlignmentInput& input) const override;
};

// Greedy decoding of the trained token-selection policy.
class PolicyRewriter : public Rewriter {
public:
    PolicyRewriter(PolicyParameters policy, std::shared_ptr<const Vocabulary> vocab,
                   std::string label = "policy")
        : policy_(policy), vocab_(std::move(vocab)), label_(std::move(label)) {}

    std::string name() const override { return label_; }
    AlignedQuery rewrite(const AlignmentInput& input) const override;
    const PolicyParameters& policy() const { return policy_; }

private:
    PolicyParameters policy_;
    std::shared_ptr<const Vocabulary> vocab_;
    std::string label_;
};

// On-disk cache for remote rewrites, keyed by hash(system prompt + input).
class RewriteCache {
public:
    explicit RewriteCache(std::string path);

    std::optional<std::string> lookup(const std::string& key) const;
    void store(const std::string& key, const std::string& text, const std::string& model);

private:
    std::string path_;
    std::map<std::string, std::string> entries_;
};

extern const char* kRewriteSystemPrompt;

AlignedQuery remote_rewrite(const OpenAiClient& client, const AlignmentInput& input,
                            RewriteCache* cache);

class RemoteRewriter : public Rewriter {
public:
    RemoteRewriter(std::shared_ptr<OpenAiClient> client, std::shared_ptr<RewriteCache> cache)
        : client_(std::move(client)), cache_(std::move(cache)) {}

    std::string name() const override { return "remote"; }
    AlignedQuery rewrite(const AlignmentInput& input) const override;

private:
    std::shared_ptr<OpenAiClient> client_;
    std::shared_ptr<RewriteCache> cache_;
};

}  // namespace bridge
