#include "bridge/forge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "bridge/error.hpp"
#include "bridge/metrics.hpp"
#include "bridge/remote.hpp"
#include "bridge/rng.hpp"
#include "json.hpp"

namespace bridge {

const std::array<const char*, kNumTokenFeatures> kTokenFeatureNames = {
    "idf", "field_position", "source_is_question", "is_numeric", "input_term_frequency"};

const char* kRewriteSystemPrompt =
    "You are a search query alignment assistant. The user message contains a question, "
    "optionally followed by an image description. Rewrite it into a single compact search "
    "query of at most 200 words that a dense retriever can resolve: keep the key entities, "
    "technical terms, error strings, identifiers, and domain concepts; drop greetings, "
    "conversational filler, and redundant phrasing. Output only the rewritten query text.";

namespace {

constexpr const char* kCaptionSeparator = " Image Description: ";

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

bool all_ascii_digits(const std::string& token) {
    if (token.empty()) return false;
    return std::all_of(token.begin(), token.end(),
                       [](unsigned char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

int word_count(std::string_view text) {
    int count = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        const bool space = std::isspace(c) != 0;
        if (!space && !in_word) ++count;
        in_word = !space;
    }
    return count;
}

std::string truncate_words(std::string_view text, int max_words) {
    if (word_count(text) <= max_words) return std::string(text);
    std::string out;
    int count = 0;
    bool in_word = false;
    for (char ch : text) {
        const bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
        if (!space && !in_word) {
            if (count == max_words) break;
            ++count;
            if (!out.empty()) out += ' ';
        }
        in_word = !space;
        if (!space) out += ch;
    }
    return out;
}

AlignmentInput compose_input(const std::string& question_text, const std::string& caption_text,
                             const TokenizerConfig& config) {
    if (question_text.empty()) {
        throw Error(ErrorKind::data, "compose_input: question text must be non-empty");
    }
    AlignmentInput input;
    input.question_text = question_text;
    input.caption_text = caption_text;
    if (caption_text.empty()) {
        input.composed = question_text;
    } else {
        input.composed = question_text + kCaptionSeparator + caption_text;
    }

    TokenizedText question_tokens = tokenize(question_text, config);
    for (std::size_t i = 0; i < question_tokens.size(); ++i) {
        input.tokens.tokens.push_back(std::move(question_tokens.tokens[i]));
        input.tokens.source_spans.push_back(question_tokens.source_spans[i]);
        input.sources.push_back(TokenSource::question);
    }
    if (!caption_text.empty()) {
        const std::size_t offset = question_text.size() + std::string(kCaptionSeparator).size();
        TokenizedText caption_tokens = tokenize(caption_text, config);
        for (std::size_t i = 0; i < caption_tokens.size(); ++i) {
            input.tokens.tokens.push_back(std::move(caption_tokens.tokens[i]));
            auto [start, end] = caption_tokens.source_spans[i];
            input.tokens.source_spans.emplace_back(start + offset, end + offset);
            input.sources.push_back(TokenSource::caption);
        }
    }
    return input;
}

std::vector<TokenFeatures> token_features(const AlignmentInput& input, const Vocabulary& vocab) {
    const std::size_t n = input.tokens.size();

    std::size_t question_count = 0;
    for (TokenSource s : input.sources) {
        if (s == TokenSource::question) ++question_count;
    }
    const std::size_t caption_count = n - question_count;

    std::unordered_map<std::string, double> input_tf;
    for (const std::string& t : input.tokens.tokens) input_tf[t] += 1.0;

    std::vector<TokenFeatures> features(n);
    std::size_t q_seen = 0, c_seen = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& token = input.tokens.tokens[i];
        const bool is_question = input.sources[i] == TokenSource::question;
        const std::size_t field_count = is_question ? question_count : caption_count;
        const std::size_t field_index = is_question ? q_seen++ : c_seen++;
        const double position =
            field_count > 1
                ? static_cast<double>(field_index) / static_cast<double>(field_count - 1)
                : 0.0;
        features[i] = TokenFeatures{
            vocab.idf(token),
            position,
            is_question ? 1.0 : 0.0,
            all_ascii_digits(token) ? 1.0 : 0.0,
            input_tf[token],
        };
    }
    return features;
}

std::vector<double> keep_probabilities(const PolicyParameters& policy,
                                       const std::vector<TokenFeatures>& features) {
    std::vector<double> probs(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        double z = policy.bias;
        for (std::size_t f = 0; f < kNumTokenFeatures; ++f) {
            z += policy.weights[f] * features[i][f];
        }
        probs[i] = logistic(z);
    }
    return probs;
}

double mask_log_prob(const std::vector<double>& probabilities,
                     const std::vector<std::uint8_t>& mask) {
    if (probabilities.size() != mask.size()) {
        throw Error(ErrorKind::internal, "mask_log_prob: mask length mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        total += mask[i] ? std::log(probabilities[i]) : std::log(1.0 - probabilities[i]);
    }
    return total;
}

PolicyGradient mask_log_prob_gradient(const std::vector<double>& probabilities,
                                      const std::vector<TokenFeatures>& features,
                                      const std::vector<std::uint8_t>& mask) {
    if (probabilities.size() != mask.size() || features.size() != mask.size()) {
        throw Error(ErrorKind::internal, "mask_log_prob_gradient: length mismatch");
    }
    PolicyGradient grad;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const double residual = (mask[i] ? 1.0 : 0.0) - probabilities[i];
        for (std::size_t f = 0; f < kNumTokenFeatures; ++f) {
            grad.weights[f] += residual * features[i][f];
        }
        grad.bias += residual;
    }
    return grad;
}

namespace {

// Applies the word cap and the all-dropped fallback, then renders the kept
// tokens in input order.
AlignedQuery finalize_mask(const AlignmentInput& input, const std::vector<double>& probs,
                           std::vector<std::uint8_t> mask, const char* backend) {
    const std::size_t n = input.tokens.size();
    AlignedQuery out;
    out.backend = backend;

    if (n == 0) {
        // No token view at all (e.g. punctuation-only question): fall back to
        // the raw composed text under the cap.
        out.text = truncate_words(input.composed, kMaxAlignedWords);
        out.word_count = word_count(out.text);
        out.kept_mask = std::move(mask);
        return out;
    }

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < n; ++i) {
        if (mask[i]) kept.push_back(i);
    }

    if (kept.empty()) {
        // Fallback: top tokens by keep probability, earlier tokens first on ties.
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (probs[a] != probs[b]) return probs[a] > probs[b];
            return a < b;
        });
        order.resize(std::min<std::size_t>(kFallbackTopTokens, n));
        kept = std::move(order);
        std::sort(kept.begin(), kept.end());
        for (std::size_t i : kept) mask[i] = 1;
    } else if (kept.size() > static_cast<std::size_t>(kMaxAlignedWords)) {
        // Drop the lowest-probability kept tokens; later tokens go first on ties.
        std::vector<std::size_t> by_prob = kept;
        std::sort(by_prob.begin(), by_prob.end(), [&](std::size_t a, std::size_t b) {
            if (probs[a] != probs[b]) return probs[a] < probs[b];
            return a > b;
        });
        const std::size_t to_drop = kept.size() - static_cast<std::size_t>(kMaxAlignedWords);
        for (std::size_t i = 0; i < to_drop; ++i) mask[by_prob[i]] = 0;
        kept.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (mask[i]) kept.push_back(i);
        }
    }

    std::string text;
    for (std::size_t i : kept) {
        if (!text.empty()) text += ' ';
        text += input.tokens.tokens[i];
    }
    out.text = std::move(text);
    out.word_count = static_cast<int>(kept.size());
    out.kept_mask = std::move(mask);
    return out;
}

}  // namespace

AlignedQuery sample_rewrite(const PolicyParameters& policy, const AlignmentInput& input,
                            const std::vector<TokenFeatures>& features, std::mt19937_64& rng) {
    const std::vector<double> probs = keep_probabilities(policy, features);
    std::vector<std::uint8_t> mask(probs.size(), 0);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        mask[i] = next_unit(rng) < probs[i] ? 1 : 0;
    }
    return finalize_mask(input, probs, std::move(mask), "policy-sample");
}

AlignedQuery greedy_rewrite(const PolicyParameters& policy, const AlignmentInput& input,
                            const std::vector<TokenFeatures>& features) {
    const std::vector<double> probs = keep_probabilities(policy, features);
    std::vector<std::uint8_t> mask(probs.size(), 0);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        mask[i] = probs[i] >= 0.5 ? 1 : 0;  // ties kept: zero policy = identity rewriter
    }
    return finalize_mask(input, probs, std::move(mask), "policy");
}

double reward(const AlignedQuery& aligned, const std::string& positive_doc_id,
              const Retriever& retriever, int k) {
    RankedList ranked = retriever.search(aligned.text, k);
    ranked.query_id = "reward";
    RelevanceJudgments singleton;
    singleton.set("reward", {Judgment{positive_doc_id, 1}});
    return ndcg_at_k(ranked, singleton, k);
}

std::pair<double, std::vector<double>> grpo_advantages(const std::vector<double>& rewards,
                                                       bool std_normalize) {
    if (rewards.size() < 2) {
        throw Error(ErrorKind::usage, "grpo_advantages: group size must be >= 2");
    }
    const double baseline =
        std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
    std::vector<double> advantages(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) advantages[i] = rewards[i] - baseline;
    if (std_normalize) {
        double var = 0.0;
        for (double a : advantages) var += a * a;
        const double stddev = std::sqrt(var / static_cast<double>(advantages.size()));
        if (stddev > 0.0) {
            for (double& a : advantages) a /= stddev;
        }
    }
    return {baseline, advantages};
}

PolicyParameters grpo_update(const PolicyParameters& policy, const RolloutGroup& group,
                             double learning_rate) {
    if (group.candidates.size() != group.advantages.size()) {
        throw Error(ErrorKind::internal, "grpo_update: advantages not populated");
    }
    bool any_nonzero = false;
    for (double a : group.advantages) {
        if (a != 0.0) any_nonzero = true;
    }
    if (!any_nonzero) return policy;  // exact no-op at the GRPO fixed point

    const std::vector<double> probs = keep_probabilities(policy, group.features);
    PolicyGradient total;
    for (std::size_t g = 0; g < group.candidates.size(); ++g) {
        const auto& mask = group.candidates[g].kept_mask;
        if (!mask) {
            throw Error(ErrorKind::internal, "grpo_update: candidate missing kept_mask");
        }
        PolicyGradient grad = mask_log_prob_gradient(probs, group.features, *mask);
        const double advantage = group.advantages[g];
        for (std::size_t f = 0; f < kNumTokenFeatures; ++f) {
            total.weights[f] += advantage * grad.weights[f];
        }
        total.bias += advantage * grad.bias;
    }

    PolicyParameters updated = policy;
    for (std::size_t f = 0; f < kNumTokenFeatures; ++f) {
        updated.weights[f] += learning_rate * total.weights[f];
    }
    updated.bias += learning_rate * total.bias;
    for (double w : updated.weights) {
        if (!std::isfinite(w)) {
            throw Error(ErrorKind::internal, "grpo_update: non-finite policy weight");
        }
    }
    if (!std::isfinite(updated.bias)) {
        throw Error(ErrorKind::internal, "grpo_update: non-finite policy bias");
    }
    return updated;
}

PolicyParameters sft_update(const PolicyParameters& policy,
                            const std::vector<TokenFeatures>& features,
                            const std::vector<std::uint8_t>& reference_mask,
                            double learning_rate) {
    if (features.size() != reference_mask.size()) {
        throw Error(ErrorKind::usage, "sft_update: reference mask length mismatch");
    }
    if (features.empty()) return policy;
    const std::vector<double> probs = keep_probabilities(policy, features);
    // Mean BCE gradient: (p - m) f per token.
    PolicyGradient grad;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double residual = probs[i] - (reference_mask[i] ? 1.0 : 0.0);
        for (std::size_t f = 0; f < kNumTokenFeatures; ++f) {
            grad.weights[f] += residual * features[i][f];
        }
        grad.bias += residual;
    }
    const double scale = 1.0 / static_cast<double>(features.size());
    PolicyParameters updated = policy;
    for (std::size_t f = 0; f < kNumTokenFeatures; ++f) {
        updated.weights[f] -= learning_rate * scale * grad.weights[f];
    }
    updated.bias -= learning_rate * scale * grad.bias;
    return updated;
}

void ForgeTrainConfig::validate() const {
    if (group_size < 2) throw Error(ErrorKind::config, "forge: group size must be >= 2");
    if (learning_rate < 0.0) throw Error(ErrorKind::config, "forge: learning rate must be >= 0");
    if (epochs < 1) throw Error(ErrorKind::config, "forge: epochs must be >= 1");
    if (k < 1) throw Error(ErrorKind::config, "forge: k must be >= 1");
}

ForgeTrainResult train_forge(const std::vector<MultimodalQuery>& queries,
                             const RelevanceJudgments& qrels, const CaptionSource& captions,
                             const Retriever& retriever, const Vocabulary& vocab,
                             const ForgeTrainConfig& config) {
    config.validate();
    if (queries.empty()) throw Error(ErrorKind::data, "train_forge: empty training set");

    ForgeTrainResult result;
    auto rng = substream(config.seed, "rollout");

    // Compose inputs once; captions and features are deterministic.
    struct Prepared {
        AlignmentInput input;
        std::vector<TokenFeatures> features;
        std::string positive;
    };
    std::vector<Prepared> prepared;
    prepared.reserve(queries.size());
    for (const MultimodalQuery& query : queries) {
        auto positive = qrels.primary_positive(query.query_id);
        if (!positive) {
            throw Error(ErrorKind::data,
                        "train_forge: query \"" + query.query_id + "\" has no positive judgment");
        }
        Prepared p;
        p.input = compose_input(query.question_text, captions ? captions(query) : std::string{},
                                vocab.tokenizer_config());
        p.features = token_features(p.input, vocab);
        p.positive = *positive;
        prepared.push_back(std::move(p));
    }

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double reward_sum = 0.0;
        std::size_t reward_count = 0;
        for (const Prepared& p : prepared) {
            RolloutGroup group;
            group.input = p.input;
            group.features = p.features;
            for (int g = 0; g < config.group_size; ++g) {
                AlignedQuery candidate = sample_rewrite(result.policy, p.input, p.features, rng);
                group.rewards.push_back(reward(candidate, p.positive, retriever, config.k));
                group.candidates.push_back(std::move(candidate));
            }
            auto [baseline, advantages] =
                grpo_advantages(group.rewards, config.std_normalize_advantages);
            group.baseline = baseline;
            group.advantages = std::move(advantages);
            reward_sum += std::accumulate(group.rewards.begin(), group.rewards.end(), 0.0);
            reward_count += group.rewards.size();
            result.policy = grpo_update(result.policy, group, config.learning_rate);
        }
        result.epoch_mean_reward.push_back(reward_sum / static_cast<double>(reward_count));
    }
    return result;
}

std::vector<std::uint8_t> oracle_keep_mask(const AlignmentInput& input, const Document& positive,
                                           const TokenizerConfig& config) {
    TokenizedText doc_tokens = tokenize(positive.text, config);
    std::set<std::string> doc_terms(doc_tokens.tokens.begin(), doc_tokens.tokens.end());
    std::vector<std::uint8_t> mask(input.tokens.size(), 0);
    for (std::size_t i = 0; i < input.tokens.size(); ++i) {
        mask[i] = doc_terms.count(input.tokens.tokens[i]) ? 1 : 0;
    }
    return mask;
}

ForgeTrainResult train_forge_sft(const std::vector<MultimodalQuery>& queries,
                                 const RelevanceJudgments& qrels, const CaptionSource& captions,
                                 const Corpus& corpus, const Vocabulary& vocab,
                                 const ForgeTrainConfig& config) {
    config.validate();
    if (queries.empty()) throw Error(ErrorKind::data, "train_forge_sft: empty training set");

    ForgeTrainResult result;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double mask_agreement = 0.0;
        std::size_t token_count = 0;
        for (const MultimodalQuery& query : queries) {
            auto positive = qrels.primary_positive(query.query_id);
            if (!positive) {
                throw Error(ErrorKind::data, "train_forge_sft: query \"" + query.query_id +
                                                 "\" has no positive judgment");
            }
            const Document* doc = corpus.find(*positive);
            if (!doc) {
                throw Error(ErrorKind::data,
                            "train_forge_sft: positive doc \"" + *positive + "\" not in corpus");
            }
            AlignmentInput input =
                compose_input(query.question_text, captions ? captions(query) : std::string{},
                              vocab.tokenizer_config());
            std::vector<TokenFeatures> features = token_features(input, vocab);
            std::vector<std::uint8_t> mask = oracle_keep_mask(input, *doc, vocab.tokenizer_config());
            result.policy = sft_update(result.policy, features, mask, config.learning_rate);

            const std::vector<double> probs = keep_probabilities(result.policy, features);
            for (std::size_t i = 0; i < mask.size(); ++i) {
                const bool kept = probs[i] >= 0.5;
                mask_agreement += kept == (mask[i] != 0) ? 1.0 : 0.0;
            }
            token_count += mask.size();
        }
        // The "reward" curve for SFT tracks mask agreement, a bounded proxy.
        result.epoch_mean_reward.push_back(
            token_count ? mask_agreement / static_cast<double>(token_count) : 0.0);
    }
    return result;
}

void save_policy(const PolicyParameters& policy, const std::string& path) {
    nlohmann::json j;
    j["kind"] = "forge_policy";
    j["format_version"] = 1;
    nlohmann::json features = nlohmann::json::array();
    for (const char* name : kTokenFeatureNames) features.push_back(name);
    j["feature_names"] = std::move(features);
    j["weights"] = policy.weights;
    j["bias"] = policy.bias;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write policy checkpoint: " + path);
    out << j.dump(2) << "\n";
}

PolicyParameters load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open policy checkpoint: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || j.value("kind", "") != std::string("forge_policy")) {
        throw Error(ErrorKind::data, "not a policy checkpoint: " + path);
    }
    PolicyParameters policy;
    const auto& weights = j.at("weights");
    if (weights.size() != kNumTokenFeatures) {
        throw Error(ErrorKind::data, "policy checkpoint has wrong feature count");
    }
    for (std::size_t f = 0; f < kNumTokenFeatures; ++f) policy.weights[f] = weights[f];
    policy.bias = j.at("bias").get<double>();
    return policy;
}

AlignedQuery IdentityRewriter::rewrite(const AlignmentInput& input) const {
    AlignedQuery out;
    out.text = truncate_words(input.question_text, kMaxAlignedWords);
    out.word_count = word_count(out.text);
    out.backend = name();
    return out;
}

AlignedQuery CaptionConcatRewriter::rewrite(const AlignmentInput& input) const {
    AlignedQuery out;
    out.text = truncate_words(input.composed, kMaxAlignedWords);
    out.word_count = word_count(out.text);
    out.backend = name();
    return out;
}

AlignedQuery PolicyRewriter::rewrite(const AlignmentInput& input) const {
    AlignedQuery out = greedy_rewrite(policy_, input, token_features(input, *vocab_));
    out.backend = name();
    return out;
}

RewriteCache::RewriteCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // cache starts empty; created on first store
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) continue;
        entries_[record.value("key", "")] = record.value("text", "");
    }
}

std::optional<std::string> RewriteCache::lookup(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void RewriteCache::store(const std::string& key, const std::string& text,
                         const std::string& model) {
    entries_[key] = text;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error(ErrorKind::io, "cannot append to rewrite cache: " + path_);
    nlohmann::json record = {{"key", key}, {"text", text}, {"model", model}};
    out << record.dump() << "\n";
}

AlignedQuery remote_rewrite(const OpenAiClient& client, const AlignmentInput& input,
                            RewriteCache* cache) {
    std::ostringstream key_stream;
    key_stream << std::hex
               << fnv1a64(std::string(kRewriteSystemPrompt) + "\x1f" + input.composed);
    const std::string key = key_stream.str();

    if (cache) {
        if (auto hit = cache->lookup(key)) {
            AlignedQuery out;
            out.text = *hit;
            out.word_count = word_count(out.text);
            out.backend = "remote:" + client.config().model;
            return out;
        }
    }

    std::string response = client.chat(kRewriteSystemPrompt, input.composed, {}, 0.0);
    // Trim surrounding whitespace before the cap.
    const auto first = response.find_first_not_of(" \t\r\n");
    const auto last = response.find_last_not_of(" \t\r\n");
    response = first == std::string::npos ? std::string{}
                                          : response.substr(first, last - first + 1);
    if (response.empty()) {
        throw Error(ErrorKind::remote, "remote rewrite returned an empty response");
    }
    AlignedQuery out;
    out.text = truncate_words(response, kMaxAlignedWords);
    out.word_count = word_count(out.text);
    out.backend = "remote:" + client.config().model;
    if (cache) cache->store(key, out.text, client.config().model);
    return out;
}

AlignedQuery RemoteRewriter::rewrite(const AlignmentInput& input) const {
    return remote_rewrite(*client_, input, cache_.get());
}

}  // namespace bridge
