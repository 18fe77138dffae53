#include "bridge/lens_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <unordered_map>

#include "bridge/error.hpp"
#include "bridge/rng.hpp"

namespace bridge {

void LensTrainConfig::validate() const {
    if (temperature <= 0.0) throw Error(ErrorKind::config, "lens: temperature must be > 0");
    if (hard_negatives < 0) throw Error(ErrorKind::config, "lens: hard negatives must be >= 0");
    if (batch_size < 1) throw Error(ErrorKind::config, "lens: batch_size must be >= 1");
    // 0 is allowed: an evaluation-only pass that leaves parameters unchanged.
    if (learning_rate < 0.0) throw Error(ErrorKind::config, "lens: learning_rate must be >= 0");
    if (epochs < 1) throw Error(ErrorKind::config, "lens: epochs must be >= 1");
}

double EmbeddingGradient::max_abs() const {
    double m = 0.0;
    for (const auto& [row, values] : rows) {
        for (double v : values) m = std::max(m, std::fabs(v));
    }
    return m;
}

std::vector<std::string> merge_negative_candidates(const std::vector<std::string>& bm25_ids,
                                                   const std::vector<std::string>& dense_ids,
                                                   const std::string& positive_doc_id, int m) {
    std::vector<std::string> out;
    std::set<std::string> taken;
    auto consume = [&](const std::vector<std::string>& ids) {
        for (const std::string& doc_id : ids) {
            if (static_cast<int>(out.size()) >= m) return;
            if (doc_id == positive_doc_id) continue;
            if (!taken.insert(doc_id).second) continue;
            out.push_back(doc_id);
        }
    };
    consume(bm25_ids);  // BM25 candidates fill first, dense backfills
    consume(dense_ids);
    return out;
}

std::vector<std::string> mine_hard_negatives(const std::string& query_text,
                                             const std::string& positive_doc_id,
                                             const InvertedIndex& bm25_index,
                                             const EncoderParameters& params,
                                             const VectorIndex& vector_index, int m) {
    if (m == 0) return {};
    if (m < 0) throw Error(ErrorKind::usage, "mine_hard_negatives: M must be >= 0");

    const TokenizerConfig& tok = params.vocab->tokenizer_config();
    RankedList lexical = bm25_index.search(tokenize(query_text, tok).tokens, m + 1);
    RankedList dense = dense_search(params, vector_index, query_text, m + 1);

    auto ids_of = [](const RankedList& ranked) {
        std::vector<std::string> ids;
        ids.reserve(ranked.items.size());
        for (const RankedItem& item : ranked.items) ids.push_back(item.doc_id);
        return ids;
    };
    std::vector<std::string> out =
        merge_negative_candidates(ids_of(lexical), ids_of(dense), positive_doc_id, m);
    if (static_cast<int>(out.size()) < m) {
        std::cerr << "warning: mined only " << out.size() << " of " << m
                  << " hard negatives (corpus too small)\n";
    }
    return out;
}

namespace {

struct BatchEvaluation {
    double loss = 0.0;
    EmbeddingGradient gradient;
    std::size_t used_instances = 0;
    std::vector<std::string> warnings;
};

// Shared loss/gradient evaluation. The gradient pass is skipped when
// `with_gradient` is false so plain loss calls stay cheap.
BatchEvaluation evaluate_batch(const EncoderParameters& params, const Corpus& corpus,
                               const std::vector<ContrastiveInstance>& batch,
                               const LensTrainConfig& config, bool with_gradient) {
    config.validate();
    if (batch.empty()) throw Error(ErrorKind::usage, "infonce: batch must be non-empty");

    const TokenizerConfig& tok = params.vocab->tokenizer_config();
    const std::size_t dim = params.dim;

    // Every document is encoded once per batch.
    std::unordered_map<std::string, PooledEncoding> doc_cache;
    auto doc_encoding = [&](const std::string& doc_id) -> const PooledEncoding& {
        auto it = doc_cache.find(doc_id);
        if (it != doc_cache.end()) return it->second;
        const Document* doc = corpus.find(doc_id);
        if (!doc) throw Error(ErrorKind::data, "infonce: unknown doc_id \"" + doc_id + "\"");
        PooledEncoding enc = encode_with_coefficients(params, tokenize(doc->text, tok).tokens);
        return doc_cache.emplace(doc_id, std::move(enc)).first->second;
    };

    for (const ContrastiveInstance& inst : batch) {
        std::set<std::string> negs(inst.hard_negative_doc_ids.begin(),
                                   inst.hard_negative_doc_ids.end());
        if (negs.size() != inst.hard_negative_doc_ids.size()) {
            throw Error(ErrorKind::data, "infonce: duplicate hard negatives in instance");
        }
        if (negs.count(inst.positive_doc_id)) {
            throw Error(ErrorKind::data, "infonce: positive listed among hard negatives");
        }
    }

    BatchEvaluation eval;
    struct PairGrad {
        const PooledEncoding* query;
        const PooledEncoding* doc;
        double dloss_dscore;
    };
    std::vector<PooledEncoding> query_encodings(batch.size());
    std::vector<PairGrad> pair_grads;
    double total_loss = 0.0;

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const ContrastiveInstance& inst = batch[i];
        query_encodings[i] = encode_with_coefficients(params, tokenize(inst.query_text, tok).tokens);
        const PooledEncoding& query = query_encodings[i];
        if (query.vector.degenerate) {
            eval.warnings.push_back("instance " + std::to_string(i) +
                                    " skipped: degenerate query embedding");
            continue;
        }
        const PooledEncoding& positive = doc_encoding(inst.positive_doc_id);
        if (positive.vector.degenerate) {
            eval.warnings.push_back("instance " + std::to_string(i) +
                                    " skipped: degenerate positive embedding");
            continue;
        }

        // Negative pool: own hard negatives, then other instances' positives.
        std::vector<const PooledEncoding*> negatives;
        std::vector<std::string> negative_ids;
        std::set<std::string> seen;
        auto add_negative = [&](const std::string& doc_id) {
            if (doc_id == inst.positive_doc_id) return;
            if (!seen.insert(doc_id).second) return;
            const PooledEncoding& enc = doc_encoding(doc_id);
            if (enc.vector.degenerate) {
                eval.warnings.push_back("negative \"" + doc_id + "\" skipped: degenerate embedding");
                return;
            }
            negatives.push_back(&enc);
            negative_ids.push_back(doc_id);
        };
        for (const std::string& doc_id : inst.hard_negative_doc_ids) add_negative(doc_id);
        if (config.use_in_batch_negatives) {
            for (std::size_t j = 0; j < batch.size(); ++j) {
                if (j != i) add_negative(batch[j].positive_doc_id);
            }
        }

        // Softmax over {positive} + negatives at temperature tau.
        const double inv_tau = 1.0 / config.temperature;
        std::vector<double> logits;
        logits.reserve(negatives.size() + 1);
        logits.push_back(cosine(query.vector, positive.vector) * inv_tau);
        for (const PooledEncoding* neg : negatives) {
            logits.push_back(cosine(query.vector, neg->vector) * inv_tau);
        }
        const double max_logit = *std::max_element(logits.begin(), logits.end());
        double denom = 0.0;
        for (double z : logits) denom += std::exp(z - max_logit);
        const double log_prob_pos = logits[0] - max_logit - std::log(denom);
        total_loss += -log_prob_pos;
        eval.used_instances += 1;

        if (with_gradient) {
            for (std::size_t j = 0; j < logits.size(); ++j) {
                const double prob = std::exp(logits[j] - max_logit) / denom;
                const double indicator = j == 0 ? 1.0 : 0.0;
                const double dloss_dscore = (prob - indicator) * inv_tau;
                const PooledEncoding* doc = j == 0 ? &positive : negatives[j - 1];
                pair_grads.push_back(PairGrad{&query, doc, dloss_dscore});
            }
        }
    }

    if (eval.used_instances == 0) {
        // Nothing trainable in this batch (all embeddings degenerate):
        // zero loss, zero gradient, warnings already recorded.
        eval.warnings.push_back("batch skipped entirely: no usable instances");
        return eval;
    }
    const double scale = 1.0 / static_cast<double>(eval.used_instances);
    eval.loss = total_loss * scale;

    if (with_gradient) {
        auto add_to_row = [&](std::uint32_t term_id, const std::vector<double>& vec, double factor) {
            auto [it, inserted] = eval.gradient.rows.try_emplace(term_id);
            if (inserted) it->second.assign(dim, 0.0);
            for (std::size_t d = 0; d < dim; ++d) it->second[d] += factor * vec[d];
        };
        std::vector<double> grad_q(dim), grad_d(dim);
        for (const PairGrad& pg : pair_grads) {
            const auto& q = pg.query->vector.values;
            const auto& d = pg.doc->vector.values;
            double dot = 0.0, qq = 0.0, dd = 0.0;
            for (std::size_t x = 0; x < dim; ++x) {
                dot += q[x] * d[x];
                qq += q[x] * q[x];
                dd += d[x] * d[x];
            }
            const double qn = std::sqrt(qq), dn = std::sqrt(dd);
            const double s = dot / (qn * dn);
            const double w = pg.dloss_dscore * scale;
            // d cos / d q = d/(|q||d|) - s q/|q|^2 ; symmetric for d.
            for (std::size_t x = 0; x < dim; ++x) {
                grad_q[x] = w * (d[x] / (qn * dn) - s * q[x] / qq);
                grad_d[x] = w * (q[x] / (qn * dn) - s * d[x] / dd);
            }
            for (const auto& [term_id, coeff] : pg.query->coefficients) {
                add_to_row(term_id, grad_q, coeff);
            }
            for (const auto& [term_id, coeff] : pg.doc->coefficients) {
                add_to_row(term_id, grad_d, coeff);
            }
        }
    }
    return eval;
}

}  // namespace

double infonce_loss(const EncoderParameters& params, const Corpus& corpus,
                    const std::vector<ContrastiveInstance>& batch, const LensTrainConfig& config) {
    return evaluate_batch(params, corpus, batch, config, /*with_gradient=*/false).loss;
}

EmbeddingGradient infonce_gradient(const EncoderParameters& params, const Corpus& corpus,
                                   const std::vector<ContrastiveInstance>& batch,
                                   const LensTrainConfig& config) {
    return evaluate_batch(params, corpus, batch, config, /*with_gradient=*/true).gradient;
}

double gradient_check(const EncoderParameters& params, const Corpus& corpus,
                      const std::vector<ContrastiveInstance>& batch,
                      const LensTrainConfig& config, double epsilon) {
    EmbeddingGradient analytic = infonce_gradient(params, corpus, batch, config);
    EncoderParameters probe = params;
    double max_rel_err = 0.0;
    for (const auto& [term_id, row_grad] : analytic.rows) {
        for (std::size_t d = 0; d < params.dim; ++d) {
            double* cell = probe.row(term_id) + d;
            const double original = *cell;
            *cell = original + epsilon;
            const double loss_plus = infonce_loss(probe, corpus, batch, config);
            *cell = original - epsilon;
            const double loss_minus = infonce_loss(probe, corpus, batch, config);
            *cell = original;
            const double numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
            const double a = row_grad[d];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-10});
            max_rel_err = std::max(max_rel_err, std::fabs(a - numeric) / denom);
        }
    }
    return max_rel_err;
}

LensTrainResult train_lens(const Corpus& corpus, const RelevanceJudgments& qrels,
                           const std::vector<MultimodalQuery>& queries,
                           const LensTrainConfig& config, const EncoderParameters* initial,
                           const std::function<std::string(const MultimodalQuery&)>& query_text_fn) {
    config.validate();

    LensTrainResult result;
    if (initial) {
        result.params = *initial;
    } else {
        auto vocab = std::make_shared<Vocabulary>(build_vocabulary(corpus, TokenizerConfig{}));
        result.params = init_encoder(std::move(vocab), config.dim, config.seed, config.idf_weighting);
    }
    const std::uint64_t base_version = result.params.parameter_version;

    // Assemble instances in query order; queries without positives are an error
    // in the training path (the harness filters them before we get here).
    std::vector<ContrastiveInstance> instances;
    InvertedIndex bm25 =
        InvertedIndex::build(corpus, result.params.vocab->tokenizer_config());
    VectorIndex initial_index = VectorIndex::build(result.params, corpus);
    for (const MultimodalQuery& query : queries) {
        auto positive = qrels.primary_positive(query.query_id);
        if (!positive) {
            throw Error(ErrorKind::data,
                        "train_lens: query \"" + query.query_id + "\" has no positive judgment");
        }
        ContrastiveInstance inst;
        inst.query_text = query_text_fn ? query_text_fn(query) : query.question_text;
        inst.positive_doc_id = *positive;
        inst.hard_negative_doc_ids = mine_hard_negatives(
            inst.query_text, inst.positive_doc_id, bm25, result.params, initial_index,
            config.hard_negatives);
        instances.push_back(std::move(inst));
    }
    if (instances.empty()) throw Error(ErrorKind::data, "train_lens: empty training set");

    auto rng = substream(config.seed, "lens-shuffle");
    std::vector<std::size_t> order(instances.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    int step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle_each_epoch) shuffle_in_place(order, rng);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<ContrastiveInstance> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) batch.push_back(instances[order[i]]);

            BatchEvaluation eval =
                evaluate_batch(result.params, corpus, batch, config, /*with_gradient=*/true);
            for (const std::string& w : eval.warnings) result.warnings.push_back(w);
            result.loss_curve.emplace_back(step, eval.loss);
            for (const auto& [term_id, row_grad] : eval.gradient.rows) {
                double* row = result.params.row(term_id);
                for (std::size_t d = 0; d < result.params.dim; ++d) {
                    row[d] -= config.learning_rate * row_grad[d];
                }
            }
            ++step;
        }
    }
    result.params.parameter_version = base_version + 1;
    return result;
}

void save_loss_curve(const std::vector<std::pair<int, double>>& curve, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write loss curve: " + path);
    out << "step,loss\n";
    for (const auto& [step, loss] : curve) out << step << "," << loss << "\n";
}

}  // namespace bridge
