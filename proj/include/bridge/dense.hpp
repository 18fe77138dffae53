#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bridge/corpus.hpp"
#include "bridge/text.hpp"

namespace bridge {

// Trainable shallow text encoder: a |V| x d embedding table pooled by an
// idf-weighted mean over token occurrences. Deliberately order-invariant;
// it exists to be exactly differentiable, not to model syntax.
struct EncoderParameters {
    std::shared_ptr<const Vocabulary> vocab;
    std::size_t dim = 64;
    bool idf_weighting = true;
    std::uint64_t parameter_version = 1;
    std::vector<double> table;  // |V| x d, row-major

    double* row(std::uint32_t term_id) { return table.data() + term_id * dim; }
    const double* row(std::uint32_t term_id) const { return table.data() + term_id * dim; }

    // Stamp binding indexes to the encoder shape/config (not the weights).
    std::uint64_t config_hash() const;
};

EncoderParameters init_encoder(std::shared_ptr<const Vocabulary> vocab, std::size_t dim,
                               std::uint64_t seed, bool idf_weighting = true);

struct EmbeddingVector {
    std::vector<double> values;
    bool degenerate = false;  // empty or all-unknown input; scores 0 everywhere
};

// Per-text pooling coefficients: embedding = sum of coeff * table_row.
// Needed by the trainer to backpropagate through the pooled mean.
struct PooledEncoding {
    EmbeddingVector vector;
    std::vector<std::pair<std::uint32_t, double>> coefficients;  // term_id -> weight share
};

PooledEncoding encode_with_coefficients(const EncoderParameters& params,
                                        const std::vector<std::string>& tokens);
EmbeddingVector encode_text(const EncoderParameters& params,
                            const std::vector<std::string>& tokens);

// Cosine similarity; either side degenerate (zero norm) scores 0.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Offline document embeddings, one row per document in corpus order.
class VectorIndex {
public:
    VectorIndex() = default;

    static VectorIndex build(const EncoderParameters& params, const Corpus& corpus);

    std::size_t num_docs() const { return doc_ids_.size(); }
    std::size_t dim() const { return dim_; }
    std::uint64_t parameter_version() const { return parameter_version_; }
    std::uint64_t config_hash() const { return config_hash_; }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    const double* doc_row(std::size_t i) const { return rows_.data() + i * dim_; }
    const std::vector<std::string>& degenerate_doc_ids() const { return degenerate_doc_ids_; }

    void save(const std::string& path) const;
    static VectorIndex load(const std::string& path);

    friend VectorIndex build_vector_index_from_rows(std::vector<std::string> doc_ids,
                                                    std::size_t dim, std::vector<double> rows,
                                                    std::uint64_t parameter_version,
                                                    std::uint64_t config_hash);

private:
    std::vector<std::string> doc_ids_;
    std::size_t dim_ = 0;
    std::vector<double> rows_;  // N x dim
    std::vector<std::string> degenerate_doc_ids_;
    std::uint64_t parameter_version_ = 0;
    std::uint64_t config_hash_ = 0;
};

// Index construction from externally produced embeddings (e.g. a remote
// embeddings endpoint).
VectorIndex build_vector_index_from_rows(std::vector<std::string> doc_ids, std::size_t dim,
                                         std::vector<double> rows,
                                         std::uint64_t parameter_version,
                                         std::uint64_t config_hash);

// Exhaustive cosine search; ties broken by ascending doc_id. The index must
// carry the same parameter_version as `params`.
RankedList dense_search(const EncoderParameters& params, const VectorIndex& index,
                        const std::string& query_text, int k);

// Search over a prebuilt query embedding (shared by the remote backend).
RankedList dense_search_embedding(const EmbeddingVector& query, const VectorIndex& index, int k);

// Encoder checkpoint: JSON header (config echo + vocabulary) followed by
// the table in the same 32-bit float layout as the vector index.
void save_encoder(const EncoderParameters& params, const std::string& path);
EncoderParameters load_encoder(const std::string& path);

}  // namespace bridge
