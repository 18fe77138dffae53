#include "bridge/dense.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "bridge/error.hpp"
#include "bridge/rng.hpp"
#include "json.hpp"

namespace bridge {

std::uint64_t EncoderParameters::config_hash() const {
    std::uint64_t h = fnv1a64("encoder-v1");
    h = hash_combine(h, dim);
    h = hash_combine(h, idf_weighting ? 1 : 0);
    h = hash_combine(h, vocab ? vocab->size() : 0);
    h = hash_combine(h, vocab ? vocab->tokenizer_config().config_hash() : 0);
    return h;
}

EncoderParameters init_encoder(std::shared_ptr<const Vocabulary> vocab, std::size_t dim,
                               std::uint64_t seed, bool idf_weighting) {
    if (dim < 2) throw Error(ErrorKind::config, "encoder: dim must be >= 2");
    if (!vocab) throw Error(ErrorKind::config, "encoder: vocabulary required");
    EncoderParameters params;
    params.vocab = std::move(vocab);
    params.dim = dim;
    params.idf_weighting = idf_weighting;
    params.parameter_version = 1;
    params.table.resize(params.vocab->size() * dim);
    auto rng = substream(seed, "init");
    for (double& x : params.table) x = next_uniform(rng, -0.05, 0.05);
    return params;
}

PooledEncoding encode_with_coefficients(const EncoderParameters& params,
                                        const std::vector<std::string>& tokens) {
    PooledEncoding out;
    out.vector.values.assign(params.dim, 0.0);

    // Collapse occurrences first: duplicates share one table row, and the
    // mean is invariant to repeating a token.
    std::map<std::uint32_t, double> weight_by_row;
    double weight_total = 0.0;
    for (const std::string& t : tokens) {
        const Vocabulary::Entry* entry = params.vocab->find(t);
        if (!entry) continue;  // unknown tokens are skipped
        const double w = params.idf_weighting ? params.vocab->idf(t) : 1.0;
        if (w <= 0.0) continue;
        weight_by_row[entry->term_id] += w;
        weight_total += w;
    }
    if (weight_total <= 0.0) {
        out.vector.degenerate = true;
        return out;
    }
    for (const auto& [term_id, weight] : weight_by_row) {
        const double coeff = weight / weight_total;
        out.coefficients.emplace_back(term_id, coeff);
        const double* row = params.row(term_id);
        for (std::size_t d = 0; d < params.dim; ++d) out.vector.values[d] += coeff * row[d];
    }
    return out;
}

EmbeddingVector encode_text(const EncoderParameters& params,
                            const std::vector<std::string>& tokens) {
    return encode_with_coefficients(params, tokens).vector;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.degenerate || b.degenerate || a.values.empty() || b.values.empty()) return 0.0;
    if (a.values.size() != b.values.size()) {
        throw Error(ErrorKind::internal, "cosine: dimension mismatch");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

VectorIndex VectorIndex::build(const EncoderParameters& params, const Corpus& corpus) {
    VectorIndex index;
    index.dim_ = params.dim;
    index.parameter_version_ = params.parameter_version;
    index.config_hash_ = params.config_hash();
    index.rows_.reserve(corpus.size() * params.dim);
    const TokenizerConfig& tok = params.vocab->tokenizer_config();
    for (const Document& doc : corpus.docs()) {
        EmbeddingVector v = encode_text(params, tokenize(doc.text, tok).tokens);
        if (v.degenerate) {
            index.degenerate_doc_ids_.push_back(doc.doc_id);
            v.values.assign(params.dim, 0.0);
        }
        index.doc_ids_.push_back(doc.doc_id);
        index.rows_.insert(index.rows_.end(), v.values.begin(), v.values.end());
    }
    return index;
}

VectorIndex build_vector_index_from_rows(std::vector<std::string> doc_ids, std::size_t dim,
                                         std::vector<double> rows,
                                         std::uint64_t parameter_version,
                                         std::uint64_t config_hash) {
    if (rows.size() != doc_ids.size() * dim) {
        throw Error(ErrorKind::internal, "vector index: row count does not match doc count");
    }
    VectorIndex index;
    index.doc_ids_ = std::move(doc_ids);
    index.dim_ = dim;
    index.rows_ = std::move(rows);
    index.parameter_version_ = parameter_version;
    index.config_hash_ = config_hash;
    return index;
}

namespace {

RankedList top_k_by_score(const std::vector<std::string>& doc_ids,
                          const std::vector<double>& scores, int k) {
    RankedList result;
    const std::size_t n = doc_ids.size();
    if (n == 0) return result;
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return doc_ids[a] < doc_ids[b];
                      });
    result.items.reserve(top);
    for (std::size_t i = 0; i < top; ++i) {
        result.items.push_back(RankedItem{doc_ids[order[i]], scores[order[i]]});
    }
    return result;
}

}  // namespace

RankedList dense_search_embedding(const EmbeddingVector& query, const VectorIndex& index, int k) {
    if (k < 1) throw Error(ErrorKind::usage, "dense: k must be >= 1");
    std::vector<double> scores(index.num_docs(), 0.0);
    if (!query.degenerate) {
        double qnorm = 0.0;
        for (double v : query.values) qnorm += v * v;
        qnorm = std::sqrt(qnorm);
        if (qnorm > 0.0) {
            for (std::size_t i = 0; i < index.num_docs(); ++i) {
                const double* row = index.doc_row(i);
                double dot = 0.0, dn = 0.0;
                for (std::size_t d = 0; d < index.dim(); ++d) {
                    dot += query.values[d] * row[d];
                    dn += row[d] * row[d];
                }
                scores[i] = dn > 0.0 ? dot / (qnorm * std::sqrt(dn)) : 0.0;
            }
        }
    }
    return top_k_by_score(index.doc_ids(), scores, k);
}

RankedList dense_search(const EncoderParameters& params, const VectorIndex& index,
                        const std::string& query_text, int k) {
    if (index.parameter_version() != params.parameter_version) {
        throw Error(ErrorKind::config,
                    "dense: vector index parameter_version " +
                        std::to_string(index.parameter_version()) +
                        " does not match encoder version " +
                        std::to_string(params.parameter_version));
    }
    const TokenizerConfig& tok = params.vocab->tokenizer_config();
    EmbeddingVector query = encode_text(params, tokenize(query_text, tok).tokens);
    return dense_search_embedding(query, index, k);
}

namespace {

constexpr char kVectorIndexMagic[8] = {'B', 'V', 'I', 'X', '0', '0', '0', '1'};

void write_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t read_u32(std::ifstream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::uint64_t read_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

}  // namespace

void VectorIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write vector index: " + path);
    out.write(kVectorIndexMagic, sizeof(kVectorIndexMagic));
    write_u32(out, static_cast<std::uint32_t>(dim_));
    write_u64(out, doc_ids_.size());
    write_u64(out, parameter_version_);
    write_u64(out, config_hash_);
    for (const std::string& id : doc_ids_) {
        write_u32(out, static_cast<std::uint32_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
    }
    // Row-major little-endian 32-bit floats.
    for (double v : rows_) {
        float f = static_cast<float>(v);
        out.write(reinterpret_cast<const char*>(&f), sizeof(f));
    }
    if (!out) throw Error(ErrorKind::io, "short write on vector index: " + path);
}

VectorIndex VectorIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open vector index: " + path);
    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (std::memcmp(magic, kVectorIndexMagic, sizeof(magic)) != 0) {
        throw Error(ErrorKind::data, "not a vector index file: " + path);
    }
    VectorIndex index;
    index.dim_ = read_u32(in);
    const std::uint64_t n = read_u64(in);
    index.parameter_version_ = read_u64(in);
    index.config_hash_ = read_u64(in);
    index.doc_ids_.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint32_t len = read_u32(in);
        std::string id(len, '\0');
        in.read(id.data(), len);
        index.doc_ids_.push_back(std::move(id));
    }
    index.rows_.resize(n * index.dim_);
    for (double& v : index.rows_) {
        float f = 0.0f;
        in.read(reinterpret_cast<char*>(&f), sizeof(f));
        v = static_cast<double>(f);
    }
    if (!in) throw Error(ErrorKind::data, "truncated vector index: " + path);
    return index;
}

void save_encoder(const EncoderParameters& params, const std::string& path) {
    nlohmann::json header;
    header["kind"] = "encoder_checkpoint";
    header["format_version"] = 1;
    header["dim"] = params.dim;
    header["idf_weighting"] = params.idf_weighting;
    header["parameter_version"] = params.parameter_version;
    header["total_docs"] = params.vocab->total_docs();
    nlohmann::json stopwords = nlohmann::json::array();
    for (const auto& w : params.vocab->tokenizer_config().stopwords) stopwords.push_back(w);
    header["stopwords"] = std::move(stopwords);
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [term, entry] : params.vocab->terms()) {
        terms.push_back({term, entry.term_id, entry.doc_frequency});
    }
    header["vocabulary"] = std::move(terms);

    const std::string dumped = header.dump();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write encoder checkpoint: " + path);
    write_u64(out, dumped.size());
    out.write(dumped.data(), static_cast<std::streamsize>(dumped.size()));
    for (double v : params.table) {
        float f = static_cast<float>(v);
        out.write(reinterpret_cast<const char*>(&f), sizeof(f));
    }
    if (!out) throw Error(ErrorKind::io, "short write on encoder checkpoint: " + path);
}

EncoderParameters load_encoder(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open encoder checkpoint: " + path);
    const std::uint64_t header_len = read_u64(in);
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    nlohmann::json header = nlohmann::json::parse(header_text, nullptr, false);
    if (header.is_discarded() || header.value("kind", "") != std::string("encoder_checkpoint")) {
        throw Error(ErrorKind::data, "not an encoder checkpoint: " + path);
    }

    TokenizerConfig tok;
    for (const auto& w : header.at("stopwords")) tok.stopwords.insert(w.get<std::string>());
    std::vector<std::tuple<std::string, std::uint32_t, std::uint32_t>> terms;
    for (const auto& t : header.at("vocabulary")) {
        terms.emplace_back(t.at(0).get<std::string>(), t.at(1).get<std::uint32_t>(),
                           t.at(2).get<std::uint32_t>());
    }

    EncoderParameters params;
    params.dim = header.at("dim").get<std::size_t>();
    params.idf_weighting = header.at("idf_weighting").get<bool>();
    params.parameter_version = header.at("parameter_version").get<std::uint64_t>();
    params.vocab = std::make_shared<Vocabulary>(Vocabulary::from_parts(
        terms, header.at("total_docs").get<std::uint64_t>(), std::move(tok)));
    params.table.resize(params.vocab->size() * params.dim);
    for (double& v : params.table) {
        float f = 0.0f;
        in.read(reinterpret_cast<char*>(&f), sizeof(f));
        v = static_cast<double>(f);
    }
    if (!in) throw Error(ErrorKind::data, "truncated encoder checkpoint: " + path);
    return params;
}

}  // namespace bridge
