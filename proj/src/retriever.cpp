#include "bridge/retriever.hpp"

#include "bridge/error.hpp"
#include "bridge/remote.hpp"

namespace bridge {

RemoteRetriever::RemoteRetriever(std::shared_ptr<OpenAiClient> client,
                                 std::shared_ptr<const VectorIndex> index)
    : client_(std::move(client)), index_(std::move(index)) {
    if (index_->config_hash() != client_->config().config_hash()) {
        throw Error(ErrorKind::config,
                    "remote vector index was built against a different endpoint/model");
    }
}

RankedList RemoteRetriever::search(const std::string& query_text, int k) const {
    auto rows = client_->embed({query_text});
    EmbeddingVector query;
    query.values = std::move(rows.at(0));
    if (query.values.size() != index_->dim()) {
        throw Error(ErrorKind::remote, "remote embedding dimension " +
                                           std::to_string(query.values.size()) +
                                           " does not match index dimension " +
                                           std::to_string(index_->dim()));
    }
    return dense_search_embedding(query, *index_, k);
}

VectorIndex build_remote_vector_index(OpenAiClient& client, const Corpus& corpus) {
    std::vector<std::string> doc_ids;
    std::vector<std::string> texts;
    doc_ids.reserve(corpus.size());
    texts.reserve(corpus.size());
    for (const Document& doc : corpus.docs()) {
        doc_ids.push_back(doc.doc_id);
        texts.push_back(doc.text);
    }

    std::vector<double> rows;
    std::size_t dim = 0;
    // Batch to keep request bodies modest.
    const std::size_t kBatch = 64;
    for (std::size_t start = 0; start < texts.size(); start += kBatch) {
        const std::size_t end = std::min(texts.size(), start + kBatch);
        std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                       texts.begin() + static_cast<std::ptrdiff_t>(end));
        auto embedded = client.embed(batch);
        for (const auto& v : embedded) {
            if (dim == 0) dim = v.size();
            if (v.size() != dim) {
                throw Error(ErrorKind::remote, "remote embeddings have inconsistent dimensions");
            }
            rows.insert(rows.end(), v.begin(), v.end());
        }
    }
    if (corpus.empty()) dim = 1;  // empty index still needs a valid shape
    return build_vector_index_from_rows(std::move(doc_ids), dim, std::move(rows),
                                        /*parameter_version=*/0,
                                        client.config().config_hash());
}

}  // namespace bridge
