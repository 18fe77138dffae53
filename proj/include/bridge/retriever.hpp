#pragma once

#include <memory>
#include <string>

#include "bridge/bm25.hpp"
#include "bridge/corpus.hpp"
#include "bridge/dense.hpp"

namespace bridge {

class OpenAiClient;

// Retriever-agnostic handle: takes raw query text, returns a ranked list.
// Reward computation, the evaluation harness and the plug-and-play sweep
// all talk to retrievers through this.
class Retriever {
public:
    virtual ~Retriever() = default;
    virtual std::string name() const = 0;
    virtual RankedList search(const std::string& query_text, int k) const = 0;
};

class Bm25Retriever : public Retriever {
public:
    Bm25Retriever(std::shared_ptr<const InvertedIndex> index, TokenizerConfig config)
        : index_(std::move(index)), tokenizer_(std::move(config)) {}

    std::string name() const override { return "bm25"; }
    RankedList search(const std::string& query_text, int k) const override {
        return index_->search(tokenize(query_text, tokenizer_).tokens, k);
    }

private:
    std::shared_ptr<const InvertedIndex> index_;
    TokenizerConfig tokenizer_;
};

class DenseRetriever : public Retriever {
public:
    DenseRetriever(std::shared_ptr<const EncoderParameters> params,
                   std::shared_ptr<const VectorIndex> index)
        : params_(std::move(params)), index_(std::move(index)) {}

    std::string name() const override { return "dense"; }
    RankedList search(const std::string& query_text, int k) const override {
        return dense_search(*params_, *index_, query_text, k);
    }

private:
    std::shared_ptr<const EncoderParameters> params_;
    std::shared_ptr<const VectorIndex> index_;
};

// Dense retrieval over embeddings served by an OpenAI-compatible
// /embeddings endpoint. The document index must have been built with the
// same endpoint configuration (config hashes are compared).
class RemoteRetriever : public Retriever {
public:
    RemoteRetriever(std::shared_ptr<OpenAiClient> client, std::shared_ptr<const VectorIndex> index);

    std::string name() const override { return "remote"; }
    RankedList search(const std::string& query_text, int k) const override;

private:
    std::shared_ptr<OpenAiClient> client_;
    std::shared_ptr<const VectorIndex> index_;
};

// Embeds every corpus document through the remote endpoint.
VectorIndex build_remote_vector_index(OpenAiClient& client, const Corpus& corpus);

}  // namespace bridge
