#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bridge/corpus.hpp"

namespace bridge {

class OpenAiClient;

// One cached caption: keyed by (query_id, image content hash) so a change
// to the image re-captions while everything else stays cached.
struct CaptionRecord {
    std::string query_id;
    std::string image_hash;
    std::string caption_text;
    std::string provider;
    std::string model_id;
};

// JSONL-backed caption store. Append-only during a run; reloading yields a
// superset of what was stored.
class CaptionCache {
public:
    CaptionCache() = default;
    explicit CaptionCache(std::string path);

    std::optional<std::string> lookup(const std::string& query_id,
                                      const std::string& image_hash) const;
    void append(const CaptionRecord& record);
    std::size_t size() const { return records_.size(); }

private:
    std::string path_;
    std::map<std::pair<std::string, std::string>, CaptionRecord> records_;
};

enum class CaptionMode { offline, remote_allowed };

extern const char* kCaptionSystemPrompt;

// Single-image captioning call, temperature 0.
std::string remote_caption(const OpenAiClient& client, const std::string& image_ref);

// Resolution order: the query's inline caption, then the cache, then a
// remote call (only in remote_allowed mode; the result is appended to the
// cache). Multi-image captions are joined with "; " in image_refs order.
// A query without images resolves to the empty caption.
std::string get_caption(const MultimodalQuery& query, CaptionCache* cache,
                        const OpenAiClient* client, CaptionMode mode);

}  // namespace bridge
