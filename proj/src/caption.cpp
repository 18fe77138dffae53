#include "bridge/caption.hpp"

#include <fstream>

#include "bridge/error.hpp"
#include "bridge/remote.hpp"
#include "json.hpp"

namespace bridge {

const char* kCaptionSystemPrompt =
    "Describe the attached image comprehensively for a technical search system. Identify the "
    "object types, any visible text, labels or identifiers, spatial relationships, structural "
    "features, and domain-specific details (for example error messages, chemical structures, "
    "chart axes and trends, interface elements). Be specific and factual; do not speculate "
    "beyond what is visible. Respond with the description only.";

CaptionCache::CaptionCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // a missing cache file simply starts empty
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) continue;
        CaptionRecord r;
        r.query_id = record.value("query_id", "");
        r.image_hash = record.value("image_hash", "");
        r.caption_text = record.value("caption", "");
        r.provider = record.value("provider", "");
        r.model_id = record.value("model", "");
        if (r.caption_text.empty()) continue;
        records_[{r.query_id, r.image_hash}] = std::move(r);
    }
}

std::optional<std::string> CaptionCache::lookup(const std::string& query_id,
                                                const std::string& image_hash) const {
    auto it = records_.find({query_id, image_hash});
    if (it == records_.end()) return std::nullopt;
    return it->second.caption_text;
}

void CaptionCache::append(const CaptionRecord& record) {
    if (record.caption_text.empty()) {
        throw Error(ErrorKind::data, "caption cache: empty caption_text");
    }
    records_[{record.query_id, record.image_hash}] = record;
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error(ErrorKind::io, "cannot append to caption cache: " + path_);
    nlohmann::json j = {{"query_id", record.query_id},
                        {"image_hash", record.image_hash},
                        {"caption", record.caption_text},
                        {"provider", record.provider},
                        {"model", record.model_id}};
    out << j.dump() << "\n";
}

std::string remote_caption(const OpenAiClient& client, const std::string& image_ref) {
    std::string caption = client.chat(kCaptionSystemPrompt,
                                      "Describe this image for retrieval.",
                                      {ImagePart{image_ref}}, /*temperature=*/0.0);
    const auto first = caption.find_first_not_of(" \t\r\n");
    const auto last = caption.find_last_not_of(" \t\r\n");
    caption = first == std::string::npos ? std::string{}
                                         : caption.substr(first, last - first + 1);
    if (caption.empty()) {
        throw Error(ErrorKind::remote, "remote caption returned an empty response");
    }
    return caption;
}

std::string get_caption(const MultimodalQuery& query, CaptionCache* cache,
                        const OpenAiClient* client, CaptionMode mode) {
    if (query.cached_caption && !query.cached_caption->empty()) {
        return *query.cached_caption;
    }
    if (query.image_refs.empty()) return {};

    std::string joined;
    std::vector<std::pair<std::string, std::string>> missing;  // (ref, hash)
    for (const std::string& ref : query.image_refs) {
        const std::string hash = image_content_hash(ref);
        std::optional<std::string> hit =
            cache ? cache->lookup(query.query_id, hash) : std::nullopt;
        if (hit) {
            if (!joined.empty()) joined += "; ";
            joined += *hit;
        } else {
            missing.emplace_back(ref, hash);
        }
    }
    if (missing.empty()) return joined;

    if (mode == CaptionMode::offline || !client) {
        throw Error(ErrorKind::data, "caption: offline mode and no cached caption for query \"" +
                                         query.query_id + "\"");
    }

    // Remote fill preserves image_refs order, so re-resolve in one pass.
    joined.clear();
    for (const std::string& ref : query.image_refs) {
        const std::string hash = image_content_hash(ref);
        std::optional<std::string> hit =
            cache ? cache->lookup(query.query_id, hash) : std::nullopt;
        std::string caption;
        if (hit) {
            caption = *hit;
        } else {
            caption = remote_caption(*client, ref);
            if (cache) {
                cache->append(CaptionRecord{query.query_id, hash, caption, "openai-compatible",
                                            client->config().model});
            }
        }
        if (!joined.empty()) joined += "; ";
        joined += caption;
    }
    return joined;
}

}  // namespace bridge
