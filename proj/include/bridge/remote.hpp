#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bridge {

// Connection settings for an OpenAI-compatible HTTP API. The key is read
// from the named environment variable; secrets never live in config files.
struct RemoteConfig {
    std::string endpoint;  // e.g. "http://localhost:8089/v1" or "https://api.example.com/v1"
    std::string model;
    std::string api_key_env = "BRIDGE_API_KEY";
    int timeout_seconds = 60;

    bool configured() const { return !endpoint.empty() && !model.empty(); }
    std::uint64_t config_hash() const;
};

// One user-message image attachment: either a remote URL passed through or
// a local file inlined as a data URI.
struct ImagePart {
    std::string ref;
};

// Minimal client for /chat/completions and /embeddings.
class OpenAiClient {
public:
    explicit OpenAiClient(RemoteConfig config);

    const RemoteConfig& config() const { return config_; }

    // Returns the first choice's message content. temperature is pinned by
    // the caller (captioning uses 0).
    std::string chat(const std::string& system_prompt, const std::string& user_text,
                     const std::vector<ImagePart>& images, double temperature) const;

    std::vector<std::vector<double>> embed(const std::vector<std::string>& inputs) const;

private:
    RemoteConfig config_;
    std::string scheme_host_;  // scheme://host[:port]
    std::string base_path_;    // path prefix, e.g. "/v1"
};

// Base64 used for inlining local image files into vision chat requests.
std::string base64_encode(const std::string& bytes);

// Content hash used for caption cache keys: bytes of the file when the ref
// resolves to a readable local file, otherwise the ref string itself.
std::string image_content_hash(const std::string& ref);

}  // namespace bridge
