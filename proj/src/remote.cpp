#include "bridge/remote.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bridge/error.hpp"
#include "bridge/rng.hpp"
#include "httplib.h"
#include "json.hpp"

namespace bridge {

std::uint64_t RemoteConfig::config_hash() const {
    std::uint64_t h = fnv1a64("remote-v1");
    h = hash_combine(h, fnv1a64(endpoint));
    h = hash_combine(h, fnv1a64(model));
    return h;
}

namespace {

std::string read_api_key(const RemoteConfig& config) {
    if (config.api_key_env.empty()) return {};
    const char* value = std::getenv(config.api_key_env.c_str());
    return value ? std::string(value) : std::string{};
}

// Splits "scheme://host[:port]/base/path" into origin and path prefix.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorKind::config, "remote endpoint must include a scheme: " + endpoint);
    }
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, ""};
    std::string path = endpoint.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {endpoint.substr(0, path_start), path};
}

nlohmann::json post_json(const std::string& scheme_host, const std::string& path,
                         const RemoteConfig& config, const nlohmann::json& body) {
    httplib::Client client(scheme_host);
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    httplib::Headers headers;
    const std::string key = read_api_key(config);
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
        throw Error(ErrorKind::remote, "remote call failed (" + scheme_host + path +
                                           "): " + httplib::to_string(res.error()));
    }
    if (res->status == 401 || res->status == 403) {
        throw Error(ErrorKind::remote,
                    "remote call unauthorized (status " + std::to_string(res->status) +
                        "); check " + config.api_key_env);
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorKind::remote, "remote call returned status " +
                                           std::to_string(res->status) + ": " +
                                           res->body.substr(0, 256));
    }
    nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) {
        throw Error(ErrorKind::remote, "remote response is not valid JSON");
    }
    return parsed;
}

}  // namespace

OpenAiClient::OpenAiClient(RemoteConfig config) : config_(std::move(config)) {
    if (!config_.configured()) {
        throw Error(ErrorKind::config, "remote client requires endpoint and model");
    }
    auto [scheme_host, base_path] = split_endpoint(config_.endpoint);
    scheme_host_ = std::move(scheme_host);
    base_path_ = std::move(base_path);
}

std::string OpenAiClient::chat(const std::string& system_prompt, const std::string& user_text,
                               const std::vector<ImagePart>& images, double temperature) const {
    nlohmann::json user_content;
    if (images.empty()) {
        user_content = user_text;
    } else {
        user_content = nlohmann::json::array();
        user_content.push_back({{"type", "text"}, {"text", user_text}});
        for (const ImagePart& image : images) {
            std::string url = image.ref;
            std::ifstream file(image.ref, std::ios::binary);
            if (file) {
                std::ostringstream bytes;
                bytes << file.rdbuf();
                url = "data:application/octet-stream;base64," + base64_encode(bytes.str());
            }
            user_content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
        }
    }
    nlohmann::json body = {
        {"model", config_.model},
        {"temperature", temperature},
        {"messages",
         {{{"role", "system"}, {"content", system_prompt}},
          {{"role", "user"}, {"content", user_content}}}},
    };
    nlohmann::json response = post_json(scheme_host_, base_path_ + "/chat/completions", config_, body);
    try {
        return response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::remote, "chat response missing choices[0].message.content");
    }
}

std::vector<std::vector<double>> OpenAiClient::embed(
    const std::vector<std::string>& inputs) const {
    nlohmann::json body = {{"model", config_.model}, {"input", inputs}};
    nlohmann::json response = post_json(scheme_host_, base_path_ + "/embeddings", config_, body);
    std::vector<std::vector<double>> out(inputs.size());
    try {
        for (const auto& item : response.at("data")) {
            const std::size_t index = item.at("index").get<std::size_t>();
            if (index >= out.size()) {
                throw Error(ErrorKind::remote, "embeddings response index out of range");
            }
            out[index] = item.at("embedding").get<std::vector<double>>();
        }
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::remote, "embeddings response missing data[].embedding");
    }
    for (const auto& row : out) {
        if (row.empty()) {
            throw Error(ErrorKind::remote, "embeddings response left an input without a vector");
        }
    }
    return out;
}

std::string base64_encode(const std::string& bytes) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                           static_cast<unsigned char>(bytes[i + 2]);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += alphabet[v & 63];
        i += 3;
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::string image_content_hash(const std::string& ref) {
    std::ifstream file(ref, std::ios::binary);
    std::uint64_t h = 0;
    if (file) {
        std::ostringstream bytes;
        bytes << file.rdbuf();
        h = fnv1a64(bytes.str());
    } else {
        h = fnv1a64(ref);
    }
    std::ostringstream hex;
    hex << std::hex << h;
    return hex.str();
}

}  // namespace bridge
