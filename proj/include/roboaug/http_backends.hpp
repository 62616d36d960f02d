#pragma once

#include <memory>
#include <string>

#include "roboaug/backends.hpp"

namespace roboaug {

/// Connection settings for one remote service. The API key is read from the
/// environment variable named by `api_key_env`, never stored in files.
struct HttpEndpoint {
    std::string base_url;  // e.g. "http://localhost:8089/v1"
    std::string model_id;
    std::string api_key_env;
    int timeout_seconds = 60;
};

/// POST {base}/chat/completions with an OpenAI-style body; returns
/// choices[0].message.content. 429/5xx map to retryable transport errors,
/// other non-2xx to non-retryable refusals.
class HttpChatBackend : public ChatBackend {
public:
    HttpChatBackend(std::string id, HttpEndpoint endpoint, std::shared_ptr<AuditLog> audit);
    std::string complete(const ChatRequest& request) override;
    const std::string& id() const override { return id_; }

private:
    std::string id_;
    HttpEndpoint endpoint_;
    std::shared_ptr<AuditLog> audit_;
};

/// POST {base}/images/generations; expects data[0].b64_json PNG bytes.
/// Subject-conditioned requests add subject_word plus the base64 of the
/// reference image.
class HttpImageBackend : public ImageBackend {
public:
    HttpImageBackend(std::string id, HttpEndpoint endpoint, bool subject_capable,
                     std::shared_ptr<AuditLog> audit);
    ImageAsset generate(const ImageRequest& request,
                        const std::filesystem::path& out_path) override;
    bool supports_subject_conditioning() const override { return subject_capable_; }
    const std::string& id() const override { return id_; }

private:
    std::string id_;
    HttpEndpoint endpoint_;
    bool subject_capable_;
    std::shared_ptr<AuditLog> audit_;
};

/// POST {base}/embeddings; returns data[*].embedding ordered by index.
class HttpEmbedBackend : public EmbedBackend {
public:
    HttpEmbedBackend(std::string id, HttpEndpoint endpoint, std::shared_ptr<AuditLog> audit);
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    const std::string& id() const override { return id_; }

private:
    std::string id_;
    HttpEndpoint endpoint_;
    std::shared_ptr<AuditLog> audit_;
};

}  // namespace roboaug
