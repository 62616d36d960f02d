#include "roboaug/http_backends.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "roboaug/mock_backends.hpp"
#include "roboaug/util.hpp"

namespace roboaug {

namespace {

using nlohmann::json;

struct SplitUrl {
    std::string origin;       // scheme://host[:port]
    std::string path_prefix;  // possibly empty, no trailing slash
};

SplitUrl split_base_url(const std::string& base_url) {
    const std::size_t scheme = base_url.find("://");
    if (scheme == std::string::npos)
        throw ValidationError("backend base_url must include a scheme: " + base_url);
    const std::size_t path = base_url.find('/', scheme + 3);
    SplitUrl out;
    if (path == std::string::npos) {
        out.origin = base_url;
    } else {
        out.origin = base_url.substr(0, path);
        out.path_prefix = base_url.substr(path);
        while (!out.path_prefix.empty() && out.path_prefix.back() == '/')
            out.path_prefix.pop_back();
    }
    return out;
}

// One POST with audit bookkeeping. Maps transport failures and 429/5xx to
// retryable errors so with_retry can take over.
json post_json(const std::string& backend_id, const HttpEndpoint& endpoint,
               const std::string& route, const json& body,
               const std::shared_ptr<AuditLog>& audit) {
    const SplitUrl url = split_base_url(endpoint.base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(endpoint.timeout_seconds, 0);
    client.set_read_timeout(endpoint.timeout_seconds, 0);

    httplib::Headers headers;
    if (!endpoint.api_key_env.empty()) {
        const char* key = std::getenv(endpoint.api_key_env.c_str());
        if (key == nullptr || *key == '\0')
            throw BackendError(BackendErrorKind::refusal, false,
                               "environment variable " + endpoint.api_key_env +
                                   " (API key for backend \"" + backend_id + "\") is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const std::string payload = body.dump();
    const std::string digest = digest_hex(payload);
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);
    };
    auto res = client.Post(url.path_prefix + route, headers, payload, "application/json");
    const bool ok = res && res->status >= 200 && res->status < 300;
    if (audit) audit->record(backend_id, digest, elapsed(), current_retry_attempt(), ok);

    if (!res)
        throw BackendError(BackendErrorKind::transport, true,
                           "backend \"" + backend_id + "\": transport failure (" +
                               httplib::to_string(res.error()) + ") [request " + digest + "]");
    if (!ok) {
        const bool retryable = res->status == 429 || res->status >= 500;
        throw BackendError(retryable ? BackendErrorKind::transport : BackendErrorKind::refusal,
                           retryable,
                           "backend \"" + backend_id + "\": HTTP " + std::to_string(res->status) +
                               " [request " + digest + "]");
    }
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw BackendError(BackendErrorKind::protocol, false,
                           "backend \"" + backend_id + "\": response is not valid JSON (" +
                               e.what() + ") [request " + digest + "]");
    }
}

}  // namespace

HttpChatBackend::HttpChatBackend(std::string id, HttpEndpoint endpoint,
                                 std::shared_ptr<AuditLog> audit)
    : id_(std::move(id)), endpoint_(std::move(endpoint)), audit_(std::move(audit)) {}

std::string HttpChatBackend::complete(const ChatRequest& request) {
    json body{{"model", request.model_id.empty() ? endpoint_.model_id : request.model_id},
              {"messages", json::array({json{{"role", "user"}, {"content", request.prompt.text}}})},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};
    const json res = post_json(id_, endpoint_, "/chat/completions", body, audit_);

    if (!res.contains("choices") || !res["choices"].is_array() || res["choices"].empty())
        throw BackendError(BackendErrorKind::protocol, false,
                           "backend \"" + id_ + "\": no choices in chat response");
    const auto& msg = res["choices"][0];
    std::string content;
    if (msg.contains("message") && msg["message"].contains("content"))
        content = msg["message"]["content"].get<std::string>();
    else if (msg.contains("text"))
        content = msg["text"].get<std::string>();
    if (trim(content).empty())
        throw BackendError(BackendErrorKind::refusal, false,
                           "backend \"" + id_ + "\": empty chat completion");
    return content;
}

HttpImageBackend::HttpImageBackend(std::string id, HttpEndpoint endpoint, bool subject_capable,
                                   std::shared_ptr<AuditLog> audit)
    : id_(std::move(id)),
      endpoint_(std::move(endpoint)),
      subject_capable_(subject_capable),
      audit_(std::move(audit)) {}

ImageAsset HttpImageBackend::generate(const ImageRequest& request,
                                      const std::filesystem::path& out_path) {
    if (request.prompt.subject_conditioned && !subject_capable_)
        throw BackendError(BackendErrorKind::capability, false,
                           "backend \"" + id_ + "\" cannot honor a subject-conditioned request");
    json body{{"model", request.model_id.empty() ? endpoint_.model_id : request.model_id},
              {"prompt", request.prompt.text},
              {"width", request.width},
              {"height", request.height},
              {"response_format", "b64_json"}};
    if (request.seed) body["seed"] = *request.seed;
    if (request.prompt.subject_conditioned) {
        body["subject_word"] = *request.prompt.subject_word;
        body["reference_image_b64"] =
            base64_encode(read_file(*request.prompt.reference_image));
    }
    const json res = post_json(id_, endpoint_, "/images/generations", body, audit_);
    if (!res.contains("data") || !res["data"].is_array() || res["data"].empty() ||
        !res["data"][0].contains("b64_json"))
        throw BackendError(BackendErrorKind::protocol, false,
                           "backend \"" + id_ + "\": no image payload in response");
    const std::string png = base64_decode(res["data"][0]["b64_json"].get<std::string>());
    return write_image_asset(request, id_, out_path, png);
}

HttpEmbedBackend::HttpEmbedBackend(std::string id, HttpEndpoint endpoint,
                                   std::shared_ptr<AuditLog> audit)
    : id_(std::move(id)), endpoint_(std::move(endpoint)), audit_(std::move(audit)) {}

std::vector<EmbeddingVector> HttpEmbedBackend::embed(const std::vector<std::string>& texts) {
    if (texts.empty())
        throw BackendError(BackendErrorKind::protocol, false, "embed called with no texts");
    json body{{"model", endpoint_.model_id}, {"input", texts}};
    const json res = post_json(id_, endpoint_, "/embeddings", body, audit_);
    if (!res.contains("data") || !res["data"].is_array() || res["data"].size() != texts.size())
        throw BackendError(BackendErrorKind::protocol, false,
                           "backend \"" + id_ + "\": embedding count mismatch");

    std::vector<EmbeddingVector> out(texts.size());
    std::size_t dim = 0;
    for (const auto& item : res["data"]) {
        const std::size_t idx =
            item.contains("index") ? item["index"].get<std::size_t>() : out.size();
        if (idx >= out.size() || !item.contains("embedding"))
            throw BackendError(BackendErrorKind::protocol, false,
                               "backend \"" + id_ + "\": malformed embedding item");
        EmbeddingVector v;
        v.backend_id = id_;
        v.values = item["embedding"].get<std::vector<double>>();
        for (double x : v.values)
            if (!std::isfinite(x))
                throw BackendError(BackendErrorKind::protocol, false,
                                   "backend \"" + id_ + "\": non-finite embedding value");
        if (dim == 0) dim = v.values.size();
        if (v.values.size() != dim)
            throw BackendError(BackendErrorKind::protocol, false,
                               "backend \"" + id_ +
                                   "\": embedding dimensions disagree within one batch");
        out[idx] = std::move(v);
    }
    return out;
}

}  // namespace roboaug
