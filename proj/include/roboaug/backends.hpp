#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "roboaug/prompts.hpp"

namespace roboaug {

// ---- requests & results ----

struct ChatRequest {
    PromptText prompt;
    double temperature = 1.0;
    int max_tokens = 1024;
    std::string model_id;
};

struct ImageRequest {
    ImagePrompt prompt;
    int width = 512;
    int height = 512;
    std::optional<std::int64_t> seed;
    std::string model_id;
};

/// A generated image on disk plus the metadata that produced it. The PNG and
/// its `<name>.png.meta.json` sidecar both exist once a generate call returns.
struct ImageAsset {
    std::filesystem::path path;
    std::string prompt_text;
    std::string backend_id;
    std::optional<std::int64_t> seed;
    std::string created_at;

    std::filesystem::path sidecar_path() const {
        std::filesystem::path p = path;
        p += ".meta.json";
        return p;
    }
};

struct EmbeddingVector {
    std::vector<double> values;
    std::string backend_id;

    std::size_t dimension() const { return values.size(); }
};

// ---- errors ----

enum class BackendErrorKind { transport, refusal, capability, protocol };

struct BackendError : std::runtime_error {
    BackendErrorKind kind = BackendErrorKind::transport;
    bool retryable = false;
    int attempts = 1;

    BackendError(BackendErrorKind k, bool retry, const std::string& msg)
        : std::runtime_error(msg), kind(k), retryable(retry) {}
};

// ---- interfaces ----

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual const std::string& id() const = 0;
};

class ImageBackend {
public:
    virtual ~ImageBackend() = default;
    // Writes the PNG and its sidecar below `out_path` (temp file + rename, so
    // no partially written asset is ever observable).
    virtual ImageAsset generate(const ImageRequest& request,
                                const std::filesystem::path& out_path) = 0;
    virtual bool supports_subject_conditioning() const = 0;
    virtual const std::string& id() const = 0;
};

class EmbedBackend {
public:
    virtual ~EmbedBackend() = default;
    // One finite vector per input, order preserved, all the same dimension.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
    virtual const std::string& id() const = 0;
};

// ---- retry / throttling / audit ----

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{250};
    double backoff_factor = 2.0;
    int max_concurrent = 4;
};

/// Caps the number of in-flight backend calls. Shared across workers.
class Throttle {
public:
    explicit Throttle(int max_concurrent);

    class Slot {
    public:
        explicit Slot(Throttle* t);
        ~Slot();
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

    private:
        Throttle* throttle_;
    };
    Slot acquire() { return Slot(this); }

private:
    friend class Slot;
    std::mutex mu_;
    std::condition_variable cv_;
    int available_;
};

/// Append-only JSONL log of live backend calls; appends are serialized.
class AuditLog {
public:
    explicit AuditLog(std::filesystem::path path) : path_(std::move(path)) {}

    void record(const std::string& backend_id, const std::string& request_digest,
                std::chrono::milliseconds latency, int attempt, bool ok);

    const std::filesystem::path& path() const { return path_; }

private:
    std::mutex mu_;
    std::filesystem::path path_;
};

/// Dispatches image requests by capability. Subject-conditioned requests go
/// to the subject-capable backend; with `ablate_subject_conditioning` set
/// they are instead stripped to plain text-to-image, sent to the text
/// backend, and their sidecar is annotated with the ablation.
class ImageRouter {
public:
    ImageRouter(ImageBackend& text_backend, ImageBackend* subject_backend,
                bool ablate_subject_conditioning);

    ImageAsset generate(const ImageRequest& request, const std::filesystem::path& out_path);

private:
    ImageBackend& text_backend_;
    ImageBackend* subject_backend_;
    bool ablate_;
};

struct RetryHooks {
    // Injected for tests; defaults to a real sleep.
    std::function<void(std::chrono::milliseconds)> sleep;
    // Called once per attempt after its outcome is known (error == nullptr on
    // success).
    std::function<void(int attempt, const BackendError* error)> on_attempt;
    Throttle* throttle = nullptr;
};

std::chrono::milliseconds retry_delay(const RetryPolicy& policy, int attempt);

// Attempt ordinal of the retry loop currently running on this thread
// (1 outside any loop). Lets transport-level audit records name the attempt.
int current_retry_attempt();

namespace detail {
struct RetryAttemptScope {
    explicit RetryAttemptScope(int attempt);
    ~RetryAttemptScope();
};
}  // namespace detail

// Runs `op`, retrying retryable BackendErrors with exponential backoff.
// Non-retryable errors propagate immediately; after max_attempts the last
// error is rethrown annotated with the attempt count.
template <typename F>
auto with_retry(F&& op, const RetryPolicy& policy, const RetryHooks& hooks = {})
    -> decltype(op()) {
    if (policy.max_attempts < 1)
        throw std::invalid_argument("RetryPolicy.max_attempts must be >= 1");
    for (int attempt = 1;; ++attempt) {
        std::optional<Throttle::Slot> slot;
        if (hooks.throttle) slot.emplace(hooks.throttle);
        detail::RetryAttemptScope attempt_scope(attempt);
        try {
            auto result = op();
            if (hooks.on_attempt) hooks.on_attempt(attempt, nullptr);
            return result;
        } catch (BackendError& e) {
            if (hooks.on_attempt) hooks.on_attempt(attempt, &e);
            e.attempts = attempt;
            if (!e.retryable || attempt >= policy.max_attempts) {
                if (attempt > 1) {
                    BackendError annotated(e.kind, e.retryable,
                                           std::string(e.what()) + " (after " +
                                               std::to_string(attempt) + " attempts)");
                    annotated.attempts = attempt;
                    throw annotated;
                }
                throw;
            }
            slot.reset();
            const auto delay = retry_delay(policy, attempt);
            if (hooks.sleep)
                hooks.sleep(delay);
            else
                std::this_thread::sleep_for(delay);
        }
    }
}

}  // namespace roboaug
