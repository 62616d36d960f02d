#include "roboaug/backends.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "roboaug/util.hpp"

namespace roboaug {

Throttle::Throttle(int max_concurrent) : available_(max_concurrent) {
    if (max_concurrent < 1) throw std::invalid_argument("Throttle needs max_concurrent >= 1");
}

Throttle::Slot::Slot(Throttle* t) : throttle_(t) {
    std::unique_lock lock(t->mu_);
    t->cv_.wait(lock, [t] { return t->available_ > 0; });
    --t->available_;
}

Throttle::Slot::~Slot() {
    {
        std::lock_guard lock(throttle_->mu_);
        ++throttle_->available_;
    }
    throttle_->cv_.notify_one();
}

void AuditLog::record(const std::string& backend_id, const std::string& request_digest,
                      std::chrono::milliseconds latency, int attempt, bool ok) {
    nlohmann::json j{{"backend_id", backend_id},
                     {"request_digest", request_digest},
                     {"latency_ms", latency.count()},
                     {"attempt", attempt},
                     {"ok", ok},
                     {"at", iso8601_utc_now()}};
    std::lock_guard lock(mu_);
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app);
    out << j.dump() << "\n";
}

std::chrono::milliseconds retry_delay(const RetryPolicy& policy, int attempt) {
    const double factor = std::pow(policy.backoff_factor, attempt - 1);
    return std::chrono::milliseconds(
        static_cast<std::int64_t>(std::llround(policy.base_delay.count() * factor)));
}

namespace {
thread_local int t_retry_attempt = 0;
}

int current_retry_attempt() { return t_retry_attempt > 0 ? t_retry_attempt : 1; }

detail::RetryAttemptScope::RetryAttemptScope(int attempt) { t_retry_attempt = attempt; }
detail::RetryAttemptScope::~RetryAttemptScope() { t_retry_attempt = 0; }

ImageRouter::ImageRouter(ImageBackend& text_backend, ImageBackend* subject_backend,
                         bool ablate_subject_conditioning)
    : text_backend_(text_backend),
      subject_backend_(subject_backend),
      ablate_(ablate_subject_conditioning) {}

ImageAsset ImageRouter::generate(const ImageRequest& request,
                                 const std::filesystem::path& out_path) {
    if (!request.prompt.subject_conditioned) return text_backend_.generate(request, out_path);

    if (ablate_) {
        ImageRequest plain = request;
        plain.prompt.subject_conditioned = false;
        plain.prompt.reference_image.reset();
        plain.prompt.subject_word.reset();
        ImageAsset asset = text_backend_.generate(plain, out_path);
        auto meta = nlohmann::json::parse(read_file(asset.sidecar_path()));
        meta["ablation"] = "no_subject_conditioning";
        write_file_atomic(asset.sidecar_path(), meta.dump(2) + "\n");
        return asset;
    }
    if (subject_backend_ == nullptr)
        throw BackendError(BackendErrorKind::capability, false,
                           "subject-conditioned request but no subject-capable image backend "
                           "is configured");
    return subject_backend_->generate(request, out_path);
}

}  // namespace roboaug
