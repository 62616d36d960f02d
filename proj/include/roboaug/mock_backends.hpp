#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <mutex>
#include <string>
#include <vector>

#include "roboaug/backends.hpp"

namespace roboaug {

// Deterministic stand-ins for the remote services. The generator paths are
// pure functions of (request, seed), so whole pipeline runs reproduce
// byte-for-byte. Call counters support wiring assertions in tests.

/// Emits ten numbered dialogue items shaped like real chat output. Detects
/// the route from the prompt: a "B: <action>" line pins the reflected action,
/// otherwise the location after "in a" seeds the content.
class MockChatBackend : public ChatBackend {
public:
    MockChatBackend(std::string id, std::uint64_t seed);

    std::string complete(const ChatRequest& request) override;
    const std::string& id() const override { return id_; }

    // Test scripting: responses served verbatim before the generator runs.
    void set_fixture(std::string text);
    void push_scripted(std::string text);

    int calls() const { return calls_.load(); }

private:
    std::string generate(const ChatRequest& request) const;

    std::string id_;
    std::uint64_t seed_;
    std::atomic<int> calls_{0};
    std::mutex mu_;
    std::string fixture_;
    std::deque<std::string> scripted_;
};

/// Renders a deterministic gradient-pattern PNG derived from a hash of
/// (prompt, seed, size) and writes the metadata sidecar next to it.
class MockImageBackend : public ImageBackend {
public:
    MockImageBackend(std::string id, std::uint64_t seed, bool subject_capable);

    ImageAsset generate(const ImageRequest& request,
                        const std::filesystem::path& out_path) override;
    bool supports_subject_conditioning() const override { return subject_capable_; }
    const std::string& id() const override { return id_; }

    int calls() const { return calls_.load(); }

private:
    std::string id_;
    std::uint64_t seed_;
    bool subject_capable_;
    std::atomic<int> calls_{0};
};

/// Hash-seeded unit-free embeddings: identical strings map to identical
/// vectors of the configured dimension.
class MockEmbedBackend : public EmbedBackend {
public:
    MockEmbedBackend(std::string id, std::size_t dimension, std::uint64_t seed);

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    const std::string& id() const override { return id_; }

    std::size_t dimension() const { return dimension_; }
    int calls() const { return calls_.load(); }

private:
    std::string id_;
    std::size_t dimension_;
    std::uint64_t seed_;
    std::atomic<int> calls_{0};
};

// Writes a PNG + sidecar for `request` under `out_path` on behalf of a
// backend. Shared by the mock and the HTTP client.
ImageAsset write_image_asset(const ImageRequest& request, const std::string& backend_id,
                             const std::filesystem::path& out_path, const std::string& png_bytes);

}  // namespace roboaug
