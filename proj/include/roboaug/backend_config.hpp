#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "roboaug/backends.hpp"
#include "roboaug/mock_backends.hpp"

namespace roboaug {

/// One `[section]` from backends.toml. `kind` is one of
/// chat | image | image_subject | embed; `provider` selects mock or http.
struct BackendEntry {
    std::string name;
    std::string kind;
    std::string provider = "http";
    std::string base_url;
    std::string model_id;
    std::string api_key_env;
    std::size_t dimension = 384;  // embed mocks
    int timeout_seconds = 60;
};

struct BackendConfig {
    std::vector<BackendEntry> entries;
    std::string source_digest;  // digest of the effective configuration

    const BackendEntry* find_kind(const std::string& kind) const;
};

// Minimal TOML subset: [sections], key = value with quoted strings, integers
// and booleans, `#` comments. Errors carry line numbers.
BackendConfig load_backend_config(const std::filesystem::path& path);

// The default all-mock set: one chat, one text-to-image, one
// subject-conditioned image, and the sbert/gpt3 encoder pair.
BackendConfig mock_backend_config();

/// Constructed clients for one run. Mock entries keep their concrete type so
/// call counters stay reachable from tests.
struct BackendSet {
    std::shared_ptr<ChatBackend> chat;
    std::shared_ptr<ImageBackend> image;           // text-to-image
    std::shared_ptr<ImageBackend> image_subject;   // may be null
    std::map<std::string, std::shared_ptr<EmbedBackend>> embedders;  // by name
    std::vector<std::string> embedder_order;       // config order
    BackendConfig config;
};

// Instantiates clients from a config. `seed` drives every mock; HTTP entries
// share the optional audit log.
BackendSet build_backends(const BackendConfig& config, std::uint64_t seed,
                          std::shared_ptr<AuditLog> audit);

}  // namespace roboaug
