#include "roboaug/backend_config.hpp"

#include <algorithm>
#include <sstream>

#include "roboaug/http_backends.hpp"
#include "roboaug/util.hpp"

namespace roboaug {

namespace {

const char* kKinds[] = {"chat", "image", "image_subject", "embed"};

[[noreturn]] void fail_at(const std::filesystem::path& path, int line, const std::string& msg) {
    throw ValidationError("backend config " + path.string() + ":" + std::to_string(line) + ": " +
                          msg);
}

std::string unquote(const std::filesystem::path& path, int line_no, const std::string& value) {
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'')) {
        if (value.back() != value.front())
            fail_at(path, line_no, "unterminated string value");
        return value.substr(1, value.size() - 2);
    }
    return value;
}

std::string config_digest(const std::vector<BackendEntry>& entries) {
    std::ostringstream ss;
    for (const auto& e : entries) {
        ss << e.name << '\x1f' << e.kind << '\x1f' << e.provider << '\x1f' << e.base_url
           << '\x1f' << e.model_id << '\x1f' << e.api_key_env << '\x1f' << e.dimension
           << '\x1f' << e.timeout_seconds << '\n';
    }
    return digest_hex(ss.str());
}

}  // namespace

const BackendEntry* BackendConfig::find_kind(const std::string& kind) const {
    for (const auto& e : entries)
        if (e.kind == kind) return &e;
    return nullptr;
}

BackendConfig load_backend_config(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    BackendConfig config;
    BackendEntry* current = nullptr;
    int line_no = 0;
    for (const auto& raw : split_lines(content)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail_at(path, line_no, "malformed section header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) fail_at(path, line_no, "empty section name");
            for (const auto& e : config.entries)
                if (e.name == name) fail_at(path, line_no, "duplicate section [" + name + "]");
            config.entries.push_back(BackendEntry{});
            current = &config.entries.back();
            current->name = name;
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail_at(path, line_no, "expected key = value");
        if (current == nullptr) fail_at(path, line_no, "key outside any [section]");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        // strip trailing comment on unquoted values
        if (!value.empty() && value.front() != '"' && value.front() != '\'') {
            const std::size_t hash = value.find('#');
            if (hash != std::string::npos) value = trim(value.substr(0, hash));
        }
        value = unquote(path, line_no, value);

        if (key == "kind") current->kind = value;
        else if (key == "provider") current->provider = value;
        else if (key == "base_url") current->base_url = value;
        else if (key == "model_id") current->model_id = value;
        else if (key == "api_key_env") current->api_key_env = value;
        else if (key == "dimension") {
            try {
                current->dimension = static_cast<std::size_t>(std::stoul(value));
            } catch (...) {
                fail_at(path, line_no, "dimension must be a positive integer");
            }
            if (current->dimension == 0)
                fail_at(path, line_no, "dimension must be a positive integer");
        } else if (key == "timeout_seconds") {
            try {
                current->timeout_seconds = std::stoi(value);
            } catch (...) {
                fail_at(path, line_no, "timeout_seconds must be an integer");
            }
        } else {
            fail_at(path, line_no, "unknown key \"" + key + "\"");
        }
    }

    if (config.entries.empty())
        throw ValidationError("backend config " + path.string() + " defines no backends");
    for (const auto& e : config.entries) {
        if (std::find(std::begin(kKinds), std::end(kKinds), e.kind) == std::end(kKinds))
            throw ValidationError("backend config " + path.string() + ": section [" + e.name +
                                  "] has unknown kind \"" + e.kind + "\"");
        if (e.provider != "mock" && e.provider != "http")
            throw ValidationError("backend config " + path.string() + ": section [" + e.name +
                                  "] has unknown provider \"" + e.provider + "\"");
        if (e.provider == "http" && e.base_url.empty())
            throw ValidationError("backend config " + path.string() + ": section [" + e.name +
                                  "] needs base_url for the http provider");
    }
    config.source_digest = config_digest(config.entries);
    return config;
}

BackendConfig mock_backend_config() {
    BackendConfig config;
    auto add = [&](const char* name, const char* kind, const char* model,
                   std::size_t dimension) {
        BackendEntry e;
        e.name = name;
        e.kind = kind;
        e.provider = "mock";
        e.model_id = model;
        e.dimension = dimension;
        config.entries.push_back(std::move(e));
    };
    add("chat", "chat", "mock-chat", 0);
    add("sdxl", "image", "mock-text-to-image", 0);
    add("blip", "image_subject", "mock-subject-image", 0);
    add("sbert", "embed", "mock-encoder-a", 384);
    add("gpt3", "embed", "mock-encoder-b", 256);
    config.source_digest = config_digest(config.entries);
    return config;
}

BackendSet build_backends(const BackendConfig& config, std::uint64_t seed,
                          std::shared_ptr<AuditLog> audit) {
    BackendSet set;
    set.config = config;
    for (const auto& e : config.entries) {
        const std::uint64_t entry_seed = fnv1a64(e.name, seed ^ 0x6a09e667f3bcc909ull);
        if (e.kind == "chat") {
            if (set.chat) throw ValidationError("more than one chat backend configured");
            if (e.provider == "mock")
                set.chat = std::make_shared<MockChatBackend>(e.name, entry_seed);
            else
                set.chat = std::make_shared<HttpChatBackend>(
                    e.name, HttpEndpoint{e.base_url, e.model_id, e.api_key_env,
                                         e.timeout_seconds},
                    audit);
        } else if (e.kind == "image" || e.kind == "image_subject") {
            const bool subject = e.kind == "image_subject";
            std::shared_ptr<ImageBackend> backend;
            if (e.provider == "mock")
                backend = std::make_shared<MockImageBackend>(e.name, entry_seed, subject);
            else
                backend = std::make_shared<HttpImageBackend>(
                    e.name, HttpEndpoint{e.base_url, e.model_id, e.api_key_env,
                                         e.timeout_seconds},
                    subject, audit);
            auto& slot = subject ? set.image_subject : set.image;
            if (slot) throw ValidationError("more than one \"" + e.kind + "\" backend configured");
            slot = std::move(backend);
        } else if (e.kind == "embed") {
            std::shared_ptr<EmbedBackend> backend;
            if (e.provider == "mock")
                backend = std::make_shared<MockEmbedBackend>(e.name, e.dimension, entry_seed);
            else
                backend = std::make_shared<HttpEmbedBackend>(
                    e.name, HttpEndpoint{e.base_url, e.model_id, e.api_key_env,
                                         e.timeout_seconds},
                    audit);
            set.embedders.emplace(e.name, std::move(backend));
            set.embedder_order.push_back(e.name);
        }
    }
    return set;
}

}  // namespace roboaug
