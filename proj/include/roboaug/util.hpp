#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace roboaug {

// Raised for bad inputs: malformed files, broken invariants, failed checks.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---- hashing ----

// FNV-1a, 64-bit. Used for content digests, cache keys and deterministic seeding.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ull);

std::string to_hex(std::uint64_t v);

// Digest of a byte string as a fixed-width hex token.
std::string digest_hex(std::string_view data);

// ---- strings ----

std::string trim(std::string_view s);

// Runs of ASCII whitespace become a single space; ends trimmed.
std::string collapse_whitespace(std::string_view s);

// Strips matching surrounding quote pairs (straight and typographic), repeatedly.
std::string strip_surrounding_quotes(std::string_view s);

std::string to_lower(std::string_view s);

// Lowercase alnum with '-' separators, e.g. "I will clean up" -> "i-will-clean-up".
std::string slugify(std::string_view s);

std::vector<std::string> split_lines(std::string_view text);

bool starts_with_ci(std::string_view s, std::string_view prefix);

// Replaces every occurrence of `from` in `s`.
std::string replace_all(std::string s, std::string_view from, std::string_view to);

// Count of UTF-8 code points; multi-byte sequences count once. Used for table padding.
std::size_t display_width(std::string_view s);

// Percentage with one decimal, half away from zero: 0.3625 -> "36.3".
std::string format_pct(double fraction);

std::string format_double(double v, int precision);

// ---- base64 ----

std::string base64_encode(std::string_view data);
std::string base64_decode(std::string_view data);

// ---- files ----

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

// Writes to `<path>.tmp` then renames, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

// ---- time ----

// UTC timestamp like "2024-05-01T12:30:00Z".
std::string iso8601_utc_now();

// ---- parallelism ----

// Applies fn to each index [0, n) on up to `workers` threads; results land in
// index order, so output is deterministic regardless of scheduling.
template <typename T>
std::vector<T> parallel_map(std::size_t n, std::size_t workers,
                            const std::function<T(std::size_t)>& fn);

}  // namespace roboaug

#include <atomic>
#include <thread>

namespace roboaug {

template <typename T>
std::vector<T> parallel_map(std::size_t n, std::size_t workers,
                            const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(n);
    if (n == 0) return out;
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                out[i] = fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
    return out;
}

}  // namespace roboaug
