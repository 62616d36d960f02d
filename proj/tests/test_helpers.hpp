#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#ifndef ROBOAUG_SOURCE_DIR
#error "ROBOAUG_SOURCE_DIR must be defined by the build"
#endif

namespace testutil {

inline std::filesystem::path source_dir() { return ROBOAUG_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }
inline std::filesystem::path templates_dir() { return data_dir() / "templates"; }
inline std::filesystem::path fixtures_dir() { return source_dir() / "tests" / "fixtures"; }

/// Fresh directory under the system temp root; removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0;; ++i) {
            auto candidate = base / ("roboaug-test-" + tag + "-" + std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directories(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testutil
