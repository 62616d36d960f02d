#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace roboaug {

/// One entry of the closed robot action set. `index` is the stable position
/// within its catalog and doubles as the class id during evaluation.
struct ActionLabel {
    int index = 0;
    std::string text;

    bool operator==(const ActionLabel&) const = default;
};

/// Ordered, duplicate-free set of actions the robot can perform.
/// Immutable after load; safe to share across threads.
class ActionCatalog {
public:
    ActionCatalog() = default;
    ActionCatalog(std::vector<ActionLabel> actions, std::string source_path);

    const std::vector<ActionLabel>& actions() const { return actions_; }
    const std::string& source_path() const { return source_path_; }
    std::size_t size() const { return actions_.size(); }
    const ActionLabel& at(int index) const;

    // Content digest over the ordered texts; keys the embedding cache.
    std::string digest() const;

    bool operator==(const ActionCatalog&) const = default;

private:
    std::vector<ActionLabel> actions_;
    std::string source_path_;
};

/// Ordered, duplicate-free set of everyday locations used to seed dialogues.
struct LocationCatalog {
    std::vector<std::string> locations;
    std::string source_path;

    bool operator==(const LocationCatalog&) const = default;
};

// File conventions for both catalogs: UTF-8, one entry per line, blank lines
// and `#` comments ignored, entries trimmed. Throws ValidationError with line
// numbers on duplicates, and on catalogs that are empty (or, for actions,
// shorter than two entries).
ActionCatalog load_action_catalog(const std::filesystem::path& path);
LocationCatalog load_location_catalog(const std::filesystem::path& path);

void save_action_catalog(const ActionCatalog& catalog, const std::filesystem::path& path);
void save_location_catalog(const LocationCatalog& catalog, const std::filesystem::path& path);

}  // namespace roboaug
