#include "roboaug/catalog.hpp"

#include <map>
#include <sstream>

#include "roboaug/util.hpp"

namespace roboaug {

ActionCatalog::ActionCatalog(std::vector<ActionLabel> actions, std::string source_path)
    : actions_(std::move(actions)), source_path_(std::move(source_path)) {}

const ActionLabel& ActionCatalog::at(int index) const {
    if (index < 0 || static_cast<std::size_t>(index) >= actions_.size())
        throw ValidationError("action index out of range: " + std::to_string(index));
    return actions_[static_cast<std::size_t>(index)];
}

std::string ActionCatalog::digest() const {
    std::string joined;
    for (const auto& a : actions_) {
        joined += a.text;
        joined.push_back('\n');
    }
    return digest_hex(joined);
}

namespace {

// Shared line format: returns (entry, 1-based line number) pairs.
std::vector<std::pair<std::string, int>> read_entries(const std::filesystem::path& path,
                                                      const char* what) {
    if (!std::filesystem::exists(path))
        throw ValidationError(std::string(what) + " catalog file not found: " + path.string());
    const std::string content = read_file(path);
    std::vector<std::pair<std::string, int>> entries;
    int line_no = 0;
    for (const auto& raw : split_lines(content)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        entries.emplace_back(std::move(line), line_no);
    }

    std::map<std::string, int> first_seen;
    for (const auto& [text, line] : entries) {
        auto [it, inserted] = first_seen.emplace(text, line);
        if (!inserted) {
            std::ostringstream msg;
            msg << what << " catalog has duplicate entry \"" << text << "\" at lines "
                << it->second << " and " << line << " (" << path.string() << ")";
            throw ValidationError(msg.str());
        }
    }
    return entries;
}

}  // namespace

ActionCatalog load_action_catalog(const std::filesystem::path& path) {
    const auto entries = read_entries(path, "action");
    if (entries.empty())
        throw ValidationError("action catalog is empty: " + path.string());
    if (entries.size() < 2)
        throw ValidationError("action catalog needs at least 2 actions, got " +
                              std::to_string(entries.size()) + ": " + path.string());
    std::vector<ActionLabel> actions;
    actions.reserve(entries.size());
    int idx = 0;
    for (const auto& [text, line] : entries) actions.push_back({idx++, text});
    return ActionCatalog(std::move(actions), path.string());
}

LocationCatalog load_location_catalog(const std::filesystem::path& path) {
    const auto entries = read_entries(path, "location");
    if (entries.empty())
        throw ValidationError("location catalog is empty: " + path.string());
    LocationCatalog catalog;
    catalog.source_path = path.string();
    catalog.locations.reserve(entries.size());
    for (const auto& [text, line] : entries) catalog.locations.push_back(text);
    return catalog;
}

namespace {

void save_lines(const std::vector<std::string>& lines, const std::filesystem::path& path) {
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out.push_back('\n');
    }
    write_file_atomic(path, out);
}

}  // namespace

void save_action_catalog(const ActionCatalog& catalog, const std::filesystem::path& path) {
    std::vector<std::string> lines;
    lines.reserve(catalog.size());
    for (const auto& a : catalog.actions()) lines.push_back(a.text);
    save_lines(lines, path);
}

void save_location_catalog(const LocationCatalog& catalog, const std::filesystem::path& path) {
    save_lines(catalog.locations, path);
}

}  // namespace roboaug
