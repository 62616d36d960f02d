#include "roboaug/parser.hpp"

#include <cctype>
#include <optional>
#include <sstream>

#include "roboaug/util.hpp"

namespace roboaug {

namespace {

enum class Field { none, request, action, background };

struct TagHit {
    std::size_t pos = 0;            // where the tag starts
    Field field = Field::none;
    std::size_t content_start = 0;  // first character after the tag
    bool parenthesized = false;     // "(Background: ...)" form
};

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool boundary_before(const std::string& line, std::size_t pos) {
    return pos == 0 || !is_alnum(line[pos - 1]);
}

std::size_t skip_spaces(const std::string& line, std::size_t i) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    return i;
}

bool match_ci(const std::string& line, std::size_t i, std::string_view word) {
    if (i + word.size() > line.size()) return false;
    for (std::size_t k = 0; k < word.size(); ++k) {
        if (std::tolower(static_cast<unsigned char>(line[i + k])) != word[k]) return false;
    }
    return true;
}

// Recognizes "A:", "Person A:", "B:", "Person B:", "Background:" and
// "(Background ...)" at position i. Tags must sit on a word boundary.
std::optional<TagHit> match_tag_at(const std::string& line, std::size_t i) {
    if (i >= line.size()) return std::nullopt;

    if (line[i] == '(') {
        std::size_t j = skip_spaces(line, i + 1);
        if (match_ci(line, j, "background")) {
            j += 10;
            j = skip_spaces(line, j);
            if (j < line.size() && line[j] == ':') ++j;
            return TagHit{i, Field::background, skip_spaces(line, j), true};
        }
        return std::nullopt;
    }

    if (!boundary_before(line, i)) return std::nullopt;

    if (match_ci(line, i, "background")) {
        std::size_t j = skip_spaces(line, i + 10);
        if (j < line.size() && line[j] == ':')
            return TagHit{i, Field::background, skip_spaces(line, j + 1), false};
        return std::nullopt;
    }

    std::size_t speaker_pos = i;
    if (match_ci(line, i, "person")) {
        speaker_pos = skip_spaces(line, i + 6);
        if (speaker_pos == i + 6) return std::nullopt;  // "personal", etc.
    }
    if (speaker_pos >= line.size()) return std::nullopt;
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(line[speaker_pos])));
    if (c != 'a' && c != 'b') return std::nullopt;
    std::size_t j = skip_spaces(line, speaker_pos + 1);
    if (j >= line.size() || line[j] != ':') return std::nullopt;
    return TagHit{i, c == 'a' ? Field::request : Field::action, skip_spaces(line, j + 1), false};
}

std::vector<TagHit> scan_tags(const std::string& line) {
    std::vector<TagHit> hits;
    std::size_t i = 0;
    while (i < line.size()) {
        if (auto hit = match_tag_at(line, i)) {
            hits.push_back(*hit);
            i = hit->content_start;
        } else {
            ++i;
        }
    }
    return hits;
}

// "N." / "N)" / "-" / "*" / "•" item heads. Returns the ordinal (-1 for
// unnumbered bullets) and where the content begins.
struct ItemHead {
    int ordinal = -1;
    std::size_t content_start = 0;
};

std::optional<ItemHead> match_item_head(const std::string& line) {
    std::size_t i = skip_spaces(line, 0);
    if (i >= line.size()) return std::nullopt;
    if (std::isdigit(static_cast<unsigned char>(line[i]))) {
        std::size_t j = i;
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j])) &&
               j - i < 6)
            ++j;
        if (j < line.size() && (line[j] == '.' || line[j] == ')')) {
            int ordinal = 0;
            for (std::size_t k = i; k < j; ++k) ordinal = ordinal * 10 + (line[k] - '0');
            return ItemHead{ordinal, skip_spaces(line, j + 1)};
        }
        return std::nullopt;
    }
    if ((line[i] == '-' || line[i] == '*') && i + 1 < line.size() && line[i + 1] == ' ')
        return ItemHead{-1, skip_spaces(line, i + 2)};
    if (match_ci(line, i, "\xe2\x80\xa2") && i + 3 < line.size() && line[i + 3] == ' ')
        return ItemHead{-1, skip_spaces(line, i + 4)};
    return std::nullopt;
}

struct RawItem {
    int ordinal = -1;    // number from the head, when present
    int start_line = 0;  // 1-based
    bool from_head = false;
    bool has_tags = false;
    std::vector<std::pair<int, std::string>> lines;
};

std::vector<RawItem> segment_items(const std::vector<std::string>& lines) {
    bool any_head = false;
    for (const auto& l : lines) {
        if (match_item_head(l)) {
            any_head = true;
            break;
        }
    }

    std::vector<RawItem> items;
    if (any_head) {
        // Head-delimited items; text before the first head is preamble.
        RawItem* current = nullptr;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const int line_no = static_cast<int>(i) + 1;
            if (auto head = match_item_head(lines[i])) {
                items.push_back(RawItem{head->ordinal, line_no, true, false, {}});
                current = &items.back();
                const std::string rest = lines[i].substr(head->content_start);
                if (!trim(rest).empty()) current->lines.emplace_back(line_no, rest);
            } else if (current != nullptr) {
                current->lines.emplace_back(line_no, lines[i]);
            }
        }
        for (auto& item : items)
            for (const auto& [no, text] : item.lines)
                if (!scan_tags(text).empty()) item.has_tags = true;
    } else {
        // Blank-line separated blocks; a fresh A-tag after a B-line also
        // starts a new block so back-to-back dialogues without separators
        // still split.
        RawItem current;
        bool has_b = false;
        auto flush = [&]() {
            if (!current.lines.empty()) items.push_back(std::move(current));
            current = RawItem{};
            has_b = false;
        };
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const int line_no = static_cast<int>(i) + 1;
            if (trim(lines[i]).empty()) {
                flush();
                continue;
            }
            const auto hits = scan_tags(lines[i]);
            const bool starts_with_a = !hits.empty() && hits.front().field == Field::request &&
                                       hits.front().pos == skip_spaces(lines[i], 0);
            if (starts_with_a && has_b) flush();
            if (current.lines.empty()) current.start_line = line_no;
            current.lines.emplace_back(line_no, lines[i]);
            if (!hits.empty()) current.has_tags = true;
            for (const auto& h : hits)
                if (h.field == Field::action) has_b = true;
        }
        flush();
    }
    return items;
}

void append_text(std::string& target, std::string_view piece) {
    const std::string t = trim(piece);
    if (t.empty()) return;
    if (!target.empty()) target.push_back(' ');
    target += t;
}

struct ExtractedItem {
    std::string request;
    std::string action;
    std::string background;
};

ExtractedItem extract_fields(const RawItem& item) {
    ExtractedItem out;
    Field open = Field::none;
    bool background_done = false;  // a blank line seals a non-empty background
    auto field_ref = [&out](Field f) -> std::string& {
        switch (f) {
            case Field::request: return out.request;
            case Field::action: return out.action;
            default: return out.background;
        }
    };

    for (const auto& [line_no, line] : item.lines) {
        if (trim(line).empty()) {
            if (open == Field::background && !out.background.empty()) background_done = true;
            continue;
        }
        const auto hits = scan_tags(line);
        if (hits.empty()) {
            if (open == Field::action && out.background.empty() && !out.action.empty()) {
                // Untagged line after B's reads as the environment description.
                open = Field::background;
            }
            if (open == Field::background && background_done) continue;  // postamble
            if (open != Field::none) append_text(field_ref(open), line);
            continue;
        }
        if (open != Field::none && hits.front().pos > 0 &&
            !(open == Field::background && background_done))
            append_text(field_ref(open), std::string_view(line).substr(0, hits.front().pos));
        for (std::size_t h = 0; h < hits.size(); ++h) {
            const std::size_t end = h + 1 < hits.size() ? hits[h + 1].pos : line.size();
            std::string content =
                trim(std::string_view(line).substr(hits[h].content_start,
                                                   end - hits[h].content_start));
            if (hits[h].parenthesized && !content.empty() && content.back() == ')')
                content = trim(std::string_view(content).substr(0, content.size() - 1));
            open = hits[h].field;
            background_done = false;
            append_text(field_ref(open), content);
        }
    }
    return out;
}

std::string pad_index(int n) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", n);
    return buf;
}

// Key used to decide whether a parsed B-line restates the seed action:
// case- and whitespace-insensitive, trailing sentence punctuation ignored.
std::string action_drift_key(const std::string& s) {
    std::string k = to_lower(collapse_whitespace(s));
    while (!k.empty() && (k.back() == '.' || k.back() == '!')) k.pop_back();
    return trim(k);
}

}  // namespace

ParseReport parse_scenarios(const std::string& raw, Route route, const std::string& seed_value,
                            int expected_count) {
    if (expected_count < 1) throw ValidationError("expected_count must be >= 1");
    if (trim(raw).empty()) throw ParseError("raw backend output is empty");

    const auto lines = split_lines(raw);
    const auto items = segment_items(lines);

    ParseReport report;
    report.expected_count = expected_count;

    const std::string seed_trimmed = trim(seed_value);
    const std::string slug = slugify(seed_trimmed);
    int kept = 0;

    int candidate_no = 0;
    for (std::size_t idx = 0; idx < items.size(); ++idx) {
        const RawItem& item = items[idx];
        // Tagless blocks in unnumbered output are prose, not failed items.
        if (!item.from_head && !item.has_tags) continue;
        ++candidate_no;
        const int display_no = item.ordinal > 0 ? item.ordinal : candidate_no;
        ExtractedItem fields = extract_fields(item);

        Scenario s;
        s.route = route;
        s.seed_value = seed_trimmed;
        s.request = fields.request;
        s.action = fields.action;
        s.background = fields.background;
        s = normalize_scenario(std::move(s));

        std::vector<std::string> missing;
        if (s.request.empty()) missing.push_back("request");
        if (s.action.empty()) missing.push_back("action");
        if (s.background.empty()) missing.push_back("background");
        if (!missing.empty()) {
            std::ostringstream msg;
            msg << "item " << display_no << ": missing ";
            for (std::size_t i = 0; i < missing.size(); ++i)
                msg << (i ? ", " : "") << missing[i];
            report.warnings.push_back({item.start_line, msg.str()});
            continue;
        }

        if (route == Route::action) {
            if (action_drift_key(s.action) != action_drift_key(seed_trimmed)) {
                report.warnings.push_back(
                    {item.start_line, "item " + std::to_string(display_no) +
                                          ": reflected action differs from the seed action; "
                                          "using the seed text"});
            }
            s.action = seed_trimmed;
        }

        if (s.request.find('?') != std::string::npos) {
            report.warnings.push_back({item.start_line,
                                       "item " + std::to_string(display_no) +
                                           ": request contains a question mark"});
        }

        ++kept;
        s.id = to_string(route) + "-" + slug + "-" + pad_index(kept);
        report.scenarios.push_back(std::move(s));
    }

    if (report.scenarios.empty())
        throw ParseError("no scenarios could be parsed (" + std::to_string(items.size()) +
                         " candidate items examined)");

    if (kept < expected_count) {
        report.warnings.push_back({0, "parsed " + std::to_string(kept) + " of expected " +
                                          std::to_string(expected_count) + " scenarios"});
    } else if (kept > expected_count) {
        report.warnings.push_back({0, "parsed " + std::to_string(kept) +
                                          " scenarios, more than the expected " +
                                          std::to_string(expected_count)});
    }
    return report;
}

}  // namespace roboaug
