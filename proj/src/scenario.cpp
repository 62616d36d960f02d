#include "roboaug/scenario.hpp"

#include <nlohmann/json.hpp>

#include "roboaug/util.hpp"

namespace roboaug {

using nlohmann::json;

namespace {

// Sheds markdown emphasis left over from tags like "**A:** hello".
std::string strip_emphasis_wrappers(std::string s) {
    auto is_marker = [](char c) { return c == '*' || c == '_' || c == '`'; };
    std::size_t b = 0, e = s.size();
    while (b < e && is_marker(s[b])) ++b;
    while (e > b && is_marker(s[e - 1])) --e;
    return trim(std::string_view(s).substr(b, e - b));
}

}  // namespace

Scenario normalize_scenario(Scenario s) {
    auto clean = [](const std::string& text) {
        std::string cur = collapse_whitespace(text);
        for (;;) {
            std::string next = strip_emphasis_wrappers(strip_surrounding_quotes(cur));
            if (next == cur) return cur;
            cur = std::move(next);
        }
    };
    s.request = clean(s.request);
    s.action = clean(s.action);
    s.background = clean(s.background);
    return s;
}

std::string scenario_to_json_line(const Scenario& s) {
    json j{{"id", s.id},
           {"route", to_string(s.route)},
           {"seed_value", s.seed_value},
           {"request", s.request},
           {"action", s.action},
           {"background", s.background},
           {"variant", to_string(s.variant)}};
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

Scenario scenario_from_json_line(const std::string& line, int line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ValidationError("scenario file line " + std::to_string(line_no) +
                              ": invalid JSON (" + e.what() + ")");
    }
    const char* keys[] = {"id", "route", "seed_value", "request", "action", "background",
                          "variant"};
    for (const char* k : keys) {
        if (!j.contains(k) || !j[k].is_string())
            throw ValidationError("scenario file line " + std::to_string(line_no) +
                                  ": missing or non-string key \"" + k + "\"");
    }
    Scenario s;
    s.id = j["id"].get<std::string>();
    s.route = route_from_string(j["route"].get<std::string>());
    s.seed_value = j["seed_value"].get<std::string>();
    s.request = j["request"].get<std::string>();
    s.action = j["action"].get<std::string>();
    s.background = j["background"].get<std::string>();
    s.variant = variant_from_string(j["variant"].get<std::string>());
    return s;
}

void write_scenarios_jsonl(const std::vector<Scenario>& scenarios,
                           const std::filesystem::path& path) {
    std::string out;
    for (const auto& s : scenarios) {
        out += scenario_to_json_line(s);
        out.push_back('\n');
    }
    write_file_atomic(path, out);
}

std::vector<Scenario> load_scenarios_jsonl(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::vector<Scenario> out;
    int line_no = 0;
    for (const auto& line : split_lines(content)) {
        ++line_no;
        if (trim(line).empty()) continue;
        out.push_back(scenario_from_json_line(line, line_no));
    }
    return out;
}

}  // namespace roboaug
